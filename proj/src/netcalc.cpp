#include "dtshare/netcalc.hpp"

#include "dtshare/error.hpp"
#include "dtshare/text.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace dtshare::netcalc {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InputError(std::string("net parameter '") + name + "' must be positive and finite");
}

void require_q(int q) {
    if (q < 0) throw InputError("sharing frequency q must be non-negative");
}

void require_dmax(int d_max) {
    if (d_max < 1) throw InputError("d_max must be at least 1");
}

// C - (|N|-1) E - C_dt
double sharing_capacity(const NetParams& p) {
    return p.bandwidth - (p.contenders - 1) * p.keep_alive - dt_bandwidth(p);
}

} // namespace

void NetParams::validate() const {
    require_positive(bandwidth, "C");
    require_positive(keep_alive, "E");
    if (contenders < 1) throw InputError("net parameter 'contenders' must be at least 1");
    require_positive(dt_deviation, "delta_g");
    require_positive(edge_rate, "upsilon_edge");
    if (!(dt_complexity >= 0.0) || !std::isfinite(dt_complexity))
        throw InputError("net parameter 'chi' must be non-negative");
    require_positive(dt_deadline, "t_dt");
}

void validate_tiers(const TierCatalog& tiers) {
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        if (tiers[i].k != static_cast<int>(i) + 1) throw InputError("tier catalog out of order");
        require_positive(tiers[i].volume, "tier volume");
        require_positive(tiers[i].compute, "tier compute");
        if (i > 0 && (tiers[i].volume <= tiers[i - 1].volume ||
                      tiers[i].compute <= tiers[i - 1].compute))
            throw InputError("tier volume and compute must increase strictly with k");
    }
}

double dt_bandwidth(const NetParams& p) {
    const double denom = p.dt_deadline * p.edge_rate - p.dt_complexity * p.dt_deviation;
    if (!(denom > 0.0))
        throw InfeasibleSyncError("edge cannot process the DT deviation within t_dt");
    return p.dt_deviation * p.edge_rate / denom;
}

ArrivalCurve arrival_curve(const NetParams& p, const ModelSpec& m, int q) {
    require_q(q);
    return {p.keep_alive, q * m.volume};
}

ServiceCurve channel_service(const NetParams& p) { return {p.bandwidth - dt_bandwidth(p), 0.0}; }

ServiceCurve leftover_service(const NetParams& p, const ModelSpec& m, int q) {
    require_q(q);
    const double rate = sharing_capacity(p);
    if (!(rate > 0.0)) throw SaturatedError("no leftover service rate for model sharing");
    return {rate, (p.contenders - 1) * q * m.volume};
}

double horizontal_deviation(const ArrivalCurve& a, const ServiceCurve& s) {
    if (a.rate > s.rate) return std::numeric_limits<double>::infinity();
    // Both curves are affine: the widest gap sits at t = 0.
    return (a.burst + s.backlog) / s.rate;
}

double delay_bound(const NetParams& p, const ModelSpec& m, int q) {
    // (q delta + (|N|-1) q delta) / R = |N| q delta / R
    const double d = horizontal_deviation(arrival_curve(p, m, q), leftover_service(p, m, q));
    if (!std::isfinite(d)) throw SaturatedError("keep-alive rate exceeds the leftover service rate");
    return d;
}

double min_bandwidth(const NetParams& p, const ModelSpec& m, int q, int d_max) {
    require_q(q);
    require_dmax(d_max);
    return 4.0 * d_max / std::numbers::pi * p.contenders * q * m.volume +
           (p.contenders - 1) * p.keep_alive + dt_bandwidth(p);
}

FrequencyBound max_frequency(const NetParams& p, const ModelSpec& m, int d_max) {
    require_dmax(d_max);
    const double capacity = sharing_capacity(p);
    if (!(capacity > 0.0) || capacity < p.keep_alive) return {0, true};
    const double q = capacity * std::numbers::pi / (4.0 * d_max * p.contenders * m.volume);
    // Relative slack so a bandwidth produced by min_bandwidth(q) maps back to q.
    const double floored = std::floor(q * (1.0 + 1e-12));
    if (floored > std::numeric_limits<int>::max()) return {std::numeric_limits<int>::max(), false};
    return {static_cast<int>(floored), false};
}

NetFile read_net_file(std::istream& in) {
    NetFile f;
    std::array<bool, 3> have_volume{};
    std::array<bool, 3> have_compute{};
    for_each_key_value(in, [&](const std::string& key, const std::string& value, std::size_t line) {
        if (key == "C") f.params.bandwidth = parse_double(value, line);
        else if (key == "E") f.params.keep_alive = parse_double(value, line);
        else if (key == "contenders") f.params.contenders = parse_int(value, line);
        else if (key == "delta_g") f.params.dt_deviation = parse_double(value, line);
        else if (key == "upsilon_edge") f.params.edge_rate = parse_double(value, line);
        else if (key == "chi") f.params.dt_complexity = parse_double(value, line);
        else if (key == "t_dt") f.params.dt_deadline = parse_double(value, line);
        else if (key.size() == 11 && key.rfind("tier", 0) == 0 && key.substr(5) == "_delta") {
            const int k = key[4] - '1';
            if (k < 0 || k > 2) throw ParseError(line, "unknown key '" + key + "'");
            f.tiers[k].volume = parse_double(value, line);
            have_volume[k] = true;
        } else if (key.size() == 9 && key.rfind("tier", 0) == 0 && key.substr(5) == "_phi") {
            const int k = key[4] - '1';
            if (k < 0 || k > 2) throw ParseError(line, "unknown key '" + key + "'");
            f.tiers[k].compute = parse_double(value, line);
            have_compute[k] = true;
        } else {
            throw ParseError(line, "unknown key '" + key + "'");
        }
    });
    const bool any = have_volume[0] || have_volume[1] || have_volume[2] || have_compute[0] ||
                     have_compute[1] || have_compute[2];
    if (any) {
        for (int k = 0; k < 3; ++k)
            if (!have_volume[k] || !have_compute[k])
                throw InputError("tier overrides must give tier<k>_delta and tier<k>_phi for k=1..3");
        for (int k = 0; k < 3; ++k) f.tiers[k].k = k + 1;
        validate_tiers(f.tiers);
        f.has_tiers = true;
    }
    f.params.validate();
    return f;
}

NetFile load_net_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open parameter file '" + path + "'");
    return read_net_file(in);
}

} // namespace dtshare::netcalc

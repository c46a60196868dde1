#pragma once

// Deterministic network-calculus model of the model-sharing channel.
//
// Every node in the contention set shares one channel of capacity C. A fixed
// slice C_dt is reserved for digital-twin synchronization; the rest serves
// model traffic. Each flow is token-bucket shaped: keep-alive rate E plus a
// burst of q model copies of size delta(k).

#include <array>
#include <iosfwd>
#include <string>

namespace dtshare::netcalc {

struct NetParams {
    double bandwidth = 1.1e6;       // C, bits/s
    double keep_alive = 1.0e4;      // E, bits/s per flow
    int contenders = 6;             // flows sharing the channel
    double dt_deviation = 1.0e4;    // Delta g, bits per sync
    double edge_rate = 1.0e9;       // edge processing rate, ops/s
    double dt_complexity = 10.0;    // chi, ops per bit
    double dt_deadline = 0.1;       // max DT sync delay, s

    // Throws InputError unless every field is positive.
    void validate() const;
};

struct ModelSpec {
    int k = 1;             // tier 1..3
    double volume = 0.0;   // delta(k), bits
    double compute = 0.0;  // phi(k), ops
};

using TierCatalog = std::array<ModelSpec, 3>;

// Checks tiers are 1,2,3 in order with strictly increasing volume and compute.
void validate_tiers(const TierCatalog& tiers);

// alpha(t) = rate * t + burst
struct ArrivalCurve {
    double rate = 0.0;
    double burst = 0.0;
};

// beta(t) = max(0, rate * t - backlog)
struct ServiceCurve {
    double rate = 0.0;
    double backlog = 0.0;
};

// Bandwidth reserved so an upload of Delta g plus its edge processing fits in
// the sync deadline. Throws InfeasibleSyncError when edge processing alone
// already exceeds the deadline.
double dt_bandwidth(const NetParams& p);

ArrivalCurve arrival_curve(const NetParams& p, const ModelSpec& m, int q);
ServiceCurve channel_service(const NetParams& p);
// Service left for one flow after the other contenders' arrival curves.
// Throws SaturatedError when the leftover rate is not positive.
ServiceCurve leftover_service(const NetParams& p, const ModelSpec& m, int q);

// Horizontal deviation between an affine arrival curve and a rate-backlog
// service curve.
double horizontal_deviation(const ArrivalCurve& a, const ServiceCurve& s);

// |N| q delta / (C - (|N|-1) E - C_dt). Throws SaturatedError when that
// leftover rate is not positive or falls below the flow's own rate E.
double delay_bound(const NetParams& p, const ModelSpec& m, int q);

// Smallest C with delay_bound <= pi / (4 d_max). Meaningful only when the
// implied leftover rate (4 d_max / pi) |N| q delta is at least E.
double min_bandwidth(const NetParams& p, const ModelSpec& m, int q, int d_max);

struct FrequencyBound {
    int q = 0;
    bool saturated = false;  // leftover rate <= 0 or < E; q is then 0
};

// Largest q whose delay bound meets pi / (4 d_max), floored at 0.
FrequencyBound max_frequency(const NetParams& p, const ModelSpec& m, int d_max);

// key=value file. Keys: C, E, contenders, delta_g, upsilon_edge, chi, t_dt,
// plus optional tier<k>_delta / tier<k>_phi (all three tiers or none).
struct NetFile {
    NetParams params;
    TierCatalog tiers{};
    bool has_tiers = false;
};

NetFile read_net_file(std::istream& in);
NetFile load_net_file(const std::string& path);

} // namespace dtshare::netcalc

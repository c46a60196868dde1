#include "dtshare/planner.hpp"

#include "dtshare/error.hpp"
#include "dtshare/mlp.hpp"
#include "dtshare/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace dtshare::planner {

AccuracyTable::AccuracyTable(int max_q)
    : max_q_(max_q), omega_(static_cast<std::size_t>(3 * std::max(max_q, 0)), 0.0),
      filled_(omega_.size(), 0) {
    if (max_q < 1) throw InputError("accuracy table needs at least q = 1");
}

AccuracyTable AccuracyTable::published() {
    AccuracyTable t(5);
    const double rows[3][5] = {
        {0.780, 0.734, 0.817, 0.890, 0.739},  // k = 1
        {0.821, 0.804, 0.923, 0.935, 0.930},  // k = 2
        {0.769, 0.787, 0.872, 0.902, 0.895},  // k = 3
    };
    for (int k = 1; k <= 3; ++k)
        for (int q = 1; q <= 5; ++q) t.set(k, q, rows[k - 1][q - 1]);
    return t;
}

std::size_t AccuracyTable::slot(int k, int q) const {
    if (k < 1 || k > 3 || q < 1 || q > max_q_)
        throw InputError("accuracy table index (k=" + std::to_string(k) + ", q=" +
                         std::to_string(q) + ") outside the grid");
    return static_cast<std::size_t>((k - 1) * max_q_ + (q - 1));
}

double AccuracyTable::at(int k, int q) const {
    const auto s = slot(k, q);
    if (!filled_[s]) throw InputError("accuracy table has no entry for k=" + std::to_string(k) +
                                      ", q=" + std::to_string(q));
    return omega_[s];
}

void AccuracyTable::set(int k, int q, double omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("accuracy must lie in [0,1]");
    const auto s = slot(k, q);
    omega_[s] = omega;
    filled_[s] = 1;
}

bool AccuracyTable::complete() const {
    return std::all_of(filled_.begin(), filled_.end(), [](char f) { return f != 0; });
}

AccuracyTable read_accuracy_csv(std::istream& in) {
    struct Row {
        int k;
        int q;
        double omega;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = trim(raw);
        if (text.empty() || text[0] == '#') continue;
        const auto cells = split(text, ',');
        if (cells.size() != 3) throw ParseError(line, "expected 'k,q,omega'");
        if (rows.empty() && cells[0] == "k") continue;
        rows.push_back({parse_int(cells[0], line), parse_int(cells[1], line),
                        parse_double(cells[2], line), line});
    }
    int max_q = 0;
    for (const auto& r : rows) max_q = std::max(max_q, r.q);
    if (max_q < 1) throw InputError("accuracy CSV has no rows");
    AccuracyTable t(max_q);
    for (const auto& r : rows) {
        try {
            t.set(r.k, r.q, r.omega);
        } catch (const InputError& e) {
            throw ParseError(r.line, e.what());
        }
    }
    if (!t.complete()) throw InputError("accuracy CSV does not cover k=1..3, q=1.." + std::to_string(max_q));
    return t;
}

AccuracyTable load_accuracy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open accuracy file '" + path + "'");
    return read_accuracy_csv(in);
}

void write_accuracy_csv(std::ostream& out, const AccuracyTable& table) {
    out << "k,q,omega\n";
    for (int k = 1; k <= 3; ++k)
        for (int q = 1; q <= table.max_q(); ++q)
            out << k << ',' << q << ',' << format_double(table.at(k, q)) << '\n';
}

netcalc::TierCatalog default_tiers(std::size_t input_dim, int classes) {
    netcalc::TierCatalog tiers{};
    for (int k = 1; k <= 3; ++k) {
        const Mlp model(tier_from_index(k), input_dim, classes, 0);
        const double params = static_cast<double>(model.param_count());
        tiers[k - 1] = {k, 32.0 * params, params};
    }
    return tiers;
}

double objective(const SharingConfig& cfg, const netcalc::NetParams& p, const netcalc::ModelSpec& m) {
    return 4.0 * cfg.d_max / std::numbers::pi * p.contenders * cfg.q * m.volume +
           (p.contenders - 1) * p.keep_alive + m.compute;
}

bool feasible(const SharingConfig& cfg, const AccuracyTable& table, const netcalc::TierCatalog& tiers,
              double theta, double compute_budget) {
    if (cfg.k < 1 || cfg.k > 3 || cfg.q < 1 || cfg.q > table.max_q() || cfg.d_max < 2) return false;
    if (tiers[cfg.k - 1].compute > compute_budget) return false;
    return table.at(cfg.k, cfg.q) >= theta;
}

namespace {

void check_problem(const PlanProblem& problem) {
    netcalc::validate_tiers(problem.tiers);
    problem.net.validate();
    if (!problem.table.complete()) throw InputError("accuracy table incomplete");
}

int d_max_guard(const PlanProblem& problem) { return std::max(2, problem.net.contenders - 1); }

PlanResult finish(const PlanProblem& problem, SharingConfig cfg, std::size_t lookups) {
    const auto& tier = problem.tiers[cfg.k - 1];
    PlanResult r;
    r.config = cfg;
    r.cost = objective(cfg, problem.net, tier);
    r.feasible = true;
    r.bandwidth = netcalc::min_bandwidth(problem.net, tier, cfg.q, cfg.d_max);
    r.table_lookups = lookups;
    return r;
}

} // namespace

PlanResult search_alg2(const PlanProblem& problem) {
    check_problem(problem);
    std::size_t lookups = 0;
    auto omega = [&](int k, int q) {
        ++lookups;
        return problem.table.at(k, q);
    };

    // Largest tier that fits the compute budget.
    int k_hi = 0;
    for (int k = 1; k <= 3; ++k)
        if (problem.tiers[k - 1].compute <= problem.compute_budget) k_hi = k;
    if (k_hi == 0) throw NoFeasibleConfigError("no tier fits the compute budget");
    int k_lo = 1;
    const int q_hi = problem.table.max_q();

    // Bracket the peak of the unimodal omega(., q_hi): a rising step at the
    // midpoint moves the lower end past it, otherwise the upper end drops to it.
    while (k_lo != k_hi) {
        const int k_mid = k_lo + (k_hi - k_lo) / 2;
        if (omega(k_mid, q_hi) < omega(k_mid + 1, q_hi))
            k_lo = k_mid + 1;
        else
            k_hi = k_mid;
    }
    const int k = k_lo;

    // omega does not depend on d_max, so later rounds repeat the scan; the
    // guard bounds them.
    for (int d_max = 2; d_max <= d_max_guard(problem); ++d_max) {
        for (int q = 1; q <= q_hi; ++q)
            if (omega(k, q) >= problem.theta) return finish(problem, {k, q, d_max}, lookups);
    }
    throw NoFeasibleConfigError("no configuration reaches accuracy " +
                                format_double(problem.theta));
}

PlanResult search_exhaustive(const PlanProblem& problem) {
    check_problem(problem);
    std::size_t lookups = 0;
    bool found = false;
    SharingConfig best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 3; ++k) {
        for (int q = 1; q <= problem.table.max_q(); ++q) {
            ++lookups;
            for (int d_max = 2; d_max <= d_max_guard(problem); ++d_max) {
                const SharingConfig cfg{k, q, d_max};
                if (!feasible(cfg, problem.table, problem.tiers, problem.theta,
                              problem.compute_budget))
                    continue;
                const double cost = objective(cfg, problem.net, problem.tiers[k - 1]);
                if (cost < best_cost) {
                    best_cost = cost;
                    best = cfg;
                    found = true;
                }
            }
        }
    }
    if (!found)
        throw NoFeasibleConfigError("no configuration reaches accuracy " +
                                    format_double(problem.theta));
    return finish(problem, best, lookups);
}

} // namespace dtshare::planner

#pragma once

#include "dtshare/netcalc.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace dtshare::planner {

// Recognition accuracy omega(k, q) for tiers k = 1..3 and q = 1..max_q.
class AccuracyTable {
public:
    explicit AccuracyTable(int max_q = 5);

    // Published lookup table for the three distilled tiers, q = 1..5.
    static AccuracyTable published();

    int max_q() const { return max_q_; }
    double at(int k, int q) const;
    void set(int k, int q, double omega);
    bool complete() const;

private:
    std::size_t slot(int k, int q) const;

    int max_q_;
    std::vector<double> omega_;
    std::vector<char> filled_;
};

// CSV rows "k,q,omega"; an optional header line is skipped.
AccuracyTable read_accuracy_csv(std::istream& in);
AccuracyTable load_accuracy_csv(const std::string& path);
void write_accuracy_csv(std::ostream& out, const AccuracyTable& table);

struct SharingConfig {
    int k = 1;
    int q = 1;
    int d_max = 2;
    friend bool operator==(const SharingConfig&, const SharingConfig&) = default;
};

struct PlanResult {
    SharingConfig config;
    double cost = 0.0;
    bool feasible = false;
    double bandwidth = 0.0;        // min bandwidth for the chosen config
    std::size_t table_lookups = 0;  // omega evaluations spent by the search
};

// Tier catalog for the desk-scale learner: volume = 32 bits per parameter,
// compute = parameter count.
netcalc::TierCatalog default_tiers(std::size_t input_dim = 16, int classes = 8);

struct PlanProblem {
    AccuracyTable table = AccuracyTable::published();
    netcalc::TierCatalog tiers = default_tiers();
    netcalc::NetParams net{};
    double theta = 0.9;            // accuracy requirement
    double compute_budget = 1e300;  // F
};

// (4 d_max / pi) |N| q delta(k) + (|N| - 1) E + phi(k); C_dt is constant and left out.
double objective(const SharingConfig& cfg, const netcalc::NetParams& p, const netcalc::ModelSpec& m);

// phi(k) <= F and omega(k, q) >= theta.
bool feasible(const SharingConfig& cfg, const AccuracyTable& table, const netcalc::TierCatalog& tiers,
              double theta, double compute_budget);

// Configuration search: bracket the accuracy-maximizing tier, scan q upward
// from 1, and raise d_max from 2 while nothing qualifies (guard d_max <=
// contenders - 1). Throws NoFeasibleConfigError when the guard trips.
PlanResult search_alg2(const PlanProblem& problem);

// Minimum objective over the full k x q x d_max grid. Throws NoFeasibleConfigError.
PlanResult search_exhaustive(const PlanProblem& problem);

} // namespace dtshare::planner

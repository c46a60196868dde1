#pragma once

#include "dtshare/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace dtshare {

// Per-node parameter vectors plus a ring buffer of past snapshots.
//
// The buffer is primed with the initial condition, so lagged reads before
// t = 0 see h(0) (constant history on [-eps, 0]).
class ConsensusState {
public:
    // `initial` holds nodes * dim values, node-major. `history_depth` is the
    // largest lag (in steps) the state must answer.
    ConsensusState(Topology topology, std::size_t dim, std::vector<double> initial,
                   std::size_t history_depth = 0);

    const Topology& topology() const { return topology_; }
    std::size_t nodes() const { return static_cast<std::size_t>(topology_.node_count()); }
    std::size_t dim() const { return dim_; }
    double time() const { return time_; }
    std::size_t steps() const { return steps_; }
    std::size_t history_depth() const { return ring_.size() - 1; }

    std::span<const double> values() const { return lagged(0); }
    std::span<const double> node(std::size_t i) const { return values().subspan(i * dim_, dim_); }
    // Snapshot `lag` steps back. Throws HistoryUnderflowError past the buffer.
    std::span<const double> lagged(std::size_t lag) const;

    const std::vector<double>& initial_mean() const { return initial_mean_; }

    // Appends the next snapshot and advances the clock.
    void advance(std::vector<double> next, double dt);
    // Scratch buffer of the right size, reused to avoid reallocations.
    std::vector<double> take_scratch();

private:
    Topology topology_;
    std::size_t dim_;
    std::vector<std::vector<double>> ring_;
    std::size_t head_ = 0;
    std::vector<double> initial_mean_;
    std::vector<double> scratch_;
    double time_ = 0.0;
    std::size_t steps_ = 0;
};

enum class Backend { serial, omp };

// Number of history steps a delay `eps` occupies at step `dt` (rounded up).
std::size_t delay_steps(double eps, double dt);

// Explicit Euler on h' = -L h(t - eps). Requires dt > 0 and dt <= eps/10 when eps > 0.
void step_continuous(ConsensusState& state, double dt, double eps, Backend backend = Backend::omp);

// h_i(k+1) = h_i(k) + rho * sum_j eta_ij (h_j(k-d) - h_i(k-d)), rho in (0, 1).
// `delivered` is aligned with topology().adjacency(); 0 drops that neighbor's
// term for this round. Empty means every link delivers.
void step_discrete(ConsensusState& state, double rho, std::size_t delay_rounds,
                   std::span<const std::uint8_t> delivered = {}, Backend backend = Backend::omp);

// 1 / (d_max + 1): I - rho L is then row-stochastic with positive diagonal.
double default_rho(const Topology& topology);

double disagreement(const ConsensusState& state, Backend backend = Backend::omp);

struct ConvergenceReport {
    bool converged = false;
    std::size_t steps = 0;
    double final_disagreement = 0.0;
    std::vector<double> consensus_value;  // mean of the initial params
};

using Stepper = std::function<void(ConsensusState&)>;

// Steps until disagreement <= tol or `max_steps` steps were taken.
ConvergenceReport run_until(ConsensusState& state, const Stepper& stepper, double tol,
                            std::size_t max_steps);

// Trajectory CSV: step,time,node,disagreement[,v0,v1,...]
void write_trajectory_header(std::ostream& out, std::size_t dim, bool with_values);
void write_trajectory_rows(std::ostream& out, const ConsensusState& state, bool with_values);

} // namespace dtshare

#include "dtshare/consensus.hpp"

#include "dtshare/error.hpp"
#include "dtshare/kernels.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dtshare {

namespace {

kernels::Csr csr_of(const Topology& t) { return {t.offsets(), t.adjacency()}; }

} // namespace

ConsensusState::ConsensusState(Topology topology, std::size_t dim, std::vector<double> initial,
                               std::size_t history_depth)
    : topology_(std::move(topology)), dim_(dim) {
    if (dim_ == 0) throw DimensionMismatchError("consensus dimension must be positive");
    if (initial.size() != nodes() * dim_)
        throw DimensionMismatchError("initial values: expected " + std::to_string(nodes() * dim_) +
                                     " entries, got " + std::to_string(initial.size()));
    initial_mean_.assign(dim_, 0.0);
    for (std::size_t i = 0; i < nodes(); ++i)
        for (std::size_t d = 0; d < dim_; ++d) initial_mean_[d] += initial[i * dim_ + d];
    for (auto& m : initial_mean_) m /= static_cast<double>(nodes());

    ring_.assign(history_depth + 1, initial);
}

std::span<const double> ConsensusState::lagged(std::size_t lag) const {
    if (lag >= ring_.size())
        throw HistoryUnderflowError("lag " + std::to_string(lag) + " exceeds history depth " +
                                    std::to_string(ring_.size() - 1));
    const std::size_t slot = (head_ + ring_.size() - lag) % ring_.size();
    return ring_[slot];
}

void ConsensusState::advance(std::vector<double> next, double dt) {
    head_ = (head_ + 1) % ring_.size();
    scratch_ = std::move(ring_[head_]);
    ring_[head_] = std::move(next);
    time_ += dt;
    ++steps_;
}

std::vector<double> ConsensusState::take_scratch() {
    std::vector<double> out = std::move(scratch_);
    out.resize(nodes() * dim_);
    return out;
}

std::size_t delay_steps(double eps, double dt) {
    if (eps <= 0.0) return 0;
    // Slack absorbs representation error of eps/dt for exact ratios.
    return static_cast<std::size_t>(std::ceil(eps / dt - 1e-9));
}

void step_continuous(ConsensusState& state, double dt, double eps, Backend backend) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_continuous: dt must be positive");
    if (eps < 0.0) throw std::invalid_argument("step_continuous: eps must be non-negative");
    if (eps > 0.0 && dt > eps / 10.0 * (1.0 + 1e-12))
        throw std::invalid_argument("step_continuous: dt must not exceed eps/10");
    const std::size_t lag = delay_steps(eps, dt);
    auto lagged = state.lagged(lag);
    auto out = state.take_scratch();
    const auto g = csr_of(state.topology());
    if (backend == Backend::serial)
        kernels::serial::laplacian_step(g, state.dim(), state.values(), lagged, dt, out);
    else
        kernels::omp::laplacian_step(g, state.dim(), state.values(), lagged, dt, out);
    state.advance(std::move(out), dt);
}

void step_discrete(ConsensusState& state, double rho, std::size_t delay_rounds,
                   std::span<const std::uint8_t> delivered, Backend backend) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("step_discrete: rho must be in (0,1)");
    if (!delivered.empty() && delivered.size() != state.topology().adjacency().size())
        throw DimensionMismatchError("step_discrete: link mask size mismatch");
    auto lagged = state.lagged(delay_rounds);
    auto out = state.take_scratch();
    const auto g = csr_of(state.topology());
    if (backend == Backend::serial)
        kernels::serial::neighbor_mix(g, state.dim(), state.values(), lagged, rho, delivered, out);
    else
        kernels::omp::neighbor_mix(g, state.dim(), state.values(), lagged, rho, delivered, out);
    state.advance(std::move(out), 1.0);
}

double default_rho(const Topology& topology) { return 1.0 / (max_degree(topology) + 1.0); }

double disagreement(const ConsensusState& state, Backend backend) {
    if (backend == Backend::serial)
        return kernels::serial::disagreement(state.nodes(), state.dim(), state.values());
    return kernels::omp::disagreement(state.nodes(), state.dim(), state.values());
}

ConvergenceReport run_until(ConsensusState& state, const Stepper& stepper, double tol,
                            std::size_t max_steps) {
    ConvergenceReport report;
    report.consensus_value = state.initial_mean();
    double current = disagreement(state);
    std::size_t taken = 0;
    while (current > tol && taken < max_steps) {
        stepper(state);
        ++taken;
        current = disagreement(state);
        if (!std::isfinite(current)) break;
    }
    report.steps = taken;
    report.final_disagreement = current;
    report.converged = current <= tol;
    return report;
}

void write_trajectory_header(std::ostream& out, std::size_t dim, bool with_values) {
    out << "step,time,node,disagreement";
    if (with_values)
        for (std::size_t d = 0; d < dim; ++d) out << ",v" << d;
    out << '\n';
}

void write_trajectory_rows(std::ostream& out, const ConsensusState& state, bool with_values) {
    const double dis = disagreement(state, Backend::serial);
    for (std::size_t i = 0; i < state.nodes(); ++i) {
        out << state.steps() << ',' << state.time() << ',' << i << ',' << dis;
        if (with_values)
            for (double v : state.node(i)) out << ',' << v;
        out << '\n';
    }
}

} // namespace dtshare

#include "dtshare/consensus.hpp"
#include "dtshare/error.hpp"
#include "dtshare/kernels.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace dtshare;

namespace {

double node_sum(const ConsensusState& s, std::size_t d) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.nodes(); ++i) total += s.node(i)[d];
    return total;
}

kernels::Csr csr(const Topology& t) { return {t.offsets(), t.adjacency()}; }

} // namespace

TEST_CASE("delay steps round up") {
    CHECK(delay_steps(0.0, 0.01) == 0);
    CHECK(delay_steps(0.1, 0.01) == 10);
    CHECK(delay_steps(0.105, 0.01) == 11);
    CHECK(delay_steps(std::numbers::pi / 4, std::numbers::pi / 800) == 200);
}

TEST_CASE("history is primed with the initial condition") {
    ConsensusState s(presets::path(3), 1, {1, 2, 3}, 4);
    CHECK(s.lagged(4)[2] == 3.0);
    CHECK_THROWS_AS(s.lagged(5), HistoryUnderflowError);
    step_discrete(s, 0.5, 0);
    CHECK(s.lagged(1)[0] == 1.0);
    CHECK(s.values()[0] == 1.5);
    CHECK(s.steps() == 1);
}

TEST_CASE("stepper preconditions") {
    ConsensusState s(presets::cycle(4), 2, std::vector<double>(8, 1.0), 10);
    CHECK_THROWS(step_continuous(s, 0.0, 0.1));
    CHECK_THROWS(step_continuous(s, 0.02, 0.1));
    CHECK_NOTHROW(step_continuous(s, 0.01, 0.1));
    CHECK_THROWS(step_discrete(s, 0.0, 0));
    CHECK_THROWS(step_discrete(s, 1.0, 0));
    CHECK_THROWS_AS(step_discrete(s, 0.2, 11), HistoryUnderflowError);
    const std::vector<std::uint8_t> short_mask(3, 1);
    CHECK_THROWS_AS(step_discrete(s, 0.2, 0, short_mask), DimensionMismatchError);
    CHECK_THROWS_AS(ConsensusState(presets::cycle(4), 2, std::vector<double>(7)), DimensionMismatchError);
}

TEST_CASE("laplacian step matches a dense product") {
    gen::Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = gen::integer(rng, 2, 12);
        const std::size_t dim = static_cast<std::size_t>(gen::integer(rng, 1, 4));
        const auto t = Topology::from_edges(n, gen::connected_graph(rng, n, 0.3));
        const auto l = oracle::dense_laplacian(n, t.edges());
        const auto cur = gen::vector(rng, n * dim);
        const auto lag = gen::vector(rng, n * dim);
        std::vector<double> out(n * dim);
        const double dt = 0.01;
        kernels::serial::laplacian_step(csr(t), dim, cur, lag, dt, out);
        for (int i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d) {
                double lh = 0.0;
                for (int j = 0; j < n; ++j) lh += l(i, j) * lag[j * dim + d];
                CHECK(out[i * dim + d] == doctest::Approx(cur[i * dim + d] - dt * lh).epsilon(1e-12));
            }
    }
}

TEST_CASE("property: omp kernels are bit-identical to serial") {
    gen::Rng rng(22);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = gen::integer(rng, 2, 20);
        const std::size_t dim = static_cast<std::size_t>(gen::integer(rng, 1, 50));
        const auto t = Topology::from_edges(n, gen::connected_graph(rng, n, 0.25));
        const auto cur = gen::vector(rng, n * dim);
        const auto lag = gen::vector(rng, n * dim);
        std::vector<std::uint8_t> mask(t.adjacency().size());
        for (auto& m : mask) m = gen::uniform(rng, 0, 1) < 0.7;
        std::vector<double> a(n * dim), b(n * dim);

        kernels::serial::laplacian_step(csr(t), dim, cur, lag, 0.003, a);
        kernels::omp::laplacian_step(csr(t), dim, cur, lag, 0.003, b);
        CHECK(a == b);
        kernels::serial::neighbor_mix(csr(t), dim, cur, lag, 0.2, mask, a);
        kernels::omp::neighbor_mix(csr(t), dim, cur, lag, 0.2, mask, b);
        CHECK(a == b);
        kernels::serial::neighbor_mix(csr(t), dim, cur, lag, 0.2, {}, a);
        kernels::omp::neighbor_mix(csr(t), dim, cur, lag, 0.2, {}, b);
        CHECK(a == b);
        CHECK(kernels::serial::disagreement(n, dim, cur) == kernels::omp::disagreement(n, dim, cur));
    }
}

TEST_CASE("property: steppers agree across backends over many steps") {
    gen::Rng rng(23);
    const int n = 9;
    const auto t = Topology::from_edges(n, gen::connected_graph(rng, n, 0.3));
    const auto init = gen::vector(rng, n * 3);
    ConsensusState a(t, 3, init, 10), b(t, 3, init, 10);
    for (int k = 0; k < 200; ++k) {
        step_continuous(a, 0.001, 0.01, Backend::serial);
        step_continuous(b, 0.001, 0.01, Backend::omp);
    }
    CHECK(std::vector<double>(a.values().begin(), a.values().end()) ==
          std::vector<double>(b.values().begin(), b.values().end()));
}

TEST_CASE("property: both steppers preserve the node sum") {
    gen::Rng rng(24);
    auto mass = [](const ConsensusState& s) {
        double m = 0.0;
        for (double v : s.values()) m += std::abs(v);
        return m;
    };
    for (int trial = 0; trial < 30; ++trial) {
        const int n = gen::integer(rng, 2, 20);
        const auto t = Topology::from_edges(n, gen::connected_graph(rng, n, 0.2));
        const auto init = gen::vector(rng, n * 2, -5, 5);
        ConsensusState c(t, 2, init, 64), d(t, 2, init, 4);
        const double eps = 0.5 * delay_budget(t).eps_sufficient;
        const double dt = eps / 20;
        const double rho = default_rho(t);
        for (int k = 0; k < 300; ++k) {
            const double c0 = node_sum(c, 0), d1 = node_sum(d, 1);
            const auto lag = static_cast<std::size_t>(k % 3);
            // Rounding scales with everything the update reads, lagged rows included.
            double dm = mass(d);
            for (double v : d.lagged(lag)) dm += std::abs(v);
            const double cm = mass(c);
            step_continuous(c, dt, eps);
            step_discrete(d, rho, lag);
            CHECK(std::abs(node_sum(c, 0) - c0) <= 1e-12 * cm);
            CHECK(std::abs(node_sum(d, 1) - d1) <= 1e-12 * dm);
        }
    }
}

TEST_CASE("property: relabeling nodes commutes with a round") {
    gen::Rng rng(25);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = gen::integer(rng, 2, 12);
        const auto edges = gen::connected_graph(rng, n, 0.3);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Edge> moved;
        for (auto e : edges) moved.push_back({perm[e.u], perm[e.v]});
        const auto t = Topology::from_edges(n, edges);
        const auto tp = Topology::from_edges(n, moved);
        const auto init = gen::vector(rng, n);
        std::vector<double> init_p(n);
        for (int i = 0; i < n; ++i) init_p[perm[i]] = init[i];
        ConsensusState a(t, 1, init), b(tp, 1, init_p);
        for (int k = 0; k < 5; ++k) {
            step_discrete(a, 0.2, 0);
            step_discrete(b, 0.2, 0);
        }
        for (int i = 0; i < n; ++i) CHECK(b.values()[perm[i]] == doctest::Approx(a.values()[i]).epsilon(1e-12));
    }
}

TEST_CASE("identical nodes stay in agreement") {
    gen::Rng rng(26);
    const auto t = presets::six_node();
    const auto row = gen::vector(rng, 5);
    std::vector<double> init;
    for (int i = 0; i < 6; ++i) init.insert(init.end(), row.begin(), row.end());
    ConsensusState s(t, 5, init, 2);
    std::vector<std::uint8_t> mask(t.adjacency().size(), 0);
    mask[0] = 1;
    for (int k = 0; k < 10; ++k) {
        step_discrete(s, default_rho(t), k % 3, k % 2 ? std::span<const std::uint8_t>(mask)
                                                       : std::span<const std::uint8_t>());
        CHECK(disagreement(s) == 0.0);
    }
}

TEST_CASE("dropping every link freezes a round") {
    const auto t = presets::cycle(5);
    ConsensusState s(t, 1, {1, 2, 3, 4, 5});
    const std::vector<std::uint8_t> none(t.adjacency().size(), 0);
    step_discrete(s, 0.3, 0, none);
    CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{1, 2, 3, 4, 5});
}

TEST_CASE("four-cycle rounds contract at the predicted rate") {
    // I - rho L has eigenvalues 1 - rho * {0, 2, 2, 4}; with rho = 1/3 the
    // slowest non-consensus mode decays by 1/3 per round.
    const auto t = presets::cycle(4);
    ConsensusState s(t, 1, {1, 0, 0, 0});
    double prev = disagreement(s);
    for (int k = 0; k < 20; ++k) {
        step_discrete(s, 1.0 / 3.0, 0);
        const double now = disagreement(s);
        CHECK(now <= prev * (1.0 / 3.0) + 1e-15);
        prev = now;
    }
}

TEST_CASE("run_until converges to the initial mean") {
    const auto t = presets::six_node();
    std::vector<double> init{0, 1, 2, 3, 4, 5};
    ConsensusState s(t, 1, init);
    const auto r = run_until(s, [&](ConsensusState& st) { step_discrete(st, default_rho(t), 0); }, 1e-10, 10000);
    CHECK(r.converged);
    CHECK(r.consensus_value[0] == doctest::Approx(2.5));
    for (double v : s.values()) CHECK(v == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("continuous stepper: stable below the exact budget, unstable above") {
    const auto t = presets::complete(2);
    for (double f : {0.9, 1.3}) {
        const double eps = f * std::numbers::pi / 4;
        const double dt = eps / 200;
        ConsensusState s(t, 1, {1.0, -1.0}, delay_steps(eps, dt));
        const auto r = run_until(s, [&](ConsensusState& st) { step_continuous(st, dt, eps); }, 1e-6, 100000);
        CHECK(r.converged == (f < 1.0));
    }
}

TEST_CASE("trajectory csv") {
    ConsensusState s(presets::path(2), 2, {0, 1, 2, 3});
    std::ostringstream out;
    write_trajectory_header(out, 2, true);
    write_trajectory_rows(out, s, true);
    CHECK(out.str() == "step,time,node,disagreement,v0,v1\n0,0,0,1,0,1\n0,0,1,1,2,3\n");
}

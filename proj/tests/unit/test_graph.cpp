#include "dtshare/error.hpp"
#include "dtshare/graph.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace dtshare;

namespace {

// Components by depth-first search, independent of the library's union-find.
int components(int n, const std::vector<Edge>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<char> seen(n, 0);
    int count = 0;
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++count;
        std::vector<int> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (!seen[v]) seen[v] = 1, stack.push_back(v);
        }
    }
    return count;
}

std::vector<Edge> random_edges(gen::Rng& rng, int n, double p) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (gen::uniform(rng, 0, 1) < p) edges.push_back({u, v});
    return edges;
}

} // namespace

TEST_CASE("complete graph spectrum") {
    for (int n = 2; n <= 8; ++n) {
        const auto s = spectrum(presets::complete(n));
        CHECK(s.lambda_max == doctest::Approx(n).epsilon(1e-12));
        CHECK(s.eigenvalues.front() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.residual <= 1e-9);
        CHECK(s.d_max == n - 1);
    }
}

TEST_CASE("four-cycle spectrum is 0 2 2 4") {
    const auto s = spectrum(presets::cycle(4));
    const double want[] = {0, 2, 2, 4};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s.eigenvalues[i] - want[i]) <= 1e-9);
}

TEST_CASE("six-node preset") {
    const auto t = presets::six_node();
    CHECK(t.node_count() == 6);
    CHECK(max_degree(t) == 3);
    CHECK(t.degree(3) == 2);
    CHECK(t.degree(5) == 3);
    const auto b = delay_budget(t);
    CHECK(b.eps_sufficient == doctest::Approx(std::numbers::pi / 12));
    CHECK(b.eps_sufficient <= b.eps_exact);
    CHECK(max_degree(presets::six_node_dmax4()) == 4);
}

TEST_CASE("two-node budget is pi/4") {
    const auto b = delay_budget(presets::complete(2));
    CHECK(b.eps_exact == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
}

TEST_CASE("topology validation") {
    CHECK_THROWS_AS(Topology::from_edges(3, {{0, 0}, {0, 1}, {1, 2}}), InputError);
    CHECK_THROWS_AS(Topology::from_edges(3, {{0, 1}, {1, 0}, {1, 2}}), InputError);
    CHECK_THROWS_AS(Topology::from_edges(3, {{0, 1}, {1, 3}}), InputError);
    CHECK_THROWS_AS(Topology::from_edges(0, {}), InputError);
    try {
        (void)Topology::from_edges(4, {{0, 1}, {2, 3}});
        FAIL("expected NotConnectedError");
    } catch (const NotConnectedError& e) {
        CHECK(std::string(e.what()) == "graph not connected");
    }
    const auto single = Topology::from_edges(1, {});
    CHECK(spectrum(single).lambda_max == 0.0);
}

TEST_CASE("csr adjacency is sorted and symmetric") {
    gen::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = gen::integer(rng, 2, 15);
        const auto t = Topology::from_edges(n, gen::connected_graph(rng, n, 0.3));
        for (int u = 0; u < n; ++u) {
            const auto nb = t.neighbors(u);
            CHECK(std::is_sorted(nb.begin(), nb.end()));
            for (int v : nb) {
                const auto back = t.neighbors(v);
                CHECK(std::find(back.begin(), back.end(), u) != back.end());
            }
        }
    }
}

TEST_CASE("property: Gershgorin bound and power iteration") {
    gen::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = gen::integer(rng, 2, 14);
        const auto t = Topology::from_edges(n, gen::connected_graph(rng, n, gen::uniform(rng, 0, 0.6)));
        const auto s = spectrum(t);
        CHECK(s.lambda_max <= 2.0 * s.d_max + 1e-9);
        CHECK(s.lambda_max >= s.d_max + 1.0 - 1e-9);  // lambda_max >= d_max + 1 for any nonempty graph
        const double power = oracle::power_lambda_max(oracle::dense_laplacian(n, t.edges()));
        CHECK(s.lambda_max == doctest::Approx(power).epsilon(1e-6));
        CHECK(s.residual <= 1e-9);
    }
}

TEST_CASE("property: inertia count agrees with every eigenvalue") {
    gen::Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = gen::integer(rng, 1, 8);
        const auto edges = random_edges(rng, n, gen::uniform(rng, 0.1, 0.9));
        const auto l = laplacian(n, edges);
        const auto e = jacobi_eigen(l);
        for (int j = 0; j < n; ++j) {
            // Between two distinct eigenvalues the count is exact.
            CHECK(oracle::eigenvalues_below(l, e.values[j] - 1e-6) <= j);
            CHECK(oracle::eigenvalues_below(l, e.values[j] + 1e-6) >= j + 1);
        }
    }
}

TEST_CASE("property: zero eigenvalue multiplicity counts components") {
    gen::Rng rng(13);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = gen::integer(rng, 1, 10);
        const auto edges = random_edges(rng, n, gen::uniform(rng, 0.0, 0.5));
        const auto e = jacobi_eigen(laplacian(n, edges));
        const int zeros = static_cast<int>(
            std::count_if(e.values.begin(), e.values.end(), [](double v) { return std::abs(v) < 1e-8; }));
        CHECK(zeros == components(n, edges));
        CHECK(is_connected(n, edges) == (components(n, edges) == 1));
        if (n >= 2) CHECK((e.values[1] > 1e-8) == (components(n, edges) == 1));
    }
}

TEST_CASE("property: adding an edge never widens the delay budget") {
    gen::Rng rng(14);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::integer(rng, 3, 10);
        auto edges = gen::connected_graph(rng, n, 0.2);
        const auto before = delay_budget(Topology::from_edges(n, edges));
        std::vector<Edge> missing;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (std::find(edges.begin(), edges.end(), Edge{u, v}) == edges.end()) missing.push_back({u, v});
        if (missing.empty()) continue;
        edges.push_back(missing[gen::integer(rng, 0, static_cast<int>(missing.size()) - 1)]);
        const auto after = delay_budget(Topology::from_edges(n, edges));
        CHECK(after.eps_exact <= before.eps_exact + 1e-12);
        CHECK(after.eps_sufficient <= before.eps_sufficient + 1e-12);
        CHECK(after.eps_sufficient <= after.eps_exact + 1e-12);
    }
}

TEST_CASE("jacobi on a diagonal matrix needs no sweeps") {
    DenseMatrix d(3);
    d(0, 0) = 3;
    d(1, 1) = -1;
    d(2, 2) = 2;
    const auto e = jacobi_eigen(d);
    CHECK(e.sweeps == 0);
    CHECK(e.values == std::vector<double>{-1, 2, 3});
}

TEST_CASE("jacobi reports non-convergence") {
    CHECK_THROWS_AS(jacobi_eigen(laplacian(presets::cycle(5)), 1e-9, 0), NonConvergenceError);
}

TEST_CASE("generated topologies respect the degree cap") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        for (int d = 2; d <= 5; ++d) {
            const int n = 4 + static_cast<int>(seed % 9);
            const auto t = generate_topology(n, d, seed);
            CHECK(t.node_count() == n);
            CHECK(max_degree(t) <= d);
            CHECK(is_connected(n, t.edges()));
            CHECK(t.edges() == generate_topology(n, d, seed).edges());
        }
    }
    CHECK_THROWS_AS(generate_topology(5, 1, 1), InfeasibleError);
    CHECK(generate_topology(2, 1, 3).edges().size() == 1);
}

TEST_CASE("preset names") {
    CHECK(preset("complete:5").edges().size() == 10);
    CHECK(preset("cycle:6").edges().size() == 6);
    CHECK(preset("path:4").edges().size() == 3);
    CHECK(preset("six_node").edges() == presets::six_node().edges());
    CHECK_THROWS_AS(preset("mesh"), InputError);
    CHECK_THROWS_AS(preset("cycle:x"), InputError);
}

TEST_CASE("edge list round trip and errors") {
    const auto t = presets::six_node_dmax4();
    std::stringstream ss;
    write_edge_list(ss, t);
    const auto back = read_edge_list(ss);
    CHECK(back.edges() == t.edges());
    CHECK(back.node_count() == t.node_count());

    std::istringstream bad("# nodes=3\n0 1\n1 two\n");
    try {
        (void)read_edge_list(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream disconnected("# nodes=4\n0 1\n2 3\n");
    CHECK_THROWS_AS(read_edge_list(disconnected), NotConnectedError);
}

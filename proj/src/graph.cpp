#include "dtshare/graph.hpp"

#include "dtshare/error.hpp"
#include "dtshare/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace dtshare {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

private:
    std::vector<int> parent_;
};

} // namespace

std::vector<Edge> normalize_edges(int n, std::vector<Edge> edges) {
    if (n < 1) throw InputError("node count must be positive");
    for (auto& e : edges) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw InputError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") out of range for n=" + std::to_string(n));
        if (e.u == e.v) throw InputError("self-loop at node " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end())
        throw InputError("duplicate edge (" + std::to_string(dup->u) + "," +
                         std::to_string(dup->v) + ")");
    return edges;
}

bool is_connected(int n, std::span<const Edge> edges) {
    if (n <= 1) return true;
    DisjointSets sets(n);
    int components = n;
    for (const auto& e : edges)
        if (sets.unite(e.u, e.v)) --components;
    return components == 1;
}

Topology Topology::from_edges(int n, std::vector<Edge> edges, std::string name) {
    Topology t;
    t.n_ = n;
    t.edges_ = normalize_edges(n, std::move(edges));
    if (!is_connected(n, t.edges_)) throw NotConnectedError();
    t.name_ = std::move(name);

    std::vector<int> degree(n, 0);
    for (const auto& e : t.edges_) {
        ++degree[e.u];
        ++degree[e.v];
    }
    t.offsets_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) t.offsets_[i + 1] = t.offsets_[i] + degree[i];
    t.adjacency_.resize(t.offsets_[n]);
    std::vector<int> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
    for (const auto& e : t.edges_) {
        t.adjacency_[cursor[e.u]++] = e.v;
        t.adjacency_[cursor[e.v]++] = e.u;
    }
    for (int i = 0; i < n; ++i)
        std::sort(t.adjacency_.begin() + t.offsets_[i], t.adjacency_.begin() + t.offsets_[i + 1]);
    return t;
}

std::span<const int> Topology::neighbors(int node) const {
    return std::span<const int>(adjacency_).subspan(offsets_[node],
                                                    offsets_[node + 1] - offsets_[node]);
}

DenseMatrix laplacian(int n, std::span<const Edge> edges) {
    DenseMatrix l(n);
    for (const auto& e : edges) {
        l(e.u, e.v) -= 1.0;
        l(e.v, e.u) -= 1.0;
        l(e.u, e.u) += 1.0;
        l(e.v, e.v) += 1.0;
    }
    return l;
}

DenseMatrix laplacian(const Topology& topology) {
    return laplacian(topology.node_count(), topology.edges());
}

EigenDecomposition jacobi_eigen(const DenseMatrix& symmetric, double tolerance, int max_sweeps) {
    const int n = symmetric.size();
    DenseMatrix a = symmetric;
    DenseMatrix v(n);
    for (int i = 0; i < n; ++i) v(i, i) = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    EigenDecomposition out;
    double off = off_norm();
    int sweep = 0;
    while (off > tolerance && sweep < max_sweeps) {
        ++sweep;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that zeroes a(p,q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        off = off_norm();
    }
    if (off > tolerance)
        throw NonConvergenceError("Jacobi eigensolver: off-diagonal norm " + std::to_string(off) +
                                  " after " + std::to_string(sweep) + " sweeps");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

    out.values.resize(n);
    out.vectors = DenseMatrix(n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    out.off_diagonal = off;
    out.sweeps = sweep;

    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = -out.values[j] * out.vectors(i, j);
            for (int k = 0; k < n; ++k) r += symmetric(i, k) * out.vectors(k, j);
            norm2 += r * r;
        }
        worst = std::max(worst, std::sqrt(norm2));
    }
    out.residual = worst;
    if (worst > tolerance)
        throw NonConvergenceError("Jacobi eigensolver: residual " + std::to_string(worst));
    return out;
}

int max_degree(const Topology& topology) {
    int d = 0;
    for (int i = 0; i < topology.node_count(); ++i) d = std::max(d, topology.degree(i));
    return d;
}

Spectrum spectrum(const Topology& topology) {
    auto eig = jacobi_eigen(laplacian(topology));
    Spectrum s;
    s.eigenvalues = std::move(eig.values);
    s.lambda_max = s.eigenvalues.back();
    s.d_max = max_degree(topology);
    s.residual = eig.residual;
    return s;
}

DelayBudget delay_budget(const Spectrum& spectrum) {
    DelayBudget b;
    b.eps_exact = std::numbers::pi / (2.0 * spectrum.lambda_max);
    b.eps_sufficient = std::numbers::pi / (4.0 * spectrum.d_max);
    return b;
}

DelayBudget delay_budget(const Topology& topology) { return delay_budget(spectrum(topology)); }

Topology generate_topology(int n, int d_max, std::uint64_t seed) {
    if (n < 2) throw InputError("generate_topology: n must be at least 2");
    if (static_cast<long long>(d_max) * n < 2LL * (n - 1))
        throw InfeasibleError("no connected graph on " + std::to_string(n) +
                              " nodes with max degree " + std::to_string(d_max));

    Engine rng(seed);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);

    std::vector<int> degree(n, 0);
    std::vector<Edge> edges;
    std::vector<std::vector<char>> linked(n, std::vector<char>(n, 0));
    auto link = [&](int a, int b) {
        edges.push_back({std::min(a, b), std::max(a, b)});
        linked[a][b] = linked[b][a] = 1;
        ++degree[a];
        ++degree[b];
    };

    // Attach each node to an already-placed node with spare degree. A tree
    // with >= 2 nodes always has a leaf, so d_max >= 2 never runs dry.
    for (int i = 1; i < n; ++i) {
        std::vector<int> open;
        for (int j = 0; j < i; ++j)
            if (degree[order[j]] < d_max) open.push_back(order[j]);
        if (open.empty())
            throw InfeasibleError("spanning tree exhausted degree budget");
        link(order[i], open[uniform_index(rng, open.size())]);
    }

    std::vector<Edge> candidates;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (!linked[a][b]) candidates.push_back({a, b});
    shuffle(candidates, rng);
    for (const auto& c : candidates)
        if (degree[c.u] < d_max && degree[c.v] < d_max) link(c.u, c.v);

    return Topology::from_edges(n, std::move(edges),
                                "random:n=" + std::to_string(n) + ",dmax=" +
                                    std::to_string(d_max) + ",seed=" + std::to_string(seed));
}

namespace presets {

Topology complete(int n) {
    std::vector<Edge> e;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) e.push_back({a, b});
    return Topology::from_edges(n, std::move(e), "complete:" + std::to_string(n));
}

Topology cycle(int n) {
    if (n < 3) throw InputError("cycle needs at least 3 nodes");
    std::vector<Edge> e;
    for (int a = 0; a < n; ++a) e.push_back({a, (a + 1) % n});
    return Topology::from_edges(n, std::move(e), "cycle:" + std::to_string(n));
}

Topology path(int n) {
    std::vector<Edge> e;
    for (int a = 0; a + 1 < n; ++a) e.push_back({a, a + 1});
    return Topology::from_edges(n, std::move(e), "path:" + std::to_string(n));
}

Topology six_node() {
    // Ring 0..5 plus chords (1,4) and (2,5). Degrees: 2 3 3 2 3 3.
    return Topology::from_edges(
        6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {1, 4}, {2, 5}}, "six_node");
}

Topology six_node_dmax4() {
    return Topology::from_edges(
        6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {1, 4}, {2, 5}, {1, 5}},
        "six_node_dmax4");
}

} // namespace presets

Topology preset(std::string_view name) {
    if (name == "six_node") return presets::six_node();
    if (name == "six_node_dmax4") return presets::six_node_dmax4();
    auto colon = name.find(':');
    if (colon != std::string_view::npos) {
        const auto kind = name.substr(0, colon);
        int n = 0;
        try {
            n = std::stoi(std::string(name.substr(colon + 1)));
        } catch (const std::exception&) {
            throw InputError("bad preset size in '" + std::string(name) + "'");
        }
        if (kind == "complete") return presets::complete(n);
        if (kind == "cycle") return presets::cycle(n);
        if (kind == "path") return presets::path(n);
    }
    throw InputError("unknown topology preset '" + std::string(name) + "'");
}

void write_edge_list(std::ostream& out, const Topology& topology) {
    out << "# name=" << (topology.name().empty() ? "unnamed" : topology.name()) << '\n';
    out << "# nodes=" << topology.node_count() << '\n';
    for (const auto& e : topology.edges()) out << e.u << ' ' << e.v << '\n';
}

Topology read_edge_list(std::istream& in) {
    std::string line;
    std::string name;
    int declared_nodes = -1;
    int max_node = -1;
    std::vector<Edge> edges;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            auto body = line.substr(first + 1);
            body.erase(0, body.find_first_not_of(' '));
            if (body.rfind("name=", 0) == 0) {
                name = body.substr(5);
                while (!name.empty() && (name.back() == '\r' || name.back() == ' '))
                    name.pop_back();
            } else if (body.rfind("nodes=", 0) == 0) {
                try {
                    declared_nodes = std::stoi(body.substr(6));
                } catch (const std::exception&) {
                    throw ParseError(lineno, "bad nodes header");
                }
            }
            continue;
        }
        std::istringstream fields(line);
        long long u = 0;
        long long v = 0;
        std::string extra;
        if (!(fields >> u >> v) || (fields >> extra))
            throw ParseError(lineno, "expected 'u v', got '" + line + "'");
        if (u < 0 || v < 0 || u > 1'000'000 || v > 1'000'000)
            throw ParseError(lineno, "node index out of range");
        edges.push_back({static_cast<int>(u), static_cast<int>(v)});
        max_node = std::max<int>(max_node, static_cast<int>(std::max(u, v)));
    }
    const int n = declared_nodes > 0 ? declared_nodes : max_node + 1;
    if (n < 1) throw InputError("edge list is empty");
    return Topology::from_edges(n, std::move(edges), std::move(name));
}

Topology load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open topology file '" + path + "'");
    return read_edge_list(in);
}

} // namespace dtshare

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtshare {

// Unordered node pair, stored with u < v.
struct Edge {
    int u = 0;
    int v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Dense row-major square matrix. Only used for small graph algebra.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }

private:
    int n_ = 0;
    std::vector<double> data_;
};

// Undirected, simple, connected graph. Construction validates all invariants.
class Topology {
public:
    // Throws InputError on self-loops, duplicates or out-of-range nodes and
    // NotConnectedError when the graph is disconnected.
    static Topology from_edges(int n, std::vector<Edge> edges, std::string name = {});

    int node_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const int> neighbors(int node) const;
    int degree(int node) const { return static_cast<int>(neighbors(node).size()); }
    const std::string& name() const { return name_; }

    // CSR adjacency, ascending neighbor ids per node.
    const std::vector<int>& offsets() const { return offsets_; }
    const std::vector<int>& adjacency() const { return adjacency_; }

private:
    Topology() = default;

    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> offsets_;
    std::vector<int> adjacency_;
    std::string name_;
};

// Checks range, loops and duplicates only. Returns normalized sorted edges.
std::vector<Edge> normalize_edges(int n, std::vector<Edge> edges);
bool is_connected(int n, std::span<const Edge> edges);

DenseMatrix laplacian(int n, std::span<const Edge> edges);
DenseMatrix laplacian(const Topology& topology);

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    DenseMatrix vectors;         // column j pairs with values[j]
    double off_diagonal = 0.0;   // Frobenius norm left after the last sweep
    double residual = 0.0;       // max_j ||A v_j - lambda_j v_j||_2
    int sweeps = 0;
};

// Cyclic Jacobi rotations. Throws NonConvergenceError when the off-diagonal
// norm is still above `tolerance` after `max_sweeps`.
EigenDecomposition jacobi_eigen(const DenseMatrix& symmetric, double tolerance = 1e-9,
                                int max_sweeps = 100);

struct Spectrum {
    std::vector<double> eigenvalues;  // ascending
    double lambda_max = 0.0;
    int d_max = 0;
    double residual = 0.0;
};

Spectrum spectrum(const Topology& topology);
int max_degree(const Topology& topology);

// Delay budgets for delayed consensus: pi/(2 lambda_max) is exact,
// pi/(4 d_max) follows from the Gershgorin bound and never exceeds it.
struct DelayBudget {
    double eps_exact = 0.0;
    double eps_sufficient = 0.0;
};

DelayBudget delay_budget(const Topology& topology);
DelayBudget delay_budget(const Spectrum& spectrum);

// Random spanning tree then greedy edge additions on a shuffled candidate
// list, skipping pairs where an endpoint already has degree d_max.
// Throws InfeasibleError when d_max * n < 2 (n - 1).
Topology generate_topology(int n, int d_max, std::uint64_t seed);

namespace presets {
Topology complete(int n);
Topology cycle(int n);
Topology path(int n);
// Six-node sharing topology with d_max = 3; node 5 has degree 3 and node 3 degree 2.
Topology six_node();
// six_node plus edge (1,5); d_max = 4.
Topology six_node_dmax4();
} // namespace presets

// Resolves "six_node", "six_node_dmax4", "complete:<n>", "cycle:<n>", "path:<n>".
Topology preset(std::string_view name);

// Edge-list text: optional "# name=<label>" header, then one "u v" per line.
void write_edge_list(std::ostream& out, const Topology& topology);
Topology read_edge_list(std::istream& in);
Topology load_edge_list(const std::string& path);

} // namespace dtshare

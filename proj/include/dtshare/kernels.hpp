#pragma once

// Data-parallel inner loops of the consensus integrators.
//
// Node values are stored row-major: node i occupies [i*dim, (i+1)*dim).
// Adjacency is CSR (`offsets`, `adjacency`) as exposed by Topology.
// Every omp kernel performs the same floating-point operations in the same
// order per output element as its serial twin, so results are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>

namespace dtshare::kernels {

struct Csr {
    std::span<const int> offsets;    // n + 1 entries
    std::span<const int> adjacency;  // offsets[n] entries
    int nodes() const { return static_cast<int>(offsets.size()) - 1; }
};

namespace serial {

// out_i = current_i - dt * (deg_i * lagged_i - sum_{j in N_i} lagged_j)
void laplacian_step(Csr g, std::size_t dim, std::span<const double> current,
                    std::span<const double> lagged, double dt, std::span<double> out);

// out_i = current_i + rho * sum_{j in N_i} mask_ij (lagged_j - lagged_i).
// `mask` is aligned with `adjacency`; empty means every link delivers.
void neighbor_mix(Csr g, std::size_t dim, std::span<const double> current,
                  std::span<const double> lagged, double rho, std::span<const std::uint8_t> mask,
                  std::span<double> out);

// max_i ||x_i - mean||_inf
double disagreement(std::size_t nodes, std::size_t dim, std::span<const double> values);

} // namespace serial

namespace omp {

void laplacian_step(Csr g, std::size_t dim, std::span<const double> current,
                    std::span<const double> lagged, double dt, std::span<double> out);
void neighbor_mix(Csr g, std::size_t dim, std::span<const double> current,
                  std::span<const double> lagged, double rho, std::span<const std::uint8_t> mask,
                  std::span<double> out);
double disagreement(std::size_t nodes, std::size_t dim, std::span<const double> values);

} // namespace omp

} // namespace dtshare::kernels

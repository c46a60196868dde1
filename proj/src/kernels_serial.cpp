#include "dtshare/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dtshare::kernels::serial {

void laplacian_step(Csr g, std::size_t dim, std::span<const double> current,
                    std::span<const double> lagged, double dt, std::span<double> out) {
    const int n = g.nodes();
    for (int i = 0; i < n; ++i) {
        const int begin = g.offsets[i];
        const int end = g.offsets[i + 1];
        const double deg = static_cast<double>(end - begin);
        const std::size_t row = static_cast<std::size_t>(i) * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            double acc = deg * lagged[row + d];
            for (int e = begin; e < end; ++e)
                acc -= lagged[static_cast<std::size_t>(g.adjacency[e]) * dim + d];
            out[row + d] = current[row + d] - dt * acc;
        }
    }
}

void neighbor_mix(Csr g, std::size_t dim, std::span<const double> current,
                  std::span<const double> lagged, double rho, std::span<const std::uint8_t> mask,
                  std::span<double> out) {
    const int n = g.nodes();
    for (int i = 0; i < n; ++i) {
        const int begin = g.offsets[i];
        const int end = g.offsets[i + 1];
        const std::size_t row = static_cast<std::size_t>(i) * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            double acc = 0.0;
            for (int e = begin; e < end; ++e) {
                if (!mask.empty() && !mask[e]) continue;
                acc += lagged[static_cast<std::size_t>(g.adjacency[e]) * dim + d] - lagged[row + d];
            }
            out[row + d] = current[row + d] + rho * acc;
        }
    }
}

double disagreement(std::size_t nodes, std::size_t dim, std::span<const double> values) {
    double worst = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        // Mean as an offset from node 0: exactly zero spread when all rows agree.
        const double base = values[d];
        double offset = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) offset += values[i * dim + d] - base;
        offset /= static_cast<double>(nodes);
        for (std::size_t i = 0; i < nodes; ++i)
            worst = std::max(worst, std::abs((values[i * dim + d] - base) - offset));
    }
    return worst;
}

} // namespace dtshare::kernels::serial

#include "dtshare/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dtshare::kernels::omp {

void laplacian_step(Csr g, std::size_t dim, std::span<const double> current,
                    std::span<const double> lagged, double dt, std::span<double> out) {
    const int n = g.nodes();
    const long long total = static_cast<long long>(n) * static_cast<long long>(dim);
#pragma omp parallel for schedule(static)
    for (long long flat = 0; flat < total; ++flat) {
        const int i = static_cast<int>(flat / static_cast<long long>(dim));
        const std::size_t d = static_cast<std::size_t>(flat % static_cast<long long>(dim));
        const int begin = g.offsets[i];
        const int end = g.offsets[i + 1];
        const std::size_t row = static_cast<std::size_t>(i) * dim;
        double acc = static_cast<double>(end - begin) * lagged[row + d];
        for (int e = begin; e < end; ++e)
            acc -= lagged[static_cast<std::size_t>(g.adjacency[e]) * dim + d];
        out[row + d] = current[row + d] - dt * acc;
    }
}

void neighbor_mix(Csr g, std::size_t dim, std::span<const double> current,
                  std::span<const double> lagged, double rho, std::span<const std::uint8_t> mask,
                  std::span<double> out) {
    const int n = g.nodes();
    const long long total = static_cast<long long>(n) * static_cast<long long>(dim);
    const bool masked = !mask.empty();
#pragma omp parallel for schedule(static)
    for (long long flat = 0; flat < total; ++flat) {
        const int i = static_cast<int>(flat / static_cast<long long>(dim));
        const std::size_t d = static_cast<std::size_t>(flat % static_cast<long long>(dim));
        const int begin = g.offsets[i];
        const int end = g.offsets[i + 1];
        const std::size_t row = static_cast<std::size_t>(i) * dim;
        double acc = 0.0;
        for (int e = begin; e < end; ++e) {
            if (masked && !mask[e]) continue;
            acc += lagged[static_cast<std::size_t>(g.adjacency[e]) * dim + d] - lagged[row + d];
        }
        out[row + d] = current[row + d] + rho * acc;
    }
}

double disagreement(std::size_t nodes, std::size_t dim, std::span<const double> values) {
    double worst = 0.0;
    const long long dims = static_cast<long long>(dim);
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (long long dd = 0; dd < dims; ++dd) {
        const std::size_t d = static_cast<std::size_t>(dd);
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

} // namespace dtshare::kernels::omp

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace oracle {

int eigenvalues_below(const dtshare::DenseMatrix& a, double x) {
    const int n = a.size();
    std::vector<long double> m(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i * n + j] = a(i, j) - (i == j ? x : 0.0);
    // Symmetric Gaussian elimination without pivoting; the pivots are D.
    int negative = 0;
    for (int k = 0; k < n; ++k) {
        const long double d = m[k * n + k];
        if (d < 0) ++negative;
        for (int i = k + 1; i < n; ++i) {
            const long double f = m[i * n + k] / d;
            for (int j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
        }
    }
    return negative;
}

double power_lambda_max(const dtshare::DenseMatrix& a, int iterations) {
    const int n = a.size();
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * i - 0.11 * i * i;  // not orthogonal to anything simple
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] = 0.0;
            for (int j = 0; j < n; ++j) w[i] += a(i, j) * v[j];
            norm += w[i] * w[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        double vav = 0.0, vv = 0.0;
        for (int i = 0; i < n; ++i) {
            vav += v[i] * w[i];
            vv += v[i] * v[i];
        }
        lambda = vav / vv;
        for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
    }
    return lambda;
}

dtshare::DenseMatrix dense_laplacian(int n, std::span<const dtshare::Edge> edges) {
    dtshare::DenseMatrix l(n);
    for (const auto& e : edges) {
        l(e.u, e.v) -= 1.0;
        l(e.v, e.u) -= 1.0;
        l(e.u, e.u) += 1.0;
        l(e.v, e.v) += 1.0;
    }
    return l;
}

namespace {

std::vector<long double> softmax_ld(std::span<const long double> z) {
    const long double top = *std::max_element(z.begin(), z.end());
    std::vector<long double> p(z.size());
    long double sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - top);
    for (auto& v : p) v /= sum;
    return p;
}

long double kd_loss_ld(std::span<const long double> s, std::span<const double> t, int label, long double alpha,
                       long double tau) {
    const std::size_t k = s.size();
    std::vector<long double> st(k), tt(k);
    for (std::size_t i = 0; i < k; ++i) {
        st[i] = s[i] / tau;
        tt[i] = t[i] / tau;
    }
    const auto p = softmax_ld(s);
    const auto ps = softmax_ld(st);
    const auto pt = softmax_ld(tt);
    long double hard = -std::log(p[label]);
    long double soft = 0;
    for (std::size_t i = 0; i < k; ++i) soft -= pt[i] * std::log(ps[i]);
    return (1 - alpha) * hard + alpha * tau * tau * soft;
}

} // namespace

long double kd_loss(std::span<const double> s, std::span<const double> t, int label, double alpha, double tau) {
    std::vector<long double> sl(s.begin(), s.end());
    return kd_loss_ld(sl, t, label, alpha, tau);
}

std::vector<double> kd_grad_fd(std::span<const double> s, std::span<const double> t, int label, double alpha,
                               double tau, double h) {
    std::vector<long double> x(s.begin(), s.end());
    std::vector<double> g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const long double keep = x[i];
        x[i] = keep + h;
        const long double up = kd_loss_ld(x, t, label, alpha, tau);
        x[i] = keep - h;
        const long double down = kd_loss_ld(x, t, label, alpha, tau);
        x[i] = keep;
        g[i] = static_cast<double>((up - down) / (2.0L * h));
    }
    return g;
}

double fifo_max_delay(const FifoSetup& s) {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Per-flow token bucket; generate conforming departures from each source.
    struct Source {
        double time = 0.0;
        double tokens = 0.0;
    };
    std::vector<Source> src(s.flows);
    for (auto& x : src) x.tokens = s.bucket;

    struct Arrival {
        double time;
        int flow;
        bool operator>(const Arrival& o) const { return time > o.time || (time == o.time && flow > o.flow); }
    };
    std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> pending;
    const double refill = s.packet / s.rate;  // time to earn one packet of tokens

    // Emits the next packet of one flow: either immediately (greedy, if
    // tokens allow) or after a random idle gap.
    auto next = [&](int f) {
        auto& x = src[f];
        if (u01(rng) < 0.3) {
            const double gap = refill * 3.0 * u01(rng);
            x.tokens = std::min(s.bucket, x.tokens + gap * s.rate);
            x.time += gap;
        }
        if (x.tokens < s.packet) {
            const double wait = (s.packet - x.tokens) / s.rate;
            x.time += wait;
            x.tokens = s.packet;
        }
        x.tokens -= s.packet;
        pending.push({x.time, f});
    };
    for (int f = 0; f < s.flows; ++f) {
        // Full buckets at t = 0: every source bursts together first.
        const int burst = static_cast<int>(std::floor(s.bucket / s.packet + 1e-12));
        for (int b = 0; b < burst; ++b) {
            src[f].tokens -= s.packet;
            pending.push({0.0, f});
        }
    }

    double server_free = 0.0;
    double worst = 0.0;
    for (std::size_t served = 0; served < s.packets && !pending.empty(); ++served) {
        const Arrival a = pending.top();
        pending.pop();
        const double start = std::max(server_free, a.time);
        server_free = start + s.packet / s.server_rate;
        worst = std::max(worst, server_free - a.time);
        if (src[a.flow].time <= a.time) next(a.flow);
    }
    return worst;
}

double dt_reserve(double dg, double ups, double chi, double t) { return dg * ups / (t * ups - chi * dg); }

} // namespace oracle

namespace gen {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::vector<dtshare::Edge> connected_graph(Rng& rng, int n, double p) {
    std::vector<dtshare::Edge> edges;
    std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
    for (int v = 1; v < n; ++v) {
        const int u = integer(rng, 0, v - 1);
        edges.push_back({u, v});
        has[u][v] = has[v][u] = 1;
    }
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (!has[u][v] && uniform(rng, 0.0, 1.0) < p) edges.push_back({u, v});
    return edges;
}

std::vector<double> vector(Rng& rng, std::size_t size, double lo, double hi) {
    std::vector<double> v(size);
    for (auto& x : v) x = uniform(rng, lo, hi);
    return v;
}

} // namespace gen

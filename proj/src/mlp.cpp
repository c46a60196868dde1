#include "dtshare/mlp.hpp"

#include "dtshare/error.hpp"
#include "dtshare/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace dtshare {

int hidden_width(Tier tier) {
    switch (tier) {
    case Tier::psn: return 8;
    case Tier::msn: return 16;
    case Tier::csn: return 32;
    case Tier::teacher: return 64;
    }
    return 0;
}

std::string_view tier_name(Tier tier) {
    switch (tier) {
    case Tier::psn: return "psn";
    case Tier::msn: return "msn";
    case Tier::csn: return "csn";
    case Tier::teacher: return "teacher";
    }
    return "unknown";
}

Tier tier_from_index(int k) {
    if (k < 1 || k > 3) throw InputError("tier must be 1, 2 or 3, got " + std::to_string(k));
    return static_cast<Tier>(k);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.dim = dim;
    out.classes = classes;
    out.features.reserve(indices.size() * dim);
    out.labels.reserve(indices.size());
    for (auto i : indices) {
        auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

Mlp::Mlp(Tier tier, std::size_t input_dim, int classes, std::uint64_t seed)
    : Mlp(input_dim, static_cast<std::size_t>(hidden_width(tier)), classes, seed) {
    tier_ = tier;
}

Mlp::Mlp(std::size_t input_dim, std::size_t hidden, int classes, std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden), classes_(classes) {
    if (input_dim == 0 || hidden == 0 || classes < 2)
        throw InputError("mlp needs input_dim > 0, hidden > 0 and at least 2 classes");
    params_.assign(b2() + static_cast<std::size_t>(classes_), 0.0);
    Engine rng(seed);
    // Xavier-uniform weights, zero biases.
    const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim_ + hidden_));
    for (std::size_t i = 0; i < hidden_ * input_dim_; ++i) params_[w1() + i] = uniform(rng, -a1, a1);
    const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_ + classes_));
    for (std::size_t i = 0; i < classes_ * hidden_; ++i) params_[w2() + i] = uniform(rng, -a2, a2);
}

void Mlp::load(std::span<const double> flat) {
    if (flat.size() != params_.size())
        throw DimensionMismatchError("load: expected " + std::to_string(params_.size()) +
                                     " parameters, got " + std::to_string(flat.size()));
    std::copy(flat.begin(), flat.end(), params_.begin());
}

std::vector<double> Mlp::logits(std::span<const double> x) const {
    if (x.size() != input_dim_) throw DimensionMismatchError("logits: bad input width");
    std::vector<double> h(hidden_);
    for (std::size_t j = 0; j < hidden_; ++j) {
        double z = params_[b1() + j];
        const double* w = &params_[w1() + j * input_dim_];
        for (std::size_t i = 0; i < input_dim_; ++i) z += w[i] * x[i];
        h[j] = std::tanh(z);
    }
    std::vector<double> out(classes_);
    for (int c = 0; c < classes_; ++c) {
        double z = params_[b2() + c];
        const double* w = &params_[w2() + c * hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) z += w[j] * h[j];
        out[c] = z;
    }
    return out;
}

int Mlp::predict(std::span<const double> x) const {
    auto z = logits(x);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double Mlp::loss_and_grad(const Dataset& data, std::span<const std::size_t> batch,
                          std::span<const double> teacher_logits, const kd::KdConfig& cfg,
                          std::span<double> grad) const {
    if (batch.empty()) throw InputError("empty batch");
    if (grad.size() != params_.size()) throw DimensionMismatchError("gradient buffer size");
    if (data.dim != input_dim_ || data.classes != classes_)
        throw DimensionMismatchError("dataset shape does not match model");
    const bool distill = !teacher_logits.empty();
    const std::size_t k = static_cast<std::size_t>(classes_);
    if (distill && teacher_logits.size() != batch.size() * k)
        throw DimensionMismatchError("teacher logits size");

    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> h(hidden_);
    std::vector<double> z(k);
    std::vector<double> dh(hidden_);
    double total = 0.0;

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto x = data.row(batch[s]);
        for (std::size_t j = 0; j < hidden_; ++j) {
            double acc = params_[b1() + j];
            const double* w = &params_[w1() + j * input_dim_];
            for (std::size_t i = 0; i < input_dim_; ++i) acc += w[i] * x[i];
            h[j] = std::tanh(acc);
        }
        for (std::size_t c = 0; c < k; ++c) {
            double acc = params_[b2() + c];
            const double* w = &params_[w2() + c * hidden_];
            for (std::size_t j = 0; j < hidden_; ++j) acc += w[j] * h[j];
            z[c] = acc;
        }
        const auto y = kd::one_hot(data.labels[batch[s]], classes_);
        std::vector<double> dz;
        if (distill) {
            auto t = teacher_logits.subspan(s * k, k);
            total += kd::kd_loss(z, t, y, cfg);
            dz = kd::kd_loss_grad(z, t, y, cfg);
        } else {
            const kd::KdConfig hard{0.0, 1.0};
            total += kd::kd_loss(z, z, y, hard);
            dz = kd::kd_loss_grad(z, z, y, hard);
        }

        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            grad[b2() + c] += dz[c];
            double* gw = &grad[w2() + c * hidden_];
            const double* w = &params_[w2() + c * hidden_];
            for (std::size_t j = 0; j < hidden_; ++j) {
                gw[j] += dz[c] * h[j];
                dh[j] += dz[c] * w[j];
            }
        }
        for (std::size_t j = 0; j < hidden_; ++j) {
            const double da = dh[j] * (1.0 - h[j] * h[j]);
            grad[b1() + j] += da;
            double* gw = &grad[w1() + j * input_dim_];
            for (std::size_t i = 0; i < input_dim_; ++i) gw[i] += da * x[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad) g *= inv;
    return total * inv;
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw DimensionMismatchError("adam: size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        const double mhat = m_[i] / c1;
        const double vhat = v_[i] / c2;
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

double train_step(Mlp& model, Adam& opt, const Dataset& data, std::span<const std::size_t> batch,
                  std::span<const double> teacher_logits, const kd::KdConfig& cfg) {
    std::vector<double> grad(model.param_count());
    const double loss = model.loss_and_grad(data, batch, teacher_logits, cfg, grad);
    opt.step(model.params(), grad);
    return loss;
}

std::vector<double> batch_logits(const Mlp& model, const Dataset& data,
                                 std::span<const std::size_t> batch) {
    std::vector<double> out;
    out.reserve(batch.size() * static_cast<std::size_t>(model.classes()));
    for (auto i : batch) {
        auto z = model.logits(data.row(i));
        out.insert(out.end(), z.begin(), z.end());
    }
    return out;
}

double accuracy(const Mlp& model, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (model.predict(data.row(i)) == data.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

double train_epochs(Mlp& model, Adam& opt, const Dataset& data,
                    std::span<const std::size_t> indices, const EpochOptions& options,
                    std::uint64_t seed) {
    if (indices.empty()) return 0.0;
    Engine rng(seed);
    std::vector<std::size_t> order(indices.begin(), indices.end());
    const std::size_t k = static_cast<std::size_t>(model.classes());
    std::vector<double> teacher;
    double last = 0.0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        shuffle(order, rng);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t len = std::min(options.batch_size, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            teacher.clear();
            if (options.teacher_logits) {
                for (auto i : batch) {
                    auto first = options.teacher_logits->begin() + static_cast<std::ptrdiff_t>(i * k);
                    teacher.insert(teacher.end(), first, first + static_cast<std::ptrdiff_t>(k));
                }
            }
            sum += train_step(model, opt, data, batch, teacher, options.kd);
            ++batches;
        }
        last = sum / static_cast<double>(batches);
    }
    return last;
}

void write_checkpoint(std::ostream& out, std::span<const double> params) {
    auto put_u64 = [&](std::uint64_t v) {
        char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xff);
        out.write(bytes, 8);
    };
    put_u64(params.size());
    for (double p : params) put_u64(std::bit_cast<std::uint64_t>(p));
    if (!out) throw Error("checkpoint write failed");
}

std::vector<double> read_checkpoint(std::istream& in) {
    auto get_u64 = [&]() {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw InputError("truncated checkpoint");
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
        return v;
    };
    const std::uint64_t n = get_u64();
    if (n > (1ULL << 32)) throw InputError("implausible checkpoint dimension");
    std::vector<double> params(static_cast<std::size_t>(n));
    for (auto& p : params) p = std::bit_cast<double>(get_u64());
    return params;
}

} // namespace dtshare

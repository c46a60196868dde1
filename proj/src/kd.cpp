#include "dtshare/kd.hpp"

#include "dtshare/error.hpp"

#include <algorithm>
#include <cmath>

namespace dtshare::kd {

namespace {

constexpr double kProbFloor = 1e-12;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw DimensionMismatchError(std::string(what) + ": sizes " + std::to_string(a) + " and " +
                                     std::to_string(b) + " differ");
}

} // namespace

void KdConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("kd alpha must lie in [0,1]");
    if (!(tau > 0.0)) throw InputError("kd tau must be positive");
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    if (out.empty()) return out;
    const double peak = *std::max_element(out.begin(), out.end());
    double total = 0.0;
    for (auto& v : out) {
        v = std::exp(v - peak);
        total += v;
    }
    for (auto& v : out) v /= total;
    return out;
}

std::vector<double> softmax_temp(std::span<const double> logits, double tau) {
    std::vector<double> scaled(logits.size());
    std::transform(logits.begin(), logits.end(), scaled.begin(), [tau](double z) { return z / tau; });
    return softmax(scaled);
}

double cross_entropy(std::span<const double> probs, std::span<const double> target) {
    require_same_size(probs.size(), target.size(), "cross_entropy");
    double loss = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (target[j] == 0.0) continue;
        loss -= target[j] * std::log(std::clamp(probs[j], kProbFloor, 1.0));
    }
    return loss;
}

double kd_loss(std::span<const double> student, std::span<const double> teacher,
               std::span<const double> onehot, const KdConfig& cfg) {
    require_same_size(student.size(), teacher.size(), "kd_loss");
    require_same_size(student.size(), onehot.size(), "kd_loss");
    const double hard = cross_entropy(softmax(student), onehot);
    if (cfg.alpha == 0.0) return hard;
    const double soft =
        cross_entropy(softmax_temp(student, cfg.tau), softmax_temp(teacher, cfg.tau));
    return (1.0 - cfg.alpha) * hard + cfg.alpha * cfg.tau * cfg.tau * soft;
}

std::vector<double> kd_loss_grad(std::span<const double> student, std::span<const double> teacher,
                                 std::span<const double> onehot, const KdConfig& cfg) {
    require_same_size(student.size(), teacher.size(), "kd_loss_grad");
    require_same_size(student.size(), onehot.size(), "kd_loss_grad");
    auto grad = softmax(student);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = (1.0 - cfg.alpha) * (grad[j] - onehot[j]);
    if (cfg.alpha == 0.0) return grad;
    const auto ps = softmax_temp(student, cfg.tau);
    const auto pt = softmax_temp(teacher, cfg.tau);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += cfg.alpha * cfg.tau * (ps[j] - pt[j]);
    return grad;
}

std::vector<double> one_hot(int label, int classes) {
    if (label < 0 || label >= classes) throw InputError("label out of range");
    std::vector<double> y(classes, 0.0);
    y[label] = 1.0;
    return y;
}

} // namespace dtshare::kd

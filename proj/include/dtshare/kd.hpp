#pragma once

#include <span>
#include <vector>

namespace dtshare::kd {

struct KdConfig {
    double alpha = 0.5;  // weight of the soft (teacher) term, in [0, 1]
    double tau = 20.0;   // distillation temperature, > 0

    void validate() const;
};

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> softmax_temp(std::span<const double> logits, double tau);

// -sum_j target_j log(max(p_j, 1e-12)). Throws DimensionMismatchError.
double cross_entropy(std::span<const double> probs, std::span<const double> target);

// (1 - a) CE(softmax(s), y) + a tau^2 CE(softmax(s/tau), softmax(t/tau)).
// The teacher distribution is the soft target.
double kd_loss(std::span<const double> student, std::span<const double> teacher,
               std::span<const double> onehot, const KdConfig& cfg);

// d kd_loss / d student = (1 - a)(softmax(s) - y) + a tau (softmax(s/tau) - softmax(t/tau))
std::vector<double> kd_loss_grad(std::span<const double> student, std::span<const double> teacher,
                                 std::span<const double> onehot, const KdConfig& cfg);

std::vector<double> one_hot(int label, int classes);

} // namespace dtshare::kd

#pragma once

#include "dtshare/kd.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtshare {

// Student tiers mirror the small/medium/large ordering of the distilled
// models; the teacher is the widest network.
enum class Tier { teacher = 0, psn = 1, msn = 2, csn = 3 };

int hidden_width(Tier tier);
std::string_view tier_name(Tier tier);
Tier tier_from_index(int k);  // 1..3 -> psn..csn

// Labeled feature vectors, row-major.
struct Dataset {
    std::size_t dim = 0;
    int classes = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(features).subspan(i * dim, dim);
    }
    Dataset subset(std::span<const std::size_t> indices) const;
};

// input -> tanh hidden -> linear K-way logits.
class Mlp {
public:
    Mlp(Tier tier, std::size_t input_dim, int classes, std::uint64_t seed);
    Mlp(std::size_t input_dim, std::size_t hidden, int classes, std::uint64_t seed);

    Tier tier() const { return tier_; }
    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden() const { return hidden_; }
    int classes() const { return classes_; }
    std::size_t param_count() const { return params_.size(); }

    // Layout: W1 (hidden x input), b1, W2 (classes x hidden), b2.
    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }
    std::vector<double> flatten() const { return params_; }
    void load(std::span<const double> flat);

    std::vector<double> logits(std::span<const double> x) const;
    int predict(std::span<const double> x) const;

    // Mean loss over the batch and its gradient wrt all parameters. When
    // `teacher_logits` is present (batch x classes) the KD objective is used,
    // otherwise plain cross-entropy against the labels.
    double loss_and_grad(const Dataset& data, std::span<const std::size_t> batch,
                         std::span<const double> teacher_logits, const kd::KdConfig& cfg,
                         std::span<double> grad) const;

private:
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return hidden_ * input_dim_; }
    std::size_t w2() const { return b1() + hidden_; }
    std::size_t b2() const { return w2() + static_cast<std::size_t>(classes_) * hidden_; }

    Tier tier_ = Tier::teacher;
    std::size_t input_dim_ = 0;
    std::size_t hidden_ = 0;
    int classes_ = 0;
    std::vector<double> params_;
};

class Adam {
public:
    explicit Adam(std::size_t size, double lr = 0.001, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    double learning_rate() const { return lr_; }
    void step(std::span<double> params, std::span<const double> grad);

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    std::vector<double> m_;
    std::vector<double> v_;
    long long t_ = 0;
};

// One Adam step on the mean batch loss. Returns the loss before the step.
double train_step(Mlp& model, Adam& opt, const Dataset& data, std::span<const std::size_t> batch,
                  std::span<const double> teacher_logits, const kd::KdConfig& cfg);

// Logits of `model` for each row in `batch`, concatenated.
std::vector<double> batch_logits(const Mlp& model, const Dataset& data,
                                 std::span<const std::size_t> batch);

double accuracy(const Mlp& model, const Dataset& data);

// Shuffled passes over `indices` in mini-batches. Teacher logits, when
// given, are indexed by dataset row (data.size() x classes).
struct EpochOptions {
    std::size_t batch_size = 32;
    std::size_t epochs = 1;
    kd::KdConfig kd{};
    const std::vector<double>* teacher_logits = nullptr;
};

double train_epochs(Mlp& model, Adam& opt, const Dataset& data,
                    std::span<const std::size_t> indices, const EpochOptions& options,
                    std::uint64_t seed);

// Checkpoint: u64 little-endian dimension, then that many little-endian f64.
void write_checkpoint(std::ostream& out, std::span<const double> params);
std::vector<double> read_checkpoint(std::istream& in);

} // namespace dtshare

#pragma once

#include "dtshare/graph.hpp"
#include "dtshare/mlp.hpp"
#include "dtshare/planner.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dtshare::sim {

// K Gaussian blobs: centers ~ N(0, center_scale^2 I), samples ~ N(center, blob_spread^2 I).
struct DatasetSpec {
    int classes = 8;
    int samples_per_class = 150;
    int test_per_class = 50;
    std::size_t feature_dim = 16;
    double blob_spread = 1.0;
    double center_scale = 1.0;
};

// How the training set is cut into four equal parts. `class_blocks` puts
// class c in part c mod 4; `random` cuts a shuffled order into quarters.
enum class Partition { class_blocks, random };

struct ScenarioConfig {
    std::string topology = "six_node";  // preset name, or random:<n>:<d_max>
    std::string topology_file;          // edge-list path; overrides `topology`
    int tier = 2;
    int q = 5;  // consensus rounds per episode; 0 disables sharing
    int episodes = 60;
    std::uint64_t seed = 1;
    double rho = 0.0;  // 0 selects 1 / (d_max + 1)
    std::size_t delay_rounds = 0;
    std::map<int, double> loss;  // receiving node -> packet loss probability
    DatasetSpec dataset{};
    Partition partition = Partition::class_blocks;
    double sampling_probability = 0.5;
    int local_epochs = 20;
    int teacher_epochs = 30;
    int distill_epochs = 3;
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    double kd_alpha = 0.5;
    double kd_tau = 20.0;
    double dt_period = 0.1;
    double dt_deadline = 0.1;
    double dt_latency = 0.02;
    double dt_outage = 0.0;  // per-cycle probability that the DT link is down
    double theta = 0.9;

    // Throws InputError on out-of-range values.
    void validate() const;
};

ScenarioConfig read_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const ScenarioConfig& cfg);

Topology resolve_topology(const ScenarioConfig& cfg);

struct SyntheticData {
    Dataset train;
    Dataset test;
    std::vector<int> part_of;                       // train row -> part 0..3
    std::vector<int> excluded_part;                 // node -> part it lacks
    std::vector<std::vector<std::size_t>> local;    // node -> train rows
};

SyntheticData make_dataset(const DatasetSpec& spec, Partition partition, int nodes,
                           double sampling_probability, std::uint64_t seed);

struct EpisodeRecord {
    int episode = 0;
    int node = 0;
    double accuracy = 0.0;
    double disagreement = 0.0;
    std::uint64_t bits = 0;  // cumulative model bits sent network-wide
};

struct RunSummary {
    int nodes = 0;
    int edges = 0;
    int tier = 0;
    int q = 0;
    int d_max = 0;
    double rho = 0.0;
    std::size_t param_count = 0;
    bool sharing_disabled = false;
    double teacher_accuracy = 0.0;
    double distilled_accuracy = 0.0;
    double final_mean_accuracy = 0.0;
    double final_spread = 0.0;  // max - min node accuracy at the last episode
    std::vector<double> final_node_accuracy;
    std::vector<double> mean_accuracy;  // per episode
    int episodes_to_95 = 0;  // first episode with mean accuracy >= 0.95 * final
    std::uint64_t total_bits = 0;
    std::size_t desync_cycles = 0;
    std::size_t resync_cycles = 0;
};

struct MetricsLog {
    std::vector<EpisodeRecord> records;
    RunSummary summary;
};

MetricsLog run_alg1(const ScenarioConfig& cfg);

// Edge-side step alone: the teacher and all three distilled tiers, trained
// exactly as run_alg1 trains them for the same config.
struct DistilledTiers {
    Mlp teacher;
    std::vector<Mlp> students;  // tiers 1..3
    double teacher_accuracy = 0.0;
    std::vector<double> student_accuracy;
};

DistilledTiers distill_tiers(const ScenarioConfig& cfg);

// metrics.csv: episode,node,accuracy,disagreement,bits
void write_metrics_csv(std::ostream& out, const MetricsLog& log);
void write_summary_json(std::ostream& out, const ScenarioConfig& cfg, const MetricsLog& log);

enum class SweepAxis { q, d_max, tier };
SweepAxis parse_axis(const std::string& name);

struct SweepEntry {
    int value = 0;
    MetricsLog log;
};

// Runs one scenario per value, in parallel; each entry keeps its own seed.
std::vector<SweepEntry> sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<int>& values);

// Mean final accuracy per (k, q) over `seeds` consecutive seeds.
planner::AccuracyTable regenerate_accuracy_table(const ScenarioConfig& base, int seeds = 3,
                                                 int max_q = 5);

} // namespace dtshare::sim

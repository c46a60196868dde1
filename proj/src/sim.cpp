#include "dtshare/sim.hpp"

#include "dtshare/consensus.hpp"
#include "dtshare/dtsync.hpp"
#include "dtshare/error.hpp"
#include "dtshare/kernels.hpp"
#include "dtshare/rng.hpp"
#include "dtshare/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>

namespace dtshare::sim {

namespace {

constexpr int kParts = 4;

// Stream tags for derive_seed.
enum Stream : std::uint64_t {
    kData = 1,
    kTeacher,
    kStudent,
    kDistill,
    kTeacherTrain,
    kLocal,
    kLoss,
    kSync,
};

void draw_blob_sample(Engine& rng, std::span<const double> center, double spread,
                      std::vector<double>& out) {
    for (double c : center) out.push_back(c + spread * standard_normal(rng));
}

Mlp make_teacher(const ScenarioConfig& cfg) {
    return Mlp(Tier::teacher, cfg.dataset.feature_dim, cfg.dataset.classes, derive_seed(cfg.seed, kTeacher));
}

std::vector<std::size_t> all_rows(const Dataset& data) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
}

// Edge side: teacher on the full training set.
std::pair<Mlp, std::vector<double>> train_teacher(const ScenarioConfig& cfg, const Dataset& train) {
    Mlp teacher = make_teacher(cfg);
    const auto all = all_rows(train);
    Adam opt(teacher.param_count(), cfg.learning_rate);
    EpochOptions eo;
    eo.batch_size = cfg.batch_size;
    eo.epochs = static_cast<std::size_t>(cfg.teacher_epochs);
    train_epochs(teacher, opt, train, all, eo, derive_seed(cfg.seed, kTeacherTrain));
    auto logits = batch_logits(teacher, train, all);
    return {std::move(teacher), std::move(logits)};
}

Mlp distill_student(const ScenarioConfig& cfg, const Dataset& train, const std::vector<double>& teacher_logits,
                    Tier tier) {
    const auto k = static_cast<std::uint64_t>(tier);
    Mlp student(tier, cfg.dataset.feature_dim, cfg.dataset.classes, derive_seed(cfg.seed, kStudent, k));
    Adam opt(student.param_count(), cfg.learning_rate);
    EpochOptions eo;
    eo.batch_size = cfg.batch_size;
    eo.epochs = static_cast<std::size_t>(cfg.distill_epochs);
    eo.kd = {cfg.kd_alpha, cfg.kd_tau};
    eo.teacher_logits = &teacher_logits;
    train_epochs(student, opt, train, all_rows(train), eo, derive_seed(cfg.seed, kDistill, k));
    return student;
}

// Exceptions must not escape an OpenMP region.
template <class F>
void capture(std::exception_ptr& slot, F&& f) {
    try {
        f();
    } catch (...) {
        slot = std::current_exception();
    }
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

SyntheticData make_dataset(const DatasetSpec& spec, Partition partition, int nodes,
                           double sampling_probability, std::uint64_t seed) {
    if (nodes < 1) throw InputError("make_dataset: need at least one node");
    Engine rng(derive_seed(seed, kData));
    const std::size_t dim = spec.feature_dim;
    const int k = spec.classes;

    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k) * dim);
    for (int c = 0; c < k; ++c)
        for (std::size_t d = 0; d < dim; ++d) centers.push_back(spec.center_scale * standard_normal(rng));
    auto center = [&](int c) {
        return std::span<const double>(centers).subspan(static_cast<std::size_t>(c) * dim, dim);
    };

    SyntheticData out;
    for (Dataset* ds : {&out.train, &out.test}) {
        ds->dim = dim;
        ds->classes = k;
    }
    // Class-interleaved order so any prefix is roughly balanced.
    for (int s = 0; s < spec.samples_per_class; ++s)
        for (int c = 0; c < k; ++c) {
            draw_blob_sample(rng, center(c), spec.blob_spread, out.train.features);
            out.train.labels.push_back(c);
        }
    for (int s = 0; s < spec.test_per_class; ++s)
        for (int c = 0; c < k; ++c) {
            draw_blob_sample(rng, center(c), spec.blob_spread, out.test.features);
            out.test.labels.push_back(c);
        }

    const std::size_t n_train = out.train.size();
    out.part_of.resize(n_train);
    if (partition == Partition::class_blocks) {
        for (std::size_t i = 0; i < n_train; ++i) out.part_of[i] = out.train.labels[i] % kParts;
    } else {
        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), 0);
        shuffle(order, rng);
        for (std::size_t pos = 0; pos < n_train; ++pos)
            out.part_of[order[pos]] = static_cast<int>(pos * kParts / n_train);
    }

    // Each node holds three of the four parts. Cycling through a shuffled part
    // order guarantees every part is held by someone once nodes >= 2 and is
    // missing somewhere once nodes >= 4.
    std::vector<int> part_order(kParts);
    std::iota(part_order.begin(), part_order.end(), 0);
    shuffle(part_order, rng);
    out.excluded_part.resize(nodes);
    out.local.resize(nodes);
    for (int node = 0; node < nodes; ++node) {
        out.excluded_part[node] = part_order[node % kParts];
        for (std::size_t i = 0; i < n_train; ++i) {
            if (out.part_of[i] == out.excluded_part[node]) continue;
            if (bernoulli(rng, sampling_probability)) out.local[node].push_back(i);
        }
    }
    return out;
}

MetricsLog run_alg1(const ScenarioConfig& cfg) {
    cfg.validate();
    const Topology topo = resolve_topology(cfg);
    const int n = topo.node_count();
    for (const auto& [node, p] : cfg.loss)
        if (node >= n) throw InputError("loss entry for node " + std::to_string(node) + " outside topology");

    const auto data = make_dataset(cfg.dataset, cfg.partition, n, cfg.sampling_probability, cfg.seed);
    const auto [teacher, teacher_logits] = train_teacher(cfg, data.train);
    const Mlp student = distill_student(cfg, data.train, teacher_logits, tier_from_index(cfg.tier));

    const std::size_t params = student.param_count();
    const std::uint64_t volume_bits = 32ULL * params;
    const double rho = cfg.rho > 0.0 ? cfg.rho : default_rho(topo);

    MetricsLog log;
    auto& sum = log.summary;
    sum.nodes = n;
    sum.edges = static_cast<int>(topo.edges().size());
    sum.tier = cfg.tier;
    sum.q = cfg.q;
    sum.d_max = max_degree(topo);
    sum.rho = rho;
    sum.param_count = params;
    sum.sharing_disabled = cfg.q == 0;
    sum.teacher_accuracy = accuracy(teacher, data.test);
    sum.distilled_accuracy = accuracy(student, data.test);

    // Broadcast: every node starts from the distilled student.
    std::vector<Mlp> models(n, student);
    std::vector<Adam> optimizers(n, Adam(params, cfg.learning_rate));

    std::vector<double> node_loss(n, 0.0);
    for (const auto& [node, p] : cfg.loss) node_loss[node] = p;
    Engine loss_rng(derive_seed(cfg.seed, kLoss));
    Engine sync_rng(derive_seed(cfg.seed, kSync));

    // Device twins: a 2-D random walk standing in for kinetics, link quality
    // from the loss profile and the node's current accuracy.
    dtsync::SyncConfig sync_cfg;
    sync_cfg.deadline = cfg.dt_deadline;
    sync_cfg.period = cfg.dt_period;
    dtsync::EdgeTwinRecord edge;
    std::vector<dtsync::DeviceTwinRecord> devices(n);
    for (int i = 0; i < n; ++i) {
        devices[i].node = i;
        for (int j : topo.neighbors(i)) devices[i].g.link_quality[j] = 1.0 - node_loss[i];
        devices[i].g.model_perf = sum.distilled_accuracy;
        devices[i].f.models = {"psn", "msn", "csn"};
        dtsync::register_device(edge, devices[i], sync_cfg);
    }

    std::uint64_t bits = 0;
    std::vector<double> acc(n, 0.0);
    std::vector<double> flat(static_cast<std::size_t>(n) * params);
    std::vector<std::uint8_t> delivered(topo.adjacency().size(), 1);
    const bool lossy = std::any_of(node_loss.begin(), node_loss.end(), [](double p) { return p > 0.0; });

    for (int episode = 1; episode <= cfg.episodes; ++episode) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            EpochOptions eo;
            eo.batch_size = cfg.batch_size;
            eo.epochs = static_cast<std::size_t>(cfg.local_epochs);
            train_epochs(models[i], optimizers[i], data.train, data.local[i], eo,
                         derive_seed(cfg.seed, kLocal, static_cast<std::uint64_t>(episode) * 1000 + i));
        }

        double dis = 0.0;
        for (int i = 0; i < n; ++i) {
            auto p = models[i].params();
            std::copy(p.begin(), p.end(), flat.begin() + static_cast<std::ptrdiff_t>(i * params));
        }
        if (cfg.q > 0) {
            ConsensusState state(topo, params, flat, cfg.delay_rounds);
            for (int round = 0; round < cfg.q; ++round) {
                if (lossy) {
                    for (int i = 0; i < n; ++i)
                        for (int e = topo.offsets()[i]; e < topo.offsets()[i + 1]; ++e)
                            delivered[e] = bernoulli(loss_rng, node_loss[i]) ? 0 : 1;
                }
                step_discrete(state, rho, cfg.delay_rounds,
                              lossy ? std::span<const std::uint8_t>(delivered)
                                    : std::span<const std::uint8_t>());
                bits += 2ULL * topo.edges().size() * volume_bits;
            }
            auto v = state.values();
            std::copy(v.begin(), v.end(), flat.begin());
            for (int i = 0; i < n; ++i)
                models[i].load(std::span<const double>(flat).subspan(i * params, params));
        }
        dis = kernels::omp::disagreement(static_cast<std::size_t>(n), params, flat);

#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) acc[i] = accuracy(models[i], data.test);

        for (int i = 0; i < n; ++i) {
            log.records.push_back({episode, i, acc[i], dis, bits});

            auto observed = devices[i].g;
            for (int d = 0; d < 2; ++d) {
                observed.kinetic.velocity[d] = 0.5 * standard_normal(sync_rng);
                observed.kinetic.position[d] += observed.kinetic.velocity[d] * cfg.dt_period;
            }
            observed.model_perf = acc[i];
            devices[i].g = observed;
            dtsync::Channel ch{cfg.dt_latency, !bernoulli(sync_rng, cfg.dt_outage)};
            const auto outcome =
                dtsync::sync_cycle(devices[i], edge, ch, sync_cfg, episode * cfg.dt_period);
            if (outcome.phase == dtsync::SyncPhase::desynced) ++sum.desync_cycles;
            if (outcome.path.front() == dtsync::SyncPhase::resyncing) ++sum.resync_cycles;
        }
        const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
        sum.mean_accuracy.push_back(mean);
    }

    sum.final_node_accuracy = acc;
    sum.final_mean_accuracy = sum.mean_accuracy.back();
    const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    sum.final_spread = *hi - *lo;
    sum.total_bits = bits;
    sum.episodes_to_95 = cfg.episodes;
    for (int e = 0; e < cfg.episodes; ++e)
        if (sum.mean_accuracy[e] >= 0.95 * sum.final_mean_accuracy) {
            sum.episodes_to_95 = e + 1;
            break;
        }
    return log;
}

DistilledTiers distill_tiers(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto data = make_dataset(cfg.dataset, cfg.partition, 1, cfg.sampling_probability, cfg.seed);
    auto [teacher, logits] = train_teacher(cfg, data.train);
    DistilledTiers out{std::move(teacher), {}, 0.0, {}};
    out.teacher_accuracy = accuracy(out.teacher, data.test);
    for (int k = 1; k <= 3; ++k) {
        out.students.push_back(distill_student(cfg, data.train, logits, tier_from_index(k)));
        out.student_accuracy.push_back(accuracy(out.students.back(), data.test));
    }
    return out;
}

void write_metrics_csv(std::ostream& out, const MetricsLog& log) {
    out << "episode,node,accuracy,disagreement,bits\n";
    for (const auto& r : log.records)
        out << r.episode << ',' << r.node << ',' << format_double(r.accuracy) << ','
            << format_double(r.disagreement) << ',' << r.bits << '\n';
}

void write_summary_json(std::ostream& out, const ScenarioConfig& cfg, const MetricsLog& log) {
    const auto& s = log.summary;
    nlohmann::ordered_json j;
    j["topology"] = cfg.topology_file.empty() ? cfg.topology : cfg.topology_file;
    j["nodes"] = s.nodes;
    j["edges"] = s.edges;
    j["d_max"] = s.d_max;
    j["tier"] = s.tier;
    j["q"] = s.q;
    j["episodes"] = cfg.episodes;
    j["seed"] = cfg.seed;
    j["rho"] = s.rho;
    j["param_count"] = s.param_count;
    j["sharing_disabled"] = s.sharing_disabled;
    j["teacher_accuracy"] = s.teacher_accuracy;
    j["distilled_accuracy"] = s.distilled_accuracy;
    j["final_mean_accuracy"] = s.final_mean_accuracy;
    j["final_spread"] = s.final_spread;
    j["final_node_accuracy"] = s.final_node_accuracy;
    j["episodes_to_95"] = s.episodes_to_95;
    j["total_bits"] = s.total_bits;
    j["desync_cycles"] = s.desync_cycles;
    j["resync_cycles"] = s.resync_cycles;
    j["mean_accuracy"] = s.mean_accuracy;
    out << j.dump(2) << '\n';
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "q") return SweepAxis::q;
    if (name == "d_max") return SweepAxis::d_max;
    if (name == "tier") return SweepAxis::tier;
    throw InputError("sweep axis must be q, d_max or tier");
}

std::vector<SweepEntry> sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<int>& values) {
    std::vector<ScenarioConfig> configs;
    const int n = resolve_topology(base).node_count();
    for (int v : values) {
        ScenarioConfig c = base;
        switch (axis) {
        case SweepAxis::q: c.q = v; break;
        case SweepAxis::tier: c.tier = v; break;
        case SweepAxis::d_max:
            c.topology_file.clear();
            c.topology = "random:" + std::to_string(n) + ":" + std::to_string(v);
            break;
        }
        c.validate();
        configs.push_back(std::move(c));
    }
    std::vector<SweepEntry> out(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    const long long count = static_cast<long long>(configs.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        out[i].value = values[i];
        capture(errors[i], [&] { out[i].log = run_alg1(configs[i]); });
    }
    rethrow_first(errors);
    return out;
}

planner::AccuracyTable regenerate_accuracy_table(const ScenarioConfig& base, int seeds, int max_q) {
    if (seeds < 1) throw InputError("need at least one seed");
    struct Job {
        int k;
        int q;
        int s;
    };
    std::vector<Job> jobs;
    for (int k = 1; k <= 3; ++k)
        for (int q = 1; q <= max_q; ++q)
            for (int s = 0; s < seeds; ++s) jobs.push_back({k, q, s});
    std::vector<double> finals(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    const long long count = static_cast<long long>(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        ScenarioConfig c = base;
        c.tier = jobs[i].k;
        c.q = jobs[i].q;
        c.seed = base.seed + static_cast<std::uint64_t>(jobs[i].s);
        capture(errors[i], [&] { finals[i] = run_alg1(c).summary.final_mean_accuracy; });
    }
    rethrow_first(errors);
    planner::AccuracyTable table(max_q);
    for (int k = 1; k <= 3; ++k)
        for (int q = 1; q <= max_q; ++q) {
            double total = 0.0;
            for (std::size_t i = 0; i < jobs.size(); ++i)
                if (jobs[i].k == k && jobs[i].q == q) total += finals[i];
            table.set(k, q, total / seeds);
        }
    return table;
}

} // namespace dtshare::sim

#include "dtshare/error.hpp"
#include "dtshare/sim.hpp"
#include "dtshare/text.hpp"

#include <fstream>
#include <ostream>

namespace dtshare::sim {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InputError("scenario: " + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::map<int, double> parse_loss(const std::string& value, std::size_t line) {
    std::map<int, double> loss;
    if (value == "none") return loss;
    for (const auto& item : split(value, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ParseError(line, "loss entries look like node:probability");
        const int node = parse_int(trim(item.substr(0, colon)), line);
        const double p = parse_double(trim(item.substr(colon + 1)), line);
        if (node < 0) throw ParseError(line, "loss node must be non-negative");
        if (!is_probability(p)) throw ParseError(line, "loss probability must lie in [0,1]");
        loss[node] = p;
    }
    return loss;
}

Partition parse_partition(const std::string& value, std::size_t line) {
    if (value == "class_blocks") return Partition::class_blocks;
    if (value == "random") return Partition::random;
    throw ParseError(line, "partition must be class_blocks or random");
}

const char* partition_name(Partition p) {
    return p == Partition::class_blocks ? "class_blocks" : "random";
}

} // namespace

void ScenarioConfig::validate() const {
    require(tier >= 1 && tier <= 3, "tier must be 1, 2 or 3");
    require(q >= 0, "q must be non-negative");
    require(episodes >= 1, "episodes must be at least 1");
    require(rho == 0.0 || (rho > 0.0 && rho < 1.0), "rho must lie in (0,1) (0 = default)");
    for (const auto& [node, p] : loss) require(node >= 0 && is_probability(p), "bad loss entry");
    require(dataset.classes >= 2, "classes must be at least 2");
    require(dataset.samples_per_class >= 4, "samples_per_class must be at least 4");
    require(dataset.test_per_class >= 1, "test_per_class must be at least 1");
    require(dataset.feature_dim >= 1, "feature_dim must be at least 1");
    require(dataset.blob_spread > 0.0 && dataset.center_scale > 0.0, "blob geometry must be positive");
    require(is_probability(sampling_probability) && sampling_probability > 0.0,
            "sampling_probability must lie in (0,1]");
    require(local_epochs >= 0 && teacher_epochs >= 0 && distill_epochs >= 0, "epochs must be >= 0");
    require(batch_size >= 1, "batch_size must be at least 1");
    require(learning_rate >= 0.0, "learning_rate must be non-negative");
    require(kd_alpha >= 0.0 && kd_alpha <= 1.0, "kd_alpha must lie in [0,1]");
    require(kd_tau > 0.0, "kd_tau must be positive");
    require(dt_period > 0.0 && dt_deadline > 0.0 && dt_latency >= 0.0, "bad dt timing");
    require(is_probability(dt_outage), "dt_outage must lie in [0,1]");
    require(is_probability(theta), "theta must lie in [0,1]");
}

ScenarioConfig read_scenario(std::istream& in) {
    ScenarioConfig c;
    for_each_key_value(in, [&](const std::string& key, const std::string& value, std::size_t line) {
        if (key == "topology") c.topology = value;
        else if (key == "topology_file") c.topology_file = value;
        else if (key == "tier") c.tier = parse_int(value, line);
        else if (key == "q") c.q = parse_int(value, line);
        else if (key == "episodes") c.episodes = parse_int(value, line);
        else if (key == "seed") c.seed = parse_u64(value, line);
        else if (key == "rho") c.rho = parse_double(value, line);
        else if (key == "delay_rounds") c.delay_rounds = parse_u64(value, line);
        else if (key == "loss") c.loss = parse_loss(value, line);
        else if (key == "classes") c.dataset.classes = parse_int(value, line);
        else if (key == "samples_per_class") c.dataset.samples_per_class = parse_int(value, line);
        else if (key == "test_per_class") c.dataset.test_per_class = parse_int(value, line);
        else if (key == "feature_dim") c.dataset.feature_dim = parse_u64(value, line);
        else if (key == "blob_spread") c.dataset.blob_spread = parse_double(value, line);
        else if (key == "center_scale") c.dataset.center_scale = parse_double(value, line);
        else if (key == "partition") c.partition = parse_partition(value, line);
        else if (key == "sampling_probability") c.sampling_probability = parse_double(value, line);
        else if (key == "local_epochs") c.local_epochs = parse_int(value, line);
        else if (key == "teacher_epochs") c.teacher_epochs = parse_int(value, line);
        else if (key == "distill_epochs") c.distill_epochs = parse_int(value, line);
        else if (key == "batch_size") c.batch_size = parse_u64(value, line);
        else if (key == "learning_rate") c.learning_rate = parse_double(value, line);
        else if (key == "kd_alpha") c.kd_alpha = parse_double(value, line);
        else if (key == "kd_tau") c.kd_tau = parse_double(value, line);
        else if (key == "dt_period") c.dt_period = parse_double(value, line);
        else if (key == "dt_deadline") c.dt_deadline = parse_double(value, line);
        else if (key == "dt_latency") c.dt_latency = parse_double(value, line);
        else if (key == "dt_outage") c.dt_outage = parse_double(value, line);
        else if (key == "theta") c.theta = parse_double(value, line);
        else throw ParseError(line, "unknown key '" + key + "'");
    });
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario file '" + path + "'");
    return read_scenario(in);
}

void write_scenario(std::ostream& out, const ScenarioConfig& c) {
    out << "topology = " << c.topology << '\n';
    if (!c.topology_file.empty()) out << "topology_file = " << c.topology_file << '\n';
    out << "tier = " << c.tier << '\n'
        << "q = " << c.q << '\n'
        << "episodes = " << c.episodes << '\n'
        << "seed = " << c.seed << '\n'
        << "rho = " << format_double(c.rho) << '\n'
        << "delay_rounds = " << c.delay_rounds << '\n';
    out << "loss = ";
    if (c.loss.empty()) out << "none";
    bool first = true;
    for (const auto& [node, p] : c.loss) {
        out << (first ? "" : ",") << node << ':' << format_double(p);
        first = false;
    }
    out << '\n'
        << "classes = " << c.dataset.classes << '\n'
        << "samples_per_class = " << c.dataset.samples_per_class << '\n'
        << "test_per_class = " << c.dataset.test_per_class << '\n'
        << "feature_dim = " << c.dataset.feature_dim << '\n'
        << "blob_spread = " << format_double(c.dataset.blob_spread) << '\n'
        << "center_scale = " << format_double(c.dataset.center_scale) << '\n'
        << "partition = " << partition_name(c.partition) << '\n'
        << "sampling_probability = " << format_double(c.sampling_probability) << '\n'
        << "local_epochs = " << c.local_epochs << '\n'
        << "teacher_epochs = " << c.teacher_epochs << '\n'
        << "distill_epochs = " << c.distill_epochs << '\n'
        << "batch_size = " << c.batch_size << '\n'
        << "learning_rate = " << format_double(c.learning_rate) << '\n'
        << "kd_alpha = " << format_double(c.kd_alpha) << '\n'
        << "kd_tau = " << format_double(c.kd_tau) << '\n'
        << "dt_period = " << format_double(c.dt_period) << '\n'
        << "dt_deadline = " << format_double(c.dt_deadline) << '\n'
        << "dt_latency = " << format_double(c.dt_latency) << '\n'
        << "dt_outage = " << format_double(c.dt_outage) << '\n'
        << "theta = " << format_double(c.theta) << '\n';
}

Topology resolve_topology(const ScenarioConfig& cfg) {
    if (!cfg.topology_file.empty()) return load_edge_list(cfg.topology_file);
    if (cfg.topology.rfind("random:", 0) == 0) {
        const auto parts = split(cfg.topology, ':');
        if (parts.size() != 3) throw InputError("random topology is random:<n>:<d_max>");
        return generate_topology(parse_int(parts[1], 0), parse_int(parts[2], 0), cfg.seed);
    }
    return preset(cfg.topology);
}

} // namespace dtshare::sim

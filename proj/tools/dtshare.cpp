// dtshare: command-line front end.
//
// Exit codes: 0 success, 1 input error, 2 infeasible, 3 internal error.

#include "dtshare/error.hpp"
#include "dtshare/graph.hpp"
#include "dtshare/mlp.hpp"
#include "dtshare/netcalc.hpp"
#include "dtshare/planner.hpp"
#include "dtshare/sim.hpp"
#include "dtshare/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;

const char* const kScenarioKeys = R"(Scenario file (key = value, '#' starts a comment):
  topology              preset: six_node, six_node_dmax4, complete:<n>, cycle:<n>,
                        path:<n>, or random:<n>:<d_max> (seeded)     [six_node]
  topology_file         edge-list path; overrides topology
  tier                  student tier k: 1 psn, 2 msn, 3 csn           [2]
  q                     consensus rounds per episode; 0 = no sharing  [5]
  episodes              training episodes                             [60]
  seed                  master seed                                   [1]
  rho                   mixing step in (0,1); 0 = 1/(d_max+1)         [0]
  delay_rounds          stale rounds used by the consensus update     [0]
  loss                  per-receiver loss, e.g. 3:0.3,5:0.5, or none  [none]
  classes               number of classes                             [8]
  samples_per_class     training samples per class                    [150]
  test_per_class        held-out samples per class                    [50]
  feature_dim           feature dimension                             [16]
  blob_spread           within-class standard deviation               [1]
  center_scale          standard deviation of class centers           [1]
  partition             class_blocks or random                        [class_blocks]
  sampling_probability  per-sample keep probability at each node      [0.5]
  local_epochs          local passes per episode                      [20]
  teacher_epochs        teacher passes over the full set              [30]
  distill_epochs        student distillation passes                   [3]
  batch_size            minibatch size                                [32]
  learning_rate         Adam step size                                [0.001]
  kd_alpha              weight of the soft-target term                [0.5]
  kd_tau                distillation temperature                      [20]
  dt_period             twin sync period, s                           [0.1]
  dt_deadline           twin sync deadline, s                         [0.1]
  dt_latency            twin uplink latency, s                        [0.02]
  dt_outage             per-cycle probability the twin link is down   [0]
  theta                 accuracy requirement                          [0.9]
)";

const char* const kParamKeys = R"(Params file (key = value):
  C             channel bandwidth, bits/s                   [1.1e6]
  E             keep-alive rate per flow, bits/s            [1e4]
  contenders    flows sharing the channel                   [6]
  delta_g       twin deviation upload size, bits            [1e4]
  upsilon_edge  edge processing rate, ops/s                 [1e9]
  chi           edge ops per uploaded bit                   [10]
  t_dt          twin sync deadline, s                       [0.1]
  tier<k>_delta model size of tier k, bits (k = 1..3)       [32 x params]
  tier<k>_phi   compute cost of tier k, ops (k = 1..3)      [params]
Tier overrides must cover all three tiers or none.
)";

const char* const kAccuracyKeys = R"(Accuracy CSV: rows "k,q,omega" for k = 1..3 and q = 1..Q, optional
header "k,q,omega". Without a file the built-in table (q = 1..5) is used.
)";

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dtshare::InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw dtshare::InputError("write failed for '" + path.string() + "'");
}

template <class F>
std::string render(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw dtshare::InputError("cannot create '" + dir.string() + "': " + ec.message());
}

dtshare::sim::ScenarioConfig load_scenario(const std::string& path, std::optional<std::uint64_t> seed) {
    auto cfg = dtshare::sim::load_scenario(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

struct NetInputs {
    dtshare::netcalc::NetParams params;
    dtshare::netcalc::TierCatalog tiers;
};

NetInputs load_net(const std::string& path) {
    NetInputs in{{}, dtshare::planner::default_tiers()};
    if (path.empty()) return in;
    auto f = dtshare::netcalc::load_net_file(path);
    in.params = f.params;
    if (f.has_tiers) in.tiers = f.tiers;
    return in;
}

ordered_json plan_json(const dtshare::planner::PlanResult& r, const std::string& mode, double theta) {
    ordered_json j;
    j["mode"] = mode;
    j["theta"] = theta;
    j["k"] = r.config.k;
    j["q"] = r.config.q;
    j["d_max"] = r.config.d_max;
    j["cost"] = r.cost;
    j["bandwidth"] = r.bandwidth;
    j["feasible"] = r.feasible;
    j["table_lookups"] = r.table_lookups;
    return j;
}

int cmd_spectrum(const std::string& file, const std::string& preset) {
    using namespace dtshare;
    const Topology topo = file.empty() ? dtshare::preset(preset) : load_edge_list(file);
    const auto s = spectrum(topo);
    const auto b = delay_budget(s);
    std::cout << "nodes " << topo.node_count() << '\n' << "eigenvalues";
    for (double v : s.eigenvalues) std::cout << ' ' << format_double(v);
    std::cout << '\n'
              << "lambda_max " << format_double(s.lambda_max) << '\n'
              << "d_max " << s.d_max << '\n'
              << "eps_exact " << format_double(b.eps_exact) << '\n'
              << "eps_sufficient " << format_double(b.eps_sufficient) << '\n';
    return kExitOk;
}

int cmd_netcalc(const std::string& params_file, int k, int q, int d_max) {
    using namespace dtshare;
    const auto in = load_net(params_file);
    in.params.validate();
    netcalc::validate_tiers(in.tiers);
    if (k < 1 || k > 3) throw InputError("--tier must be 1, 2 or 3");
    const auto& tier = in.tiers[k - 1];
    ordered_json j;
    j["tier"] = k;
    j["q"] = q;
    j["d_max"] = d_max;
    j["model_bits"] = tier.volume;
    j["dt_bandwidth"] = netcalc::dt_bandwidth(in.params);
    j["delay_bound"] = netcalc::delay_bound(in.params, tier, q);
    j["delay_budget"] = std::numbers::pi / (4.0 * d_max);
    j["min_bandwidth"] = netcalc::min_bandwidth(in.params, tier, q, d_max);
    const auto f = netcalc::max_frequency(in.params, tier, d_max);
    j["max_frequency"] = f.q;
    j["saturated"] = f.saturated;
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_plan(const std::string& params_file, const std::string& accuracy_file, double theta, double budget,
             const std::string& mode) {
    using namespace dtshare;
    const auto in = load_net(params_file);
    planner::PlanProblem problem;
    problem.net = in.params;
    problem.tiers = in.tiers;
    problem.theta = theta;
    problem.compute_budget = budget;
    if (!accuracy_file.empty()) problem.table = planner::load_accuracy_csv(accuracy_file);
    const auto r = mode == "exhaustive" ? planner::search_exhaustive(problem) : planner::search_alg2(problem);
    std::cout << plan_json(r, mode, theta).dump(2) << '\n';
    return kExitOk;
}

int cmd_simulate(const std::string& scenario, const std::string& out_dir, std::optional<std::uint64_t> seed) {
    using namespace dtshare;
    const auto cfg = load_scenario(scenario, seed);
    const auto log = sim::run_alg1(cfg);
    ensure_dir(out_dir);
    write_file(fs::path(out_dir) / "metrics.csv", render([&](std::ostream& os) { sim::write_metrics_csv(os, log); }));
    write_file(fs::path(out_dir) / "summary.json",
               render([&](std::ostream& os) { sim::write_summary_json(os, cfg, log); }));
    std::cout << "final_mean_accuracy " << format_double(log.summary.final_mean_accuracy) << '\n'
              << "wrote " << (fs::path(out_dir) / "metrics.csv").string() << ", "
              << (fs::path(out_dir) / "summary.json").string() << '\n';
    return kExitOk;
}

int cmd_distill(const std::string& scenario, const std::string& out_dir, std::optional<std::uint64_t> seed,
                int table_seeds, int max_q) {
    using namespace dtshare;
    const auto cfg = load_scenario(scenario, seed);
    ensure_dir(out_dir);
    const auto tiers = sim::distill_tiers(cfg);
    auto checkpoint = [&](const std::string& name, const Mlp& m) {
        const auto flat = m.flatten();
        write_file(fs::path(out_dir) / name, render([&](std::ostream& os) { write_checkpoint(os, flat); }));
    };
    ordered_json j;
    j["seed"] = cfg.seed;
    j["teacher"] = {{"params", tiers.teacher.param_count()}, {"accuracy", tiers.teacher_accuracy}};
    checkpoint("teacher.ckpt", tiers.teacher);
    for (int k = 1; k <= 3; ++k) {
        const auto& m = tiers.students[k - 1];
        const std::string name = std::string(tier_name(tier_from_index(k)));
        checkpoint(name + ".ckpt", m);
        j[name] = {{"k", k}, {"params", m.param_count()}, {"accuracy", tiers.student_accuracy[k - 1]}};
    }
    write_file(fs::path(out_dir) / "distill.json", j.dump(2) + "\n");
    if (table_seeds > 0) {
        const auto table = sim::regenerate_accuracy_table(cfg, table_seeds, max_q);
        write_file(fs::path(out_dir) / "accuracy.csv",
                   render([&](std::ostream& os) { planner::write_accuracy_csv(os, table); }));
    }
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& scenario, const std::string& out_dir, std::optional<std::uint64_t> seed,
              const std::string& axis_name, const std::vector<int>& values) {
    using namespace dtshare;
    const auto cfg = load_scenario(scenario, seed);
    const auto axis = sim::parse_axis(axis_name);
    if (values.empty()) throw InputError("--values needs at least one value");
    const auto entries = sim::sweep(cfg, axis, values);
    ensure_dir(out_dir);
    std::ostringstream table;
    table << axis_name << ",final_mean_accuracy,final_spread,episodes_to_95,total_bits\n";
    for (const auto& e : entries) {
        const auto& s = e.log.summary;
        const std::string tag = axis_name + "_" + std::to_string(e.value);
        write_file(fs::path(out_dir) / ("metrics_" + tag + ".csv"),
                   render([&](std::ostream& os) { sim::write_metrics_csv(os, e.log); }));
        table << e.value << ',' << format_double(s.final_mean_accuracy) << ',' << format_double(s.final_spread)
              << ',' << s.episodes_to_95 << ',' << s.total_bits << '\n';
    }
    write_file(fs::path(out_dir) / "sweep.csv", table.str());
    std::cout << table.str();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-aware model sharing with distilled students and device twins."};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("Exit codes: 0 success, 1 input error, 2 infeasible, 3 internal error.");

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Override the scenario seed");

    auto* spectrum = app.add_subcommand("spectrum", "Laplacian spectrum and delay budgets of a topology");
    std::string topo_file, preset = "six_node";
    spectrum->add_option("topology", topo_file, "Edge-list file: '# nodes=<n>' header, then 'u v' per line")
        ->check(CLI::ExistingFile);
    spectrum->add_option("--preset", preset, "Preset used when no file is given")->capture_default_str();
    spectrum->footer("Prints eigenvalues, lambda_max, d_max, eps_exact = pi/(2 lambda_max) and\n"
                     "eps_sufficient = pi/(4 d_max).");

    auto* netcalc = app.add_subcommand("netcalc", "Delay bound, minimum bandwidth and maximum sharing frequency");
    std::string params_file;
    int nc_tier = 2, nc_q = 1, nc_dmax = 3;
    netcalc->add_option("params", params_file, "Params file (defaults used when omitted)")->check(CLI::ExistingFile);
    netcalc->add_option("--tier", nc_tier, "Tier k")->capture_default_str();
    netcalc->add_option("--q", nc_q, "Sharing frequency")->capture_default_str()->check(CLI::PositiveNumber);
    netcalc->add_option("--d-max", nc_dmax, "Maximum degree")->capture_default_str()->check(CLI::PositiveNumber);
    netcalc->footer(kParamKeys);

    auto* plan = app.add_subcommand("plan", "Pick (k, q, d_max) meeting the accuracy requirement at least cost");
    std::string accuracy_file, mode = "alg2";
    double theta = 0.9, budget = 1e300;
    plan->add_option("params", params_file, "Params file (defaults used when omitted)")->check(CLI::ExistingFile);
    plan->add_option("--accuracy", accuracy_file, "Accuracy CSV")->check(CLI::ExistingFile);
    plan->add_option("--theta", theta, "Accuracy requirement")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    plan->add_option("--budget", budget, "Compute budget F, ops")->capture_default_str();
    plan->add_option("--mode", mode, "Search mode")
        ->capture_default_str()
        ->check(CLI::IsMember({"alg2", "exhaustive"}));
    plan->footer(std::string(kParamKeys) + kAccuracyKeys);

    std::string scenario, out_dir = ".";
    auto* simulate = app.add_subcommand("simulate", "Run one training scenario; writes metrics.csv, summary.json");
    simulate->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    simulate->footer(kScenarioKeys);

    auto* distill = app.add_subcommand("distill", "Train teacher and all student tiers; writes checkpoints");
    int table_seeds = 3, max_q = 5;
    distill->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    distill->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    distill->add_option("--table-seeds", table_seeds, "Seeds averaged for accuracy.csv; 0 skips it")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    distill->add_option("--max-q", max_q, "Largest q in accuracy.csv")->capture_default_str()->check(
        CLI::PositiveNumber);
    distill->footer(std::string("Outputs: teacher.ckpt, psn.ckpt, msn.ckpt, csn.ckpt (u64 count, then\n"
                                "little-endian f64 params), distill.json, accuracy.csv.\n\n") +
                    kScenarioKeys);

    auto* sweep = app.add_subcommand("sweep", "Run a scenario across values of one axis");
    std::string axis = "q";
    std::vector<int> values;
    sweep->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    sweep->add_option("--axis", axis, "Swept field")->capture_default_str()->check(
        CLI::IsMember({"q", "d_max", "tier"}));
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->footer(std::string("d_max values use a seeded random topology with the scenario's node count.\n"
                              "Outputs: sweep.csv, metrics_<axis>_<value>.csv.\n\n") +
                  kScenarioKeys);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*spectrum) return cmd_spectrum(topo_file, preset);
        if (*netcalc) return cmd_netcalc(params_file, nc_tier, nc_q, nc_dmax);
        if (*plan) return cmd_plan(params_file, accuracy_file, theta, budget, mode);
        if (*simulate) return cmd_simulate(scenario, out_dir, seed);
        if (*distill) return cmd_distill(scenario, out_dir, seed, table_seeds, max_q);
        if (*sweep) return cmd_sweep(scenario, out_dir, seed, axis, values);
    } catch (const dtshare::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const dtshare::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

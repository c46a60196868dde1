#include "dtshare/error.hpp"
#include "dtshare/mlp.hpp"
#include "dtshare/sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

using namespace dtshare;
using namespace dtshare::sim;

namespace {

ScenarioConfig small() {
    ScenarioConfig c;
    c.episodes = 4;
    c.local_epochs = 1;
    c.teacher_epochs = 3;
    c.distill_epochs = 1;
    c.dataset.samples_per_class = 40;
    c.dataset.test_per_class = 10;
    return c;
}

std::string metrics_text(const MetricsLog& log) {
    std::ostringstream os;
    write_metrics_csv(os, log);
    return os.str();
}

} // namespace

TEST_CASE("dataset is deterministic and partitioned") {
    const DatasetSpec spec;
    const auto a = make_dataset(spec, Partition::class_blocks, 6, 0.5, 3);
    const auto b = make_dataset(spec, Partition::class_blocks, 6, 0.5, 3);
    CHECK(a.train.features == b.train.features);
    CHECK(a.local == b.local);
    CHECK(a.train.size() == static_cast<std::size_t>(spec.classes * spec.samples_per_class));
    CHECK(a.test.size() == static_cast<std::size_t>(spec.classes * spec.test_per_class));
    CHECK(make_dataset(spec, Partition::class_blocks, 6, 0.5, 4).train.features != a.train.features);

    for (auto partition : {Partition::class_blocks, Partition::random}) {
        for (int n = 4; n <= 9; ++n) {
            const auto d = make_dataset(spec, partition, n, 0.5, static_cast<std::uint64_t>(n));
            std::set<int> held, missing;
            for (int node = 0; node < n; ++node) {
                missing.insert(d.excluded_part[node]);
                for (auto row : d.local[node]) {
                    CHECK(d.part_of[row] != d.excluded_part[node]);
                    held.insert(d.part_of[row]);
                }
            }
            CHECK(held.size() == 4);
            CHECK(missing.size() == 4);
        }
    }
}

TEST_CASE("sampling keeps about half of three parts") {
    DatasetSpec spec;
    spec.samples_per_class = 400;
    const auto d = make_dataset(spec, Partition::random, 4, 0.5, 9);
    const double expected = 0.5 * 0.75 * d.train.size();
    for (const auto& rows : d.local) CHECK(std::abs(rows.size() - expected) < 0.1 * expected);
}

TEST_CASE("two separated blobs are almost perfectly learnable") {
    DatasetSpec spec;
    spec.classes = 2;
    spec.center_scale = 10.0;
    spec.blob_spread = 0.5;
    const auto d = make_dataset(spec, Partition::random, 1, 1.0, 5);
    Mlp m(Tier::psn, spec.feature_dim, 2, 1);
    Adam opt(m.param_count());
    EpochOptions eo;
    eo.epochs = 5;
    std::vector<std::size_t> rows(d.train.size());
    std::iota(rows.begin(), rows.end(), 0);
    train_epochs(m, opt, d.train, rows, eo, 2);
    CHECK(accuracy(m, d.test) >= 0.99);
}

TEST_CASE("runs are deterministic") {
    auto c = small();
    c.loss = {{3, 0.3}, {5, 0.5}};
    c.dt_outage = 0.3;
    const auto a = run_alg1(c);
    const auto b = run_alg1(c);
    CHECK(metrics_text(a) == metrics_text(b));
    c.seed = 2;
    CHECK(metrics_text(run_alg1(c)) != metrics_text(a));
}

TEST_CASE("metrics are dense and bounded") {
    auto c = small();
    const auto log = run_alg1(c);
    REQUIRE(log.records.size() == static_cast<std::size_t>(c.episodes * 6));
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        CHECK(r.episode == static_cast<int>(i / 6) + 1);
        CHECK(r.node == static_cast<int>(i % 6));
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
    }
    CHECK(log.summary.mean_accuracy.size() == static_cast<std::size_t>(c.episodes));
    CHECK(log.summary.episodes_to_95 >= 1);
    CHECK(log.summary.episodes_to_95 <= c.episodes);
}

TEST_CASE("bits accounting is exact") {
    for (int q : {0, 1, 3}) {
        for (const char* topo : {"six_node", "six_node_dmax4", "cycle:5"}) {
            auto c = small();
            c.q = q;
            c.topology = topo;
            c.loss = {{1, 0.5}};
            const auto log = run_alg1(c);
            const std::uint64_t want = static_cast<std::uint64_t>(log.summary.edges) * 2 * 32 *
                                       log.summary.param_count * q * c.episodes;
            CHECK(log.summary.total_bits == want);
            CHECK(log.records.back().bits == want);
            CHECK(log.summary.sharing_disabled == (q == 0));
        }
    }
}

TEST_CASE("without local training the nodes never disagree") {
    auto c = small();
    c.local_epochs = 0;
    c.q = 2;
    for (const auto& r : run_alg1(c).records) CHECK(r.disagreement == 0.0);
}

TEST_CASE("sharing shrinks disagreement") {
    auto c = small();
    c.q = 0;
    const auto alone = run_alg1(c);
    c.q = 5;
    const auto shared = run_alg1(c);
    CHECK(shared.records.back().disagreement < alone.records.back().disagreement);
}

TEST_CASE("property: three or more rounds spread no wider than one, over five seeds") {
    auto c = small();
    c.episodes = 10;
    c.local_epochs = 5;
    double one = 0.0, three = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        c.seed = s;
        c.q = 1;
        one += run_alg1(c).summary.final_spread;
        c.q = 3;
        three += run_alg1(c).summary.final_spread;
    }
    CHECK(three <= one);
}

TEST_CASE("scenario validation") {
    auto c = small();
    c.loss = {{6, 0.5}};
    CHECK_THROWS_AS(run_alg1(c), InputError);
    c = small();
    c.q = -1;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small();
    c.episodes = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small();
    c.sampling_probability = 1.5;
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("scenario file round trip") {
    ScenarioConfig c;
    c.topology = "random:8:3";
    c.q = 3;
    c.loss = {{3, 0.3}, {5, 0.5}};
    c.partition = Partition::random;
    c.dataset.blob_spread = 1.25;
    std::stringstream ss;
    write_scenario(ss, c);
    const auto back = read_scenario(ss);
    std::stringstream again;
    write_scenario(again, back);
    CHECK(again.str() == ss.str());
    CHECK(back.loss == c.loss);
    CHECK(resolve_topology(back).node_count() == 8);
}

TEST_CASE("scenario parse errors carry the line") {
    auto line_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            (void)read_scenario(in);
        } catch (const ParseError& e) {
            return static_cast<int>(e.line());
        }
        return 0;
    };
    CHECK(line_of("q = 3\n# ok\nbogus = 1\n") == 3);
    CHECK(line_of("q = three\n") == 1);
    CHECK(line_of("tier = 2\nloss = 3-0.3\n") == 2);
    CHECK(line_of("loss = 3:1.5\n") == 1);
    CHECK(line_of("partition = stripes\n") == 1);
    CHECK(line_of("just words\n") == 1);
    std::istringstream range("q = -2\n");
    CHECK_THROWS_AS(read_scenario(range), InputError);
}

TEST_CASE("summary json fields") {
    auto c = small();
    c.q = 0;
    std::ostringstream os;
    write_summary_json(os, c, run_alg1(c));
    CHECK(os.str().find("\"sharing_disabled\": true") != std::string::npos);
    CHECK(os.str().find("\"final_mean_accuracy\"") != std::string::npos);
}

TEST_CASE("sweep keeps per-value results") {
    auto c = small();
    const auto rows = sweep(c, SweepAxis::q, {0, 2});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].log.summary.total_bits == 0);
    CHECK(metrics_text(rows[1].log) == metrics_text(run_alg1([&] {
              auto d = c;
              d.q = 2;
              return d;
          }())));
    const auto dm = sweep(c, SweepAxis::d_max, {2, 3});
    CHECK(dm[0].log.summary.d_max <= 2);
    CHECK_THROWS_AS(sweep(c, SweepAxis::tier, {4}), InputError);
    CHECK_THROWS_AS(parse_axis("rho"), InputError);
}

TEST_CASE("distilled tiers match the student used by a run") {
    auto c = small();
    c.q = 0;
    c.episodes = 1;
    const auto tiers = distill_tiers(c);
    REQUIRE(tiers.students.size() == 3);
    CHECK(tiers.students[0].param_count() < tiers.students[2].param_count());
    CHECK(tiers.student_accuracy[c.tier - 1] == run_alg1(c).summary.distilled_accuracy);
}

TEST_CASE("regenerated table is complete") {
    auto c = small();
    c.episodes = 2;
    const auto t = regenerate_accuracy_table(c, 1, 2);
    CHECK(t.complete());
    CHECK(t.max_q() == 2);
}

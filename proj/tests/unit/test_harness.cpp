#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"
#include "vdpo/harness/config.hpp"
#include "vdpo/harness/experiment.hpp"
#include "vdpo/harness/metrics.hpp"
#include "vdpo/harness/plot.hpp"

using namespace vdpo;
using namespace vdpo::harness;
namespace fs = std::filesystem;

namespace {

EvalRecord rec(std::uint64_t step, const std::string& series, double mean) {
    EvalRecord r;
    r.step = step;
    r.series = series;
    r.return_mean = mean;
    r.return_std = 1.0;
    return r;
}

ExperimentConfig tiny_experiment(const std::string& dir) {
    ExperimentConfig c = parse_experiment_config(
        "env = point_mass\n"
        "algorithm = vdpo\n"
        "delay = 2\n"
        "seeds = 0,1\n"
        "train.total_steps = 300\n"
        "train.learning_starts = 100\n"
        "train.eval_interval = 150\n"
        "train.eval_episodes = 2\n"
        "train.hidden = 8\n"
        "train.batch_size = 16\n"
        "train.bc_batch_size = 8\n"
        "train.policy_decoder_frequency = 100\n"
        "train.policy_decoder_iterations = 2\n"
        "train.transformer.embed_dim = 8\n"
        "train.transformer.layers = 1\n");
    c.output_dir = dir;
    return c;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("vdpo_harness_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Metrics, NormalizedReturn) {
    EXPECT_NEAR(ret_nor(-200.0, -1200.0, -150.0), 1000.0 / 1050.0, 1e-15);
    EXPECT_EQ(ret_nor(-1200.0, -1200.0, -150.0), 0.0);
    EXPECT_EQ(ret_nor(-150.0, -1200.0, -150.0), 1.0);
    EXPECT_THROW(ret_nor(1.0, 5.0, 5.0), NumericError);
}

TEST(Metrics, StepsToThreshold) {
    const std::vector<EvalRecord> r{rec(10000, "vdpo", -300.0), rec(70000, "vdpo", -150.0), rec(80000, "vdpo", -100.0)};
    EXPECT_EQ(steps_to_threshold(r, -160.0), 70000u);
    EXPECT_EQ(steps_to_threshold(r, -300.0), 10000u);
    EXPECT_FALSE(steps_to_threshold(r, 0.0).has_value());
}

TEST(Metrics, CsvRoundTrip) {
    auto a = rec(2000, "vdpo", -123.456789012345678);
    a.diagnostics["critic_loss"] = 0.1;
    a.diagnostics["kl_loss"] = 1e-300;
    const std::vector<EvalRecord> recs{a, rec(2000, "reference", -99.0)};
    const auto text = metrics_csv(7, recs);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "schema_version,seed,step,series,return_mean,return_std,critic_loss,actor_loss,alpha_loss,alpha,"
              "belief_loss,kl_loss");
    std::uint64_t seed = 0;
    const auto back = parse_metrics_csv(text, &seed);
    EXPECT_EQ(seed, 7u);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].return_mean, a.return_mean);
    EXPECT_EQ(back[0].diagnostics, a.diagnostics);
    EXPECT_TRUE(back[1].diagnostics.empty());
    EXPECT_EQ(metrics_csv(7, back), text);
}

TEST(Config, ParseRoundTripAndErrors) {
    auto c = parse_experiment_config("# comment\nenv = pendulum\nalgorithm = augmented_sac\ndelay = 3\n"
                                     "seeds = 1,2\ntotal_steps = 500\ntrain.hidden = 32,32\n");
    EXPECT_EQ(c.algorithm, Algorithm::augmented_sac);
    EXPECT_EQ(c.train.total_steps, 500u);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
    const auto again = parse_experiment_config(c.to_text());
    EXPECT_EQ(again.to_map(), c.to_map());
    EXPECT_THROW(parse_experiment_config("colour = blue\n"), ConfigError);
    EXPECT_THROW(parse_experiment_config("algorithm = ppo\n"), ConfigError);
    EXPECT_THROW(parse_experiment_config("delay = x\n"), ConfigError);
    auto bad = c;
    bad.delay = 0;
    EXPECT_NO_THROW(bad.validate());
    bad.algorithm = Algorithm::vdpo;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, OutputRootOverride) {
    ::setenv("VDPO_OUTPUT_ROOT", "/tmp/vdpo_root", 1);
    EXPECT_EQ(resolve_output_dir("run"), "/tmp/vdpo_root/run");
    EXPECT_EQ(resolve_output_dir("/abs/run"), "/abs/run");
    ::unsetenv("VDPO_OUTPUT_ROOT");
    EXPECT_EQ(resolve_output_dir("run"), "run");
}

TEST(Aggregate, SeriesStatisticsAndDefaultReference) {
    std::map<std::uint64_t, std::vector<EvalRecord>> per_seed;
    per_seed[0] = {rec(10, "vdpo", -300.0), rec(10, "reference", -200.0), rec(20, "vdpo", -100.0), rec(20, "reference", -100.0)};
    per_seed[1] = {rec(10, "vdpo", -100.0), rec(10, "reference", -150.0), rec(20, "vdpo", -200.0), rec(20, "reference", -120.0)};
    const auto agg = aggregate_records(per_seed, std::nullopt, -1000.0);
    ASSERT_TRUE(agg.ret_df.has_value());
    EXPECT_EQ(*agg.ret_df, -110.0);
    const auto& v = agg.series.at("vdpo");
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].mean, -200.0);
    EXPECT_EQ(v[0].std, 100.0);
    EXPECT_EQ(v[0].count, 2u);
    EXPECT_NEAR(agg.ret_nor.at("vdpo"), ((900.0 / 890.0) + (800.0 / 890.0)) / 2.0, 1e-15);
    EXPECT_EQ(agg.steps_to_threshold.at("vdpo")[0], 20u);
    EXPECT_EQ(agg.steps_to_threshold.at("vdpo")[1], 10u);
}

TEST(Experiment, WritesTheOutputContractAndAggregatesReproducibly) {
    const auto dir = scratch("contract");
    const auto res = run_experiment(tiny_experiment(dir.string()));
    EXPECT_FALSE(res.partial);
    for (const char* f : {"config.resolved", "aggregate.json", "seed_0.csv", "seed_1.csv", "seed_0.ckpt", "seed_1.ckpt"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_EQ(parse_experiment_config(read_file((dir / "config.resolved").string())).to_map(),
              tiny_experiment(dir.string()).to_map());

    std::map<std::uint64_t, std::vector<EvalRecord>> per_seed;
    for (std::uint64_t s : {0u, 1u}) {
        per_seed[s] = parse_metrics_csv(read_file((dir / ("seed_" + std::to_string(s) + ".csv")).string()));
    }
    const auto loaded = load_aggregate(res.aggregate_path);
    const auto recomputed = aggregate_records(per_seed, std::nullopt, loaded.ret_rand);
    ASSERT_EQ(recomputed.series.size(), loaded.series.size());
    for (const auto& [name, pts] : recomputed.series) {
        const auto& other = loaded.series.at(name);
        ASSERT_EQ(pts.size(), other.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_EQ(pts[i].step, other[i].step);
            EXPECT_NEAR(pts[i].mean, other[i].mean, 1e-12);
            EXPECT_NEAR(pts[i].std, other[i].std, 1e-12);
        }
    }
    for (const auto& [name, v] : recomputed.ret_nor) EXPECT_NEAR(v, loaded.ret_nor.at(name), 1e-12);
    EXPECT_EQ(recomputed.steps_to_threshold, loaded.steps_to_threshold);

    const auto stats = evaluate_checkpoint((dir / "seed_0.ckpt").string(), 2, 0);
    EXPECT_TRUE(std::isfinite(stats.mean));
    fs::remove_all(dir);
}

TEST(Experiment, IdenticalConfigsGiveByteIdenticalCsvs) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    run_experiment(tiny_experiment(a.string()));
    run_experiment(tiny_experiment(b.string()));
    for (const char* f : {"seed_0.csv", "seed_1.csv"}) {
        EXPECT_EQ(read_file((a / f).string()), read_file((b / f).string())) << f;
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Experiment, ExactAlgorithmsWriteSampleCounts) {
    const auto dir = scratch("exact");
    auto c = parse_experiment_config("algorithm = exact_vdpo\ndelay = 2\nseeds = 0,1,2\n");
    c.output_dir = dir.string();
    const auto res = run_experiment(c);
    EXPECT_FALSE(res.partial);
    const auto csv = read_file((dir / "seed_1.csv").string());
    EXPECT_EQ(csv.rfind("seed,delay,epsilon,arm,samples", 0), 0u);
    fs::remove_all(dir);
}

TEST(Plot, SvgIsWellFormedXml) {
    SeriesPoints a{{0, -1000.0, 50.0, 2}, {1000, -500.0, 40.0, 2}, {2000, -200.0, 10.0, 2}};
    SeriesPoints b{{2000, -300.0, 0.0, 1}};
    const auto svg = render_learning_curves({{"vdpo", a}, {"augmented_sac & co", b}}, "pendulum <delay 2>");
    std::istringstream in(svg);
    boost::property_tree::ptree tree;
    ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
    EXPECT_EQ(tree.begin()->first, "svg");
    EXPECT_NE(svg.find("polyline"), std::string::npos);
    EXPECT_NE(svg.find("circle"), std::string::npos);
    EXPECT_THROW(render_learning_curves({}), ConfigError);
}

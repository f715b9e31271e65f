#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "dmsynth/cli.hpp"
#include "dmsynth/config.hpp"
#include "dmsynth/report.hpp"

using namespace dmsynth;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("dmsynth_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("format_number emits nine significant digits, locale-independent") {
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(2.5) == "2.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(0.123456789123) == "0.123456789");
    CHECK(format_number(-0.5) == "-0.5");
    CHECK(format_number(1e-4) == "0.0001");
    // round-trips through parsing to within one unit in the ninth digit
    double v = 0.987654321987;
    CHECK(std::stod(format_number(v)) == doctest::Approx(v).epsilon(1e-9));
    CHECK(format_number(123456789.0) == "123456789");
}

TEST_CASE("parse_config_text defaults, snapshot completeness, and round-trip") {
    RunConfig defaults = parse_config_text("");
    CHECK(defaults.train.gamma == 0.05);
    CHECK(defaults.sampler.guidance_scale == 2.0);
    CHECK(defaults.sampler.strength == 0.75);
    CHECK(defaults.sampler.num_steps == 30);
    CHECK(defaults.train.T == 200);
    CHECK(defaults.mia.num_shadows == 8);

    std::string snap = config_snapshot(defaults);
    // the snapshot records every default explicitly
    for (const char* key :
         {"\"gamma\"", "\"guidance_scale\"", "\"strength\"", "\"num_steps\"",
          "\"beta_start\"", "\"beta_end\"", "\"cond_drop\"", "\"seeds\"", "\"scale_k\"",
          "\"num_shadows\"", "\"pool_size\"", "\"separation\"", "\"train_size\"",
          "\"denoiser_hidden\"", "\"classifier_epochs\"", "\"eval_lambda\"",
          "\"task_seed\"", "\"log_cardinality\"", "\"variant\"", "\"finetune\"",
          "\"ood\""}) {
        CHECK_MESSAGE(snap.find(key) != std::string::npos, key);
    }
    CHECK(config_snapshot(parse_config_text(snap)) == snap);

    // round-trip of a customized config
    RunConfig custom = defaults;
    custom.task.num_classes = 5;
    custom.task.family = TaskFamily::RingMixture;
    custom.task.ood_shift.reset();
    custom.train.gamma = 0.125;
    custom.train.weighting = LossWeighting::SnrWeighted;
    custom.toggles.finetune = true;
    custom.toggles.mmd_loss = true;
    custom.sampler.prior = PriorKind::Latent;
    custom.mia.variant = LiraVariant::FixedVariance;
    custom.experiment.seeds = {9, 10, 11};
    custom.experiment.scale_k = {0.5, 3.0};
    std::string snap2 = config_snapshot(custom);
    CHECK(config_snapshot(parse_config_text(snap2)) == snap2);
    RunConfig back = parse_config_text(snap2);
    CHECK(back.task.family == TaskFamily::RingMixture);
    CHECK_FALSE(back.task.ood_shift.has_value());
    CHECK(back.train.gamma == 0.125);
    CHECK(back.experiment.seeds == std::vector<std::uint64_t>{9, 10, 11});
}

TEST_CASE("parse_config_text rejects bad input with field names and lines") {
    CHECK_THROWS_WITH_AS(parse_config_text("{\n  \"train\": {\n    \"gamma\": -1\n  }\n}"),
                         doctest::Contains("train.gamma"), std::invalid_argument);
    try {
        parse_config_text("{\n  \"train\": {\n    \"gamma\": -1\n  }\n}");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    CHECK_THROWS_WITH_AS(parse_config_text("{\"train\": {\"gamm\": 0.1}}"),
                         doctest::Contains("train.gamm"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("{\"trian\": {}}"),
                         doctest::Contains("trian"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("{\"train\": {\"gamma\": \"x\"}}"),
                         doctest::Contains("type mismatch"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("{\"train\": "), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("{\"sampler\": {\"strength\": 1.5}}"),
                         doctest::Contains("sampler.strength"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("{\"sampler\": {\"prior\": \"cauchy\"}}"),
                         doctest::Contains("unrecognized"), std::invalid_argument);
    // mmd_loss without finetune violates the toggle dependency
    CHECK_THROWS_AS(parse_config_text("{\"toggles\": {\"mmd_loss\": true}}"),
                    std::invalid_argument);
}

TEST_CASE("write_csv layout and row-width enforcement") {
    fs::path dir = fresh_dir("csv");
    write_csv({"a", "b"}, {{"1", "2"}, {"3", "4"}}, dir / "t.csv");
    CHECK(slurp(dir / "t.csv") == "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(write_csv({"a", "b"}, {{"1"}}, dir / "u.csv"), std::invalid_argument);
}

TEST_CASE("ROC figure passes through (1e-3, 1.0) on log-log axes") {
    RocCurve perfect;
    perfect.points = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    Plot plot = roc_plot(perfect);
    std::string svg = svg_string(plot);
    CHECK(svg.find("<polyline") != std::string::npos);

    // the (clamped 0, 1.0) -> (1.0, 1.0) segment is horizontal, so the pixel
    // of (1e-3, 1.0) must share its y and sit strictly between the endpoints
    auto [bx, by] = svg_point_px(plot, plot.log_floor, 1.0);
    auto [cx, cy] = svg_point_px(plot, 1.0, 1.0);
    auto [px, py] = svg_point_px(plot, 1e-3, 1.0);
    CHECK(py == doctest::Approx(by).epsilon(1e-12));
    CHECK(py == doctest::Approx(cy).epsilon(1e-12));
    CHECK(px > bx);
    CHECK(px < cx);

    // the rendered polyline contains both endpoints at 2-decimal precision
    auto px2 = [](double v) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(2) << v;
        return os.str();
    };
    CHECK(svg.find(px2(bx) + "," + px2(by)) != std::string::npos);
    CHECK(svg.find(px2(cx) + "," + px2(cy)) != std::string::npos);
    // log-x spacing: 1e-3 sits a quarter of the way from 1e-4 to 1, not linearly
    double frac = (px - bx) / (cx - bx);
    CHECK(frac == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("linear plot geometry is affine in the data") {
    Plot plot;
    plot.title = "t";
    plot.series = {{"s", {{0.0, 0.0}, {1.0, 2.0}, {2.0, 4.0}}}};
    auto [x0, y0] = svg_point_px(plot, 0.0, 0.0);
    auto [x1, y1] = svg_point_px(plot, 1.0, 2.0);
    auto [x2, y2] = svg_point_px(plot, 2.0, 4.0);
    CHECK(x1 - x0 == doctest::Approx(x2 - x1).epsilon(1e-12));
    CHECK(y0 - y1 == doctest::Approx(y1 - y2).epsilon(1e-12)); // y grows upward
    CHECK(y0 > y2);
}

TEST_CASE("bound command: example value, exit codes, manifest, reproducibility") {
    fs::path dir = fresh_dir("cli_bound");
    spit(dir / "cfg.json",
         "{\"bound\": {\"log_cardinality\": 1.0, \"delta\": 0.36787944117144233,"
         " \"sample_size\": 2, \"trials\": 50}}");

    std::vector<std::string> args = {"bound", "--config", (dir / "cfg.json").string(),
                                     "--seed", "3", "--out", (dir / "run1").string()};
    CHECK(run_cli(args) == 0);

    std::string metrics = slurp(dir / "run1" / "metrics.csv");
    // log|F| = 1, delta = e^{-1}, |S| = 2 -> sqrt((1 + 1) / 2) = 1
    CHECK(metrics.find(",1,0.1,") != std::string::npos);
    CHECK(fs::exists(dir / "run1" / "config.json"));

    // manifest hashes match the files on disk
    std::string manifest = slurp(dir / "run1" / "manifest.json");
    std::ostringstream hash;
    hash << std::hex << fnv1a_file_hash(dir / "run1" / "metrics.csv");
    CHECK(manifest.find(hash.str()) != std::string::npos);

    args.back() = (dir / "run2").string();
    CHECK(run_cli(args) == 0);
    CHECK(slurp(dir / "run1" / "metrics.csv") == slurp(dir / "run2" / "metrics.csv"));
    CHECK(slurp(dir / "run1" / "config.json") == slurp(dir / "run2" / "config.json"));

    // validation failures exit 1
    spit(dir / "bad.json", "{\"train\": {\"gamma\": -1}}");
    CHECK(run_cli({"bound", "--config", (dir / "bad.json").string(), "--out",
                   (dir / "run3").string()}) == 1);
    CHECK(run_cli({"bound", "--config", (dir / "missing.json").string(), "--out",
                   (dir / "run4").string()}) == 1);
    CHECK(run_cli({"bound"}) == 1);         // --out is required
    CHECK(run_cli({"frobnicate"}) == 1);    // unknown subcommand
    CHECK(run_cli({}) == 1);                // a subcommand is required
}

TEST_CASE("gen-task command writes parseable dataset dumps") {
    fs::path dir = fresh_dir("cli_gentask");
    spit(dir / "cfg.json",
         "{\"task\": {\"num_classes\": 2, \"components_per_class\": 1,"
         " \"train_size\": 20, \"test_size\": 10}}");
    CHECK(run_cli({"gen-task", "--config", (dir / "cfg.json").string(), "--seed", "7",
                   "--out", (dir / "run").string()}) == 0);
    std::string train = slurp(dir / "run" / "train.csv");
    CHECK(train.rfind("dim,num_classes\n2,2\n", 0) == 0);
    int lines = 0;
    for (char c : train) lines += c == '\n';
    CHECK(lines == 2 + 20);
    CHECK(fs::exists(dir / "run" / "ood.csv")); // default task carries an OOD shift
}

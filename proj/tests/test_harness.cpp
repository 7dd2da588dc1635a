#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fwrnn/harness.hpp"

using namespace fwrnn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(static_cast<bool>(is));
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// A config whose experiment finishes in well under a second.
ExperimentConfig tiny_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.dataset = "adding";
    cfg.adding_train = 40;
    cfg.adding_test = 20;
    cfg.adding_steps = 6;
    cfg.hidden = 4;
    cfg.train.optimizer = OptimizerChoice::kFw;
    cfg.train.fw.inner_steps = 2;
    cfg.train.epochs = 2;
    cfg.train.batch_size = 20;
    cfg.train.angle_subsample = 16;
    cfg.out_dir = out;
    cfg.seed = 5;
    cfg.train.seed = 5;
    return cfg;
}

/// Strips the wall_seconds column (the only nondeterministic field).
std::string strip_wall(const std::string& csv) {
    std::istringstream is(csv);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        const auto last = line.rfind(',');
        os << line.substr(0, last) << "\n";
    }
    return os.str();
}

}  // namespace

TEST_CASE("config serialization round trips every field") {
    ExperimentConfig cfg;
    cfg.dataset = "permute-mnist";
    cfg.dataset_root = "/data";
    cfg.adding_train = 123;
    cfg.adding_interval_sum = true;
    cfg.noise_variance = 0.125;
    cfg.permute_seed = 41;
    cfg.mnist_downsample = 2;
    cfg.data_seed = 17;
    cfg.cell = "indrnn";
    cfg.hidden = 80;
    cfg.layers = 3;
    cfg.train.optimizer = OptimizerChoice::kFwTbptt;
    cfg.train.lr = 6e-4;
    cfg.train.lr_decay = 0.5;
    cfg.train.lr_decay_every = 20;
    cfg.train.clip_threshold = 2.5;
    cfg.train.epochs = 7;
    cfg.train.batch_size = 256;
    cfg.train.tbptt_segment_len = 16;
    cfg.train.fw.p = kInf;
    cfg.train.fw.delta0 = 0.03;
    cfg.train.fw.inner_steps = 5;
    cfg.train.fw.eta = 0.7;
    cfg.train.fw.outer_mode = OuterMode::kPlain;
    cfg.train.fw.batch_mode = BatchMode::kFixedPerOuterStep;
    cfg.train.fw.gamma = GammaRule::kTwoOverKPlusOne;
    cfg.train.adam.beta1 = 0.85;
    cfg.train.probe_angles = false;
    cfg.train.angle_subsample = 99;
    cfg.seed = 1234;
    cfg.out_dir = "elsewhere";

    const auto back = ExperimentConfig::parse(cfg.serialize());
    CHECK(back.serialize() == cfg.serialize());
    CHECK(back.train.fw.p == kInf);
    CHECK(back.train.seed == cfg.seed);
}

TEST_CASE("config parse collects all errors with field names") {
    const std::string text =
        "fwrnn-config v1\n"
        "opt.lr = not-a-number\n"
        "bogus.key = 3\n"
        "no equals sign here\n";
    try {
        ExperimentConfig::parse(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("not-a-number") != std::string::npos);
        CHECK(msg.find("bogus.key") != std::string::npos);
        CHECK(msg.find("no equals sign") != std::string::npos);
    }
}

TEST_CASE("config rejects a missing or wrong version stamp") {
    CHECK_THROWS_AS(ExperimentConfig::parse("opt.lr = 1\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("fwrnn-config v2\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_file("/nonexistent.cfg"),
                    ConfigError);
}

TEST_CASE("config comments and blank lines are ignored") {
    const auto cfg = ExperimentConfig::parse(
        "fwrnn-config v1\n\n# a comment\nopt.epochs = 9\n");
    CHECK(cfg.train.epochs == 9);
}

TEST_CASE("metrics csv round trip") {
    std::vector<TrainRecord> recs(3);
    for (std::size_t i = 0; i < 3; ++i) {
        recs[i].epoch = i + 1;
        recs[i].train_loss = 0.1 / (i + 1.0);
        recs[i].test_metric = 0.5 + 0.1 * i;
        recs[i].lr = 1e-3;
        recs[i].delta = 0.5;
        recs[i].grad_updates = 10 * (i + 1);
        recs[i].grad_evals = 50 * (i + 1);
        recs[i].angle_mean_deg = 33.3;
        recs[i].angle_frac45 = 0.75;
        recs[i].wall_seconds = 0.01;
    }
    recs[1].angle_mean_deg = std::nan("");  // NaN column survives the trip
    const auto path = fs::temp_directory_path() / "fwrnn_metrics.csv";
    write_metrics_csv(path.string(), recs);
    const auto back = read_metrics_csv(path.string());
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].epoch == recs[i].epoch);
        CHECK(back[i].train_loss == recs[i].train_loss);
        CHECK(back[i].test_metric == recs[i].test_metric);
        CHECK(back[i].grad_evals == recs[i].grad_evals);
        CHECK(back[i].angle_frac45 == recs[i].angle_frac45);
    }
    CHECK(std::isnan(back[1].angle_mean_deg));
    // schema mismatch is detected
    {
        std::ofstream os(path);
        os << "epoch,surprise\n1,2\n";
    }
    CHECK_THROWS_WITH_AS(read_metrics_csv(path.string()),
                         doctest::Contains("schema"), std::runtime_error);
    fs::remove(path);
}

TEST_CASE("run_experiment writes every artifact deterministically") {
    const fs::path out1 = fs::temp_directory_path() / "fwrnn_exp1";
    const fs::path out2 = fs::temp_directory_path() / "fwrnn_exp2";
    fs::remove_all(out1);
    fs::remove_all(out2);

    const auto r1 = run_experiment(tiny_config(out1.string()));
    const auto r2 = run_experiment(tiny_config(out2.string()));

    for (const char* name :
         {"metrics.csv", "config.resolved", "checkpoint.bin", "checkpoint.txt",
          "curves.svg"})
        CHECK(fs::exists(out1 / name));

    CHECK(r1.records.size() == 2);
    CHECK(r1.params.flatten() == r2.params.flatten());
    CHECK(strip_wall(slurp(out1 / "metrics.csv")) ==
          strip_wall(slurp(out2 / "metrics.csv")));
    // checkpoints are byte identical
    CHECK(slurp(out1 / "checkpoint.txt") == slurp(out2 / "checkpoint.txt"));
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("svg rendering is byte deterministic and handles edge cases") {
    const fs::path dir = fs::temp_directory_path() / "fwrnn_svg";
    fs::create_directories(dir);

    std::vector<TrainRecord> one(1);
    one[0].epoch = 1;
    one[0].train_loss = 0.5;
    one[0].test_metric = 0.25;
    write_metrics_csv((dir / "one.csv").string(), one);
    const auto a = render_curves_svg({(dir / "one.csv").string()}, {"run"});
    const auto b = render_curves_svg({(dir / "one.csv").string()}, {"run"});
    CHECK(a == b);
    CHECK(a.find("<svg") == 0);
    CHECK(a.find("</svg>") != std::string::npos);

    // empty csv still yields a valid document
    write_metrics_csv((dir / "empty.csv").string(), {});
    const auto e = render_curves_svg({(dir / "empty.csv").string()}, {"none"});
    CHECK(e.find("<svg") == 0);
    CHECK(e.find("polyline") == std::string::npos);

    CHECK_THROWS_AS(render_curves_svg({(dir / "one.csv").string()}, {}),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("grid enumerates the product of axes") {
    const fs::path dir = fs::temp_directory_path() / "fwrnn_grid";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "grid.txt");
        os << "# two axes\n";
        os << "opt.lr = 0.001, 0.01\n";
        os << "fw.k = 1, 2\n";
    }
    auto base = tiny_config((dir / "out").string());
    base.train.epochs = 1;
    run_grid(base, (dir / "grid.txt").string());

    const auto summary = slurp(dir / "out" / "summary.csv");
    for (const char* cell : {"cell_000", "cell_001", "cell_002", "cell_003"}) {
        CHECK(summary.find(cell) != std::string::npos);
        CHECK(fs::exists(dir / "out" / cell / "metrics.csv"));
        CHECK(fs::exists(dir / "out" / cell / "config.resolved"));
    }
    CHECK(summary.find("cell_004") == std::string::npos);
    CHECK(summary.find("best-by-validation") != std::string::npos);
    CHECK(summary.find(",opt.lr") != std::string::npos);
    CHECK(summary.find(",fw.k") != std::string::npos);

    // the per-cell configs actually vary along the axes
    const auto c0 = slurp(dir / "out" / "cell_000" / "config.resolved");
    const auto c3 = slurp(dir / "out" / "cell_003" / "config.resolved");
    CHECK(c0.find("opt.lr = 0.001") != std::string::npos);
    CHECK(c0.find("fw.k = 1") != std::string::npos);
    CHECK(c3.find("opt.lr = 0.01") != std::string::npos);
    CHECK(c3.find("fw.k = 2") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("grid records per-cell failures without aborting the sweep") {
    const fs::path dir = fs::temp_directory_path() / "fwrnn_grid_fail";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "grid.txt");
        os << "fw.delta0 = 0.5, 0\n";  // the second cell cannot validate
    }
    auto base = tiny_config((dir / "out").string());
    base.train.epochs = 1;
    run_grid(base, (dir / "grid.txt").string());
    const auto summary = slurp(dir / "out" / "summary.csv");
    CHECK(summary.find("cell_000,ok") != std::string::npos);
    CHECK(summary.find("cell_001,failed") != std::string::npos);
    CHECK(summary.find("best-by-validation: cell_000") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("grid rerun is deterministic excluding wall time") {
    const fs::path dir = fs::temp_directory_path() / "fwrnn_grid_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "grid.txt");
        os << "fw.k = 1, 3\n";
    }
    auto base1 = tiny_config((dir / "out1").string());
    base1.train.epochs = 1;
    auto base2 = tiny_config((dir / "out2").string());
    base2.train.epochs = 1;
    run_grid(base1, (dir / "grid.txt").string());
    run_grid(base2, (dir / "grid.txt").string());
    CHECK(slurp(dir / "out1" / "summary.csv") ==
          slurp(dir / "out2" / "summary.csv"));
    for (const char* cell : {"cell_000", "cell_001"})
        CHECK(strip_wall(slurp(dir / "out1" / cell / "metrics.csv")) ==
              strip_wall(slurp(dir / "out2" / cell / "metrics.csv")));
    fs::remove_all(dir);
}

TEST_CASE("degenerate one-point grid matches a direct run") {
    const fs::path dir = fs::temp_directory_path() / "fwrnn_grid_one";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "grid.txt");
        os << "opt.epochs = 1\n";
    }
    auto base = tiny_config((dir / "out").string());
    run_grid(base, (dir / "grid.txt").string());

    // reproduce the cell by hand: same overrides, seed, and 90/10 split
    ExperimentConfig cell = base;
    cell.set_key("opt.epochs", "1");
    cell.seed = Rng::split_seed(base.seed, 0);
    cell.train.seed = cell.seed;
    Dataset data = cell.load_dataset();
    Rng split_rng(Rng::split_seed(base.seed, 424242));
    const auto perm = split_rng.permutation(data.train.batch_size());
    const std::size_t n_val = std::max<std::size_t>(1, perm.size() / 10);
    Dataset d2;
    d2.num_classes = data.num_classes;
    d2.train = data.train.select(
        {perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end()});
    d2.test = data.train.select(
        {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val)});
    const SequenceModel model(cell.model_spec(d2));
    const auto direct = train(model, d2, cell.train);

    const auto cell_recs =
        read_metrics_csv((dir / "out" / "cell_000" / "metrics.csv").string());
    REQUIRE(cell_recs.size() == direct.records.size());
    CHECK(cell_recs.back().train_loss == direct.records.back().train_loss);
    CHECK(cell_recs.back().test_metric == direct.records.back().test_metric);
    fs::remove_all(dir);
}

TEST_CASE("dataset errors carry the missing path and kind") {
    ExperimentConfig cfg;
    cfg.dataset = "pixel-mnist";
    cfg.dataset_root = "/nonexistent-root";
    CHECK_THROWS_AS(cfg.load_dataset(), DataError);
    cfg.dataset = "har2";
    CHECK_THROWS_WITH_AS(cfg.load_dataset(),
                         doctest::Contains("/nonexistent-root"), DataError);
    cfg.dataset = "martian";
    CHECK_THROWS_AS(cfg.load_dataset(), ConfigError);
}

#include "fwrnn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fwrnn {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        if (s == "inf") return kInf;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("not an unsigned integer: '" + s + "'");
    }
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const char* outer_mode_name(OuterMode m) {
    return m == OuterMode::kPlain ? "plain" : "adam-fed";
}
const char* batch_mode_name(BatchMode m) {
    return m == BatchMode::kFreshPerInnerStep ? "fresh" : "fixed";
}
const char* gamma_name(GammaRule g) {
    return g == GammaRule::kOneOverK ? "1/k" : "2/(k+1)";
}

}  // namespace

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os << "fwrnn-config v1\n";
    os << "dataset.name = " << dataset << "\n";
    os << "dataset.root = " << dataset_root << "\n";
    os << "dataset.adding_train = " << adding_train << "\n";
    os << "dataset.adding_test = " << adding_test << "\n";
    os << "dataset.adding_steps = " << adding_steps << "\n";
    os << "dataset.adding_interval_sum = "
       << (adding_interval_sum ? "true" : "false") << "\n";
    os << "dataset.noise_variance = " << fmt(noise_variance) << "\n";
    os << "dataset.permute_seed = " << permute_seed << "\n";
    os << "dataset.mnist_downsample = " << mnist_downsample << "\n";
    os << "dataset.seed = " << data_seed << "\n";
    os << "model.cell = " << cell << "\n";
    os << "model.hidden = " << hidden << "\n";
    os << "model.layers = " << layers << "\n";
    os << "opt.name = " << optimizer_name(train.optimizer) << "\n";
    os << "opt.lr = " << fmt(train.lr) << "\n";
    os << "opt.lr_decay = " << fmt(train.lr_decay) << "\n";
    os << "opt.lr_decay_every = " << train.lr_decay_every << "\n";
    os << "opt.clip_threshold = " << fmt(train.clip_threshold) << "\n";
    os << "opt.epochs = " << train.epochs << "\n";
    os << "opt.batch_size = " << train.batch_size << "\n";
    os << "opt.tbptt_segment_len = " << train.tbptt_segment_len << "\n";
    os << "fw.p = " << (std::isinf(train.fw.p) ? "inf" : fmt(train.fw.p)) << "\n";
    os << "fw.delta0 = " << fmt(train.fw.delta0) << "\n";
    os << "fw.k = " << train.fw.inner_steps << "\n";
    os << "fw.eta = " << fmt(train.fw.eta) << "\n";
    os << "fw.outer_mode = " << outer_mode_name(train.fw.outer_mode) << "\n";
    os << "fw.batch_mode = " << batch_mode_name(train.fw.batch_mode) << "\n";
    os << "fw.gamma = " << gamma_name(train.fw.gamma) << "\n";
    os << "adam.beta1 = " << fmt(train.adam.beta1) << "\n";
    os << "adam.beta2 = " << fmt(train.adam.beta2) << "\n";
    os << "adam.epsilon = " << fmt(train.adam.epsilon) << "\n";
    os << "probe.angles = " << (train.probe_angles ? "true" : "false") << "\n";
    os << "probe.subsample = " << train.angle_subsample << "\n";
    os << "seed = " << seed << "\n";
    os << "out_dir = " << out_dir << "\n";
    return os.str();
}

void ExperimentConfig::set_key(const std::string& key, const std::string& value) {
    if (key == "dataset.name") dataset = value;
    else if (key == "dataset.root") dataset_root = value;
    else if (key == "dataset.adding_train") adding_train = parse_u64(value);
    else if (key == "dataset.adding_test") adding_test = parse_u64(value);
    else if (key == "dataset.adding_steps") adding_steps = parse_u64(value);
    else if (key == "dataset.adding_interval_sum")
        adding_interval_sum = parse_bool(value);
    else if (key == "dataset.noise_variance") noise_variance = parse_double(value);
    else if (key == "dataset.permute_seed") permute_seed = parse_u64(value);
    else if (key == "dataset.mnist_downsample") mnist_downsample = parse_u64(value);
    else if (key == "dataset.seed") data_seed = parse_u64(value);
    else if (key == "model.cell") cell = value;
    else if (key == "model.hidden") hidden = parse_u64(value);
    else if (key == "model.layers") layers = parse_u64(value);
    else if (key == "opt.name") train.optimizer = optimizer_from_name(value);
    else if (key == "opt.lr") train.lr = parse_double(value);
    else if (key == "opt.lr_decay") train.lr_decay = parse_double(value);
    else if (key == "opt.lr_decay_every") train.lr_decay_every = parse_u64(value);
    else if (key == "opt.clip_threshold") train.clip_threshold = parse_double(value);
    else if (key == "opt.epochs") train.epochs = parse_u64(value);
    else if (key == "opt.batch_size") train.batch_size = parse_u64(value);
    else if (key == "opt.tbptt_segment_len")
        train.tbptt_segment_len = parse_u64(value);
    else if (key == "fw.p") train.fw.p = parse_double(value);
    else if (key == "fw.delta0") train.fw.delta0 = parse_double(value);
    else if (key == "fw.k") train.fw.inner_steps = parse_u64(value);
    else if (key == "fw.eta") train.fw.eta = parse_double(value);
    else if (key == "fw.outer_mode") {
        if (value == "plain") train.fw.outer_mode = OuterMode::kPlain;
        else if (value == "adam-fed") train.fw.outer_mode = OuterMode::kAdamFed;
        else throw ConfigError("fw.outer_mode must be plain|adam-fed, got " + value);
    } else if (key == "fw.batch_mode") {
        if (value == "fresh") train.fw.batch_mode = BatchMode::kFreshPerInnerStep;
        else if (value == "fixed") train.fw.batch_mode = BatchMode::kFixedPerOuterStep;
        else throw ConfigError("fw.batch_mode must be fresh|fixed, got " + value);
    } else if (key == "fw.gamma") {
        if (value == "1/k") train.fw.gamma = GammaRule::kOneOverK;
        else if (value == "2/(k+1)") train.fw.gamma = GammaRule::kTwoOverKPlusOne;
        else throw ConfigError("fw.gamma must be 1/k|2/(k+1), got " + value);
    } else if (key == "adam.beta1") train.adam.beta1 = parse_double(value);
    else if (key == "adam.beta2") train.adam.beta2 = parse_double(value);
    else if (key == "adam.epsilon") train.adam.epsilon = parse_double(value);
    else if (key == "probe.angles") train.probe_angles = parse_bool(value);
    else if (key == "probe.subsample") train.angle_subsample = parse_u64(value);
    else if (key == "seed") { seed = parse_u64(value); train.seed = seed; }
    else if (key == "out_dir") out_dir = value;
    else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "fwrnn-config v1")
        throw ConfigError("config must start with 'fwrnn-config v1'");
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("malformed line: " + t);
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            cfg.set_key(key, value);
        } catch (const std::exception& e) {
            errors.push_back(std::string(e.what()));
        }
    }
    if (!errors.empty()) {
        std::string msg = "config errors:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    cfg.train.seed = cfg.seed;
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return parse(os.str());
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << serialize();
}

ModelSpec ExperimentConfig::model_spec(const Dataset& data) const {
    ModelSpec spec;
    if (cell == "vanilla") spec.cell = CellType::kVanilla;
    else if (cell == "indrnn") spec.cell = CellType::kIndRnn;
    else throw ConfigError("model.cell must be vanilla|indrnn, got " + cell);
    spec.hidden_dim = hidden;
    spec.layers = layers;
    spec.input_dim = data.train.input_dim();
    spec.task = data.train.task;
    spec.output_dim =
        data.train.task == TaskKind::kMultiClass ? data.num_classes : 1;
    return spec;
}

Dataset ExperimentConfig::load_dataset() const {
    try {
        if (dataset == "adding")
            return make_adding_dataset(adding_train, adding_test, adding_steps,
                                       data_seed, adding_interval_sum);
        if (dataset == "pixel-mnist")
            return load_mnist_pixel(dataset_root + "/mnist", {}, mnist_downsample);
        if (dataset == "permute-mnist")
            return load_mnist_pixel(dataset_root + "/mnist", permute_seed,
                                    mnist_downsample);
        if (dataset == "har2")
            return load_har2(dataset_root + "/UCI HAR Dataset");
        if (dataset == "noisy-har2") {
            Dataset d = load_har2(dataset_root + "/UCI HAR Dataset");
            Rng noise_rng(Rng::split_seed(data_seed, 20));
            d.train = add_gaussian_noise(d.train, noise_variance, noise_rng);
            d.test = add_gaussian_noise(d.test, noise_variance, noise_rng);
            d.name = "noisy-har2";
            d.metadata += "; noise_variance=" + fmt(noise_variance);
            return d;
        }
    } catch (const std::runtime_error& e) {
        throw DataError(e.what());
    }
    throw ConfigError("unknown dataset: " + dataset);
}

const char* const kMetricsHeader =
    "epoch,train_loss,test_metric,lr,delta,grad_updates,grad_evals,"
    "angle_mean_deg,angle_frac45,wall_seconds";

void write_metrics_csv(const std::string& path,
                       const std::vector<TrainRecord>& records) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << kMetricsHeader << "\n";
    for (const auto& r : records) {
        os << r.epoch << "," << fmt(r.train_loss) << "," << fmt(r.test_metric)
           << "," << fmt(r.lr) << "," << fmt(r.delta) << "," << r.grad_updates
           << "," << r.grad_evals << "," << fmt(r.angle_mean_deg) << ","
           << fmt(r.angle_frac45) << "," << fmt(r.wall_seconds) << "\n";
    }
}

std::vector<TrainRecord> read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || trim(line) != kMetricsHeader)
        throw std::runtime_error("metrics schema mismatch in " + path);
    std::vector<TrainRecord> out;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 10)
            throw std::runtime_error("bad metrics row in " + path);
        TrainRecord r;
        r.epoch = parse_u64(fields[0]);
        r.train_loss = std::stod(fields[1]);
        r.test_metric = std::stod(fields[2]);
        r.lr = std::stod(fields[3]);
        r.delta = std::stod(fields[4]);
        r.grad_updates = parse_u64(fields[5]);
        r.grad_evals = parse_u64(fields[6]);
        r.angle_mean_deg = std::stod(fields[7]);
        r.angle_frac45 = std::stod(fields[8]);
        r.wall_seconds = std::stod(fields[9]);
        out.push_back(r);
    }
    return out;
}

TrainResult run_experiment(const ExperimentConfig& cfg) {
    const Dataset data = cfg.load_dataset();
    const SequenceModel model(cfg.model_spec(data));

    std::filesystem::create_directories(cfg.out_dir);
    cfg.save(cfg.out_dir + "/config.resolved");

    TrainResult result = train(model, data, cfg.train);

    write_metrics_csv(cfg.out_dir + "/metrics.csv", result.records);
    result.params.save(cfg.out_dir + "/checkpoint.bin");
    result.params.dump_text(cfg.out_dir + "/checkpoint.txt");
    std::ofstream svg(cfg.out_dir + "/curves.svg");
    svg << render_curves_svg({cfg.out_dir + "/metrics.csv"}, {cfg.dataset});
    return result;
}

void run_grid(const ExperimentConfig& base, const std::string& grid_path) {
    std::ifstream is(grid_path);
    if (!is) throw ConfigError("cannot open grid file " + grid_path);
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("malformed grid line: " + t);
        const std::string key = trim(t.substr(0, eq));
        std::vector<std::string> values;
        std::istringstream vs(t.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, ',')) values.push_back(trim(v));
        if (values.empty()) throw ConfigError("empty grid axis: " + key);
        axes.emplace_back(key, values);
    }

    std::size_t cells = 1;
    for (const auto& [k, vs] : axes) cells *= vs.size();

    std::filesystem::create_directories(base.out_dir);
    std::ofstream summary(base.out_dir + "/summary.csv");
    summary << "cell,status,val_metric,final_train_loss";
    for (const auto& [k, vs] : axes) summary << "," << k;
    summary << "\n";

    std::size_t best_cell = 0;
    double best_metric = -kInf;
    bool any_ok = false;

    for (std::size_t idx = 0; idx < cells; ++idx) {
        ExperimentConfig cfg = base;
        std::vector<std::string> cell_values;
        std::size_t rem = idx;
        for (const auto& [key, values] : axes) {
            const std::string& value = values[rem % values.size()];
            rem /= values.size();
            cfg.set_key(key, value);
            cell_values.push_back(value);
        }
        char cell_name[32];
        std::snprintf(cell_name, sizeof cell_name, "cell_%03zu", idx);
        cfg.out_dir = base.out_dir + "/" + cell_name;
        cfg.seed = Rng::split_seed(base.seed, idx);
        cfg.train.seed = cfg.seed;

        std::string status = "ok";
        double val_metric = std::numeric_limits<double>::quiet_NaN();
        double final_loss = std::numeric_limits<double>::quiet_NaN();
        try {
            Dataset data = cfg.load_dataset();
            // hold out 10% of training data for selection
            Rng split_rng(Rng::split_seed(base.seed, 424242));
            const auto perm = split_rng.permutation(data.train.batch_size());
            const std::size_t n_val = std::max<std::size_t>(1, perm.size() / 10);
            std::vector<std::size_t> val_rows(perm.begin(),
                                              perm.begin() + static_cast<std::ptrdiff_t>(n_val));
            std::vector<std::size_t> tr_rows(perm.begin() + static_cast<std::ptrdiff_t>(n_val),
                                             perm.end());
            Dataset cell_data;
            cell_data.name = data.name;
            cell_data.num_classes = data.num_classes;
            cell_data.metadata = data.metadata + "; grid 90/10 validation split";
            cell_data.train = data.train.select(tr_rows);
            cell_data.test = data.train.select(val_rows);

            const SequenceModel model(cfg.model_spec(cell_data));
            std::filesystem::create_directories(cfg.out_dir);
            cfg.save(cfg.out_dir + "/config.resolved");
            TrainResult res = train(model, cell_data, cfg.train);
            write_metrics_csv(cfg.out_dir + "/metrics.csv", res.records);
            if (!res.records.empty()) {
                val_metric = res.records.back().test_metric;
                final_loss = res.records.back().train_loss;
            }
            // lower is better for regression, higher for accuracy
            const double score = cell_data.train.task == TaskKind::kRegression
                                     ? -val_metric
                                     : val_metric;
            if (!any_ok || score > best_metric) {
                best_metric = score;
                best_cell = idx;
                any_ok = true;
            }
        } catch (const std::exception& e) {
            status = "failed: ";
            status += e.what();
            for (char& ch : status)
                if (ch == ',' || ch == '\n') ch = ';';
        }
        summary << cell_name << "," << status << "," << fmt(val_metric) << ","
                << fmt(final_loss);
        for (const auto& v : cell_values) summary << "," << v;
        summary << "\n";
    }
    if (any_ok) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "cell_%03zu", best_cell);
        summary << "# best-by-validation: " << buf << "\n";
    }
}

namespace {

struct Series {
    std::string label;
    std::vector<double> epochs, loss, metric;
};

void render_panel(std::ostringstream& os, const std::vector<Series>& series,
                  double x0, const std::string& title, bool use_metric) {
    const double w = 380, h = 280, pad = 45;
    os << "<g transform=\"translate(" << fmt6(x0) << ",0)\">\n";
    os << "<rect x=\"" << pad << "\" y=\"20\" width=\"" << w - pad - 10
       << "\" height=\"" << h - pad - 20
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"14\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"12\">"
       << title << "</text>\n";

    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (const auto& s : series) {
        const auto& ys = use_metric ? s.metric : s.loss;
        for (std::size_t i = 0; i < s.epochs.size(); ++i) {
            if (!std::isfinite(ys[i])) continue;
            xmin = std::min(xmin, s.epochs[i]);
            xmax = std::max(xmax, s.epochs[i]);
            ymin = std::min(ymin, ys[i]);
            ymax = std::max(ymax, ys[i]);
        }
    }
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    if (std::isfinite(xmin)) {
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;
        std::size_t ci = 0;
        for (const auto& s : series) {
            const auto& ys = use_metric ? s.metric : s.loss;
            std::ostringstream pts;
            for (std::size_t i = 0; i < s.epochs.size(); ++i) {
                if (!std::isfinite(ys[i])) continue;
                const double px =
                    pad + (s.epochs[i] - xmin) / (xmax - xmin) * (w - pad - 10);
                const double py =
                    (h - pad) - (ys[i] - ymin) / (ymax - ymin) * (h - pad - 20);
                pts << fmt6(px) << "," << fmt6(py) << " ";
            }
            const char* color = kColors[ci % 6];
            os << "<polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
            os << "<text x=\"" << pad + 8 << "\" y=\"" << 36 + 14 * ci
               << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
               << color << "\">" << s.label << "</text>\n";
            ++ci;
        }
        os << "<text x=\"" << pad << "\" y=\"" << h - pad + 14
           << "\" font-family=\"sans-serif\" font-size=\"10\">epoch "
           << fmt6(xmin) << ".." << fmt6(xmax) << ", y " << fmt6(ymin) << ".."
           << fmt6(ymax) << "</text>\n";
    }
    os << "</g>\n";
}

}  // namespace

std::string render_curves_svg(const std::vector<std::string>& csv_paths,
                              const std::vector<std::string>& labels) {
    if (csv_paths.size() != labels.size())
        throw std::invalid_argument("render_curves_svg: labels/paths mismatch");
    std::vector<Series> series;
    for (std::size_t i = 0; i < csv_paths.size(); ++i) {
        Series s;
        s.label = labels[i];
        for (const auto& r : read_metrics_csv(csv_paths[i])) {
            s.epochs.push_back(static_cast<double>(r.epoch));
            s.loss.push_back(r.train_loss);
            s.metric.push_back(r.test_metric);
        }
        series.push_back(std::move(s));
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"780\" "
          "height=\"300\" viewBox=\"0 0 780 300\">\n";
    render_panel(os, series, 0, "train loss", false);
    render_panel(os, series, 390, "test metric", true);
    os << "</svg>\n";
    return os.str();
}

}  // namespace fwrnn

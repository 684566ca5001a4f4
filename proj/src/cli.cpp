#include "odcsr/cli.hpp"

#include "odcsr/baselines.hpp"
#include "odcsr/cascade.hpp"
#include "odcsr/errors.hpp"
#include "odcsr/evaluation.hpp"
#include "odcsr/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace odcsr::cli {

namespace {

struct InputFlags {
    std::string path;
    std::string format;
    bool header = false;
    bool cols_are_points = false;
    bool no_normalize = false;

    void add_to(CLI::App& app) {
        app.add_option("--input,-i", path, "data matrix (CSV or binary)");
        app.add_option("--format", format, "csv | bin (default: from extension)");
        app.add_flag("--header", header, "CSV has a single header row");
        app.add_flag("--cols-are-points", cols_are_points, "file columns are points");
        app.add_flag("--no-normalize", no_normalize, "skip unit-normalization of columns");
    }

    MatrixFormat resolved_format() const {
        return format.empty() ? format_from_path(path) : parse_format(format);
    }
};

struct SolverFlags {
    double lambda = 0.9;
    double alpha = 5.0;
    std::optional<double> gamma;
    int max_iters = 2000;
    double tol = 1e-6;
    int walk_steps = 1000;
    int stages = 3;
    std::string fusion = "mean";
    std::vector<double> weights;
    bool raw_residuals = false;
    unsigned threads = 0;

    void add_to(CLI::App& app, bool with_fusion) {
        app.add_option("--stages", stages, "number of cascade stages")->capture_default_str();
        app.add_option("--walk-steps", walk_steps, "random-walk steps T")->capture_default_str();
        app.add_option("--lambda", lambda, "l1/l2 mix in [0,1)")->capture_default_str();
        app.add_option("--alpha", alpha, "relative gamma factor (> 1)")->capture_default_str();
        app.add_option("--gamma", gamma, "fixed gamma (overrides --alpha)");
        app.add_option("--max-iters", max_iters, "solver iteration cap")->capture_default_str();
        app.add_option("--tol", tol, "relative KKT tolerance")->capture_default_str();
        if (with_fusion) {
            app.add_option("--fusion", fusion, "mean | weighted")->capture_default_str();
            app.add_option("--weights", weights, "per-stage fusion weights")->delimiter(',');
        }
        app.add_flag("--raw-residuals", raw_residuals,
                     "feed residuals to later stages without unit-normalizing columns");
        app.add_option("--threads", threads, "solver threads (0 = all cores)")->capture_default_str();
    }

    ElasticNetConfig en_config() const {
        ElasticNetConfig en;
        en.lambda = lambda;
        en.max_iters = max_iters;
        en.tol = tol;
        if (gamma) en.gamma_mode = FixedGamma{*gamma};
        else en.gamma_mode = RelativeGamma{alpha};
        return en;
    }

    CascadeConfig cascade_config() const {
        CascadeConfig cfg;
        cfg.num_stages = stages;
        cfg.walk_steps = walk_steps;
        cfg.en_config = en_config();
        cfg.renormalize_residuals = !raw_residuals;
        if (fusion == "weighted") cfg.fusion = WeightedFusion{weights};
        else if (fusion != "mean") throw ConfigError("unknown fusion: " + fusion);
        else if (!weights.empty()) throw ConfigError("--weights requires --fusion weighted");
        cfg.validate();
        return cfg;
    }
};

struct LoadedInput {
    DataMatrix data;
    std::vector<Index> zero_columns;
};

LoadedInput load_input(const InputFlags& in, std::ostream& err) {
    if (in.path.empty()) throw IoError("--input is required");
    DataMatrix raw = load_matrix(in.path, in.resolved_format(), !in.cols_are_points,
                                 CsvOptions{in.header});
    if (in.no_normalize) return {std::move(raw), {}};
    auto norm = normalize_columns(raw);
    for (auto j : norm.zero_columns) {
        err << "warning: column " << norm.data.id(j) << " is all zeros\n";
    }
    return {std::move(norm.data), std::move(norm.zero_columns)};
}

void record_input(Manifest& m, const InputFlags& in, const LoadedInput& loaded) {
    m.set("input", in.path);
    m.set("format", std::string(in.resolved_format() == MatrixFormat::csv ? "csv" : "bin"));
    m.set("header", in.header);
    m.set("cols_are_points", in.cols_are_points);
    m.set("normalize_input", !in.no_normalize);
    m.set("dim", static_cast<long long>(loaded.data.dim()));
    m.set("points", static_cast<long long>(loaded.data.num_points()));
    m.set("zero_columns", static_cast<long long>(loaded.zero_columns.size()));
}

LabelVector load_matching_labels(const std::string& path, Index n) {
    if (path.empty()) throw IoError("labels file is required");
    if (!fs::exists(path)) throw IoError("labels file not found: " + path);
    auto labels = load_labels(path);
    if (Index(labels.size()) != n) {
        throw DimensionError("labels file has " + std::to_string(labels.size()) +
                             " entries, data has " + std::to_string(n) + " points");
    }
    return labels;
}

int cmd_detect(const InputFlags& in, const SolverFlags& sf, const std::string& out_dir,
               const std::string& labels_path, std::optional<double> epsilon, bool strict,
               std::ostream& out, std::ostream& err) {
    const CascadeConfig cfg = sf.cascade_config();
    if (out_dir.empty()) throw IoError("--out is required");
    const auto loaded = load_input(in, err);
    const auto& x = loaded.data;
    std::optional<LabelVector> labels;
    if (!labels_path.empty()) labels = load_matching_labels(labels_path, x.num_points());

    const CascadeResult result = run_cascade(x, cfg, sf.threads);
    const double eps = epsilon.value_or(1e-4 / double(x.num_points()));

    Manifest m;
    m.set("command", std::string("detect"));
    m.set("method", std::string(cfg.num_stages == 1 ? "rgraph" : "odcsr"));
    record_input(m, in, loaded);
    m.set("epsilon", eps);
    m.set("strict", strict);
    m.set("threads", static_cast<long long>(sf.threads));
    write_cascade_result(out_dir, result, x.point_ids(), m);

    const LabelVector predicted = classify(result.fused, eps);
    save_labels(fs::path(out_dir) / "predicted_labels.txt", predicted);
    out << "stages=" << cfg.num_stages << " points=" << x.num_points()
        << " predicted_outliers=" << count_outliers(predicted) << '\n';

    if (labels) {
        const EvalReport report = f1_at_count(result.fused.probs(), *labels, Polarity::low_is_outlier);
        {
            std::ofstream kv(fs::path(out_dir) / "eval.txt");
            kv << report.to_key_value();
            std::ofstream csv(fs::path(out_dir) / "eval.csv");
            csv << EvalReport::csv_header() << '\n' << report.to_csv_row() << '\n';
        }
        out << "auc=" << format_double(report.auc) << " f1=" << format_double(report.f1) << '\n';
    }

    if (!result.all_converged()) {
        for (std::size_t i = 0; i < result.stages.size(); ++i) {
            const auto& nc = result.stages[i].representation.nonconverged;
            if (!nc.empty()) {
                err << (strict ? "error" : "warning") << ": stage " << i + 1 << ": " << nc.size()
                    << " column(s) did not reach the KKT tolerance\n";
            }
        }
        if (strict) return kExitNonConverged;
    }
    return kExitOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& matrix_out, std::string labels_out,
              const std::string& membership_out, const std::string& format, bool cols_are_points,
              std::ostream& out) {
    spec.validate();
    const auto fmt = format.empty() ? format_from_path(matrix_out) : parse_format(format);
    if (labels_out.empty()) {
        fs::path p(matrix_out);
        labels_out = (p.parent_path() / (p.stem().string() + ".labels.txt")).string();
    }
    const auto synth = generate_synthetic(spec);
    save_matrix(matrix_out, fmt, synth.data.values(), !cols_are_points);
    save_labels(labels_out, synth.labels);
    if (!membership_out.empty()) {
        std::ofstream mem(membership_out);
        if (!mem) throw IoError("cannot write " + membership_out);
        for (int g : synth.membership) mem << g << '\n';
    }
    out << "wrote " << synth.data.num_points() << " points (" << spec.num_outliers
        << " outliers) to " << matrix_out << " and labels to " << labels_out << '\n';
    return kExitOk;
}

int cmd_bench(const InputFlags& in, const SolverFlags& sf, const std::string& labels_path,
              const std::string& out_path, const std::vector<std::string>& methods,
              std::ostream& out, std::ostream& err) {
    CascadeConfig cfg = sf.cascade_config();
    for (const auto& name : methods) {
        if (name != "odcsr" && name != "rgraph" && name != "l1th") {
            throw ConfigError("unknown method: " + name);
        }
    }
    const auto loaded = load_input(in, err);
    const auto& x = loaded.data;
    const LabelVector labels = load_matching_labels(labels_path, x.num_points());

    std::ostringstream csv;
    csv << "method,stages," << EvalReport::csv_header() << '\n';
    auto emit = [&](const std::string& method, int stages, const Eigen::VectorXd& scores,
                    Polarity polarity) {
        const auto report = f1_at_count(scores, labels, polarity);
        csv << method << ',' << stages << ',' << report.to_csv_row() << '\n';
    };

    auto has = [&](const char* name) {
        return std::find(methods.begin(), methods.end(), name) != methods.end();
    };
    if (has("odcsr")) {
        // Stages never look ahead, so the n-stage run contains every shorter
        // cascade as a prefix.
        const auto full = run_cascade(x, cfg, sf.threads);
        std::vector<ScoreVector> prefix;
        for (int k = 1; k <= cfg.num_stages; ++k) {
            prefix.push_back(full.stages[std::size_t(k - 1)].scores);
            const ScoreVector fused = fuse_scores(prefix, UniformMeanFusion{});
            emit("odcsr", k, fused.probs(), Polarity::low_is_outlier);
        }
    }
    if (has("rgraph")) {
        CascadeConfig single = cfg;
        single.num_stages = 1;
        single.fusion = UniformMeanFusion{};
        emit("rgraph", 1, run_cascade(x, single, sf.threads).fused.probs(),
             Polarity::low_is_outlier);
    }
    if (has("l1th")) {
        ElasticNetConfig l1 = l1_threshold_preset();
        l1.gamma_mode = cfg.en_config.gamma_mode;
        l1.max_iters = cfg.en_config.max_iters;
        l1.tol = cfg.en_config.tol;
        emit("l1th", 1, l1_thresholding_scores(x, l1, sf.threads), kL1ThresholdPolarity);
    }

    if (out_path.empty()) {
        out << csv.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw IoError("cannot write " + out_path);
        f << csv.str();
        out << "wrote " << out_path << '\n';
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Outlier detection by cascaded elastic-net self-representation"};
    app.name("odcsr");
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "score points and write a run directory");
    InputFlags detect_in;
    SolverFlags detect_solver;
    std::string detect_out, detect_labels;
    std::optional<double> epsilon;
    bool strict = false;
    detect_in.add_to(*detect);
    detect_solver.add_to(*detect, true);
    detect->add_option("--out,-o", detect_out, "run directory");
    detect->add_option("--labels", detect_labels, "ground-truth labels (0/1 per line)");
    detect->add_option("--epsilon", epsilon, "outlier threshold on fused scores (default 1e-4/N)");
    detect->add_flag("--strict", strict, "exit 3 when any column fails to converge");

    // synth
    auto* synth = app.add_subcommand("synth", "generate union-of-subspaces data");
    SyntheticSpec spec;
    std::string synth_out = "synth.csv", synth_labels, synth_membership, synth_format;
    bool synth_cols = false;
    synth->add_option("--dim", spec.ambient_dim, "ambient dimension D")->capture_default_str();
    synth->add_option("--subspaces", spec.num_subspaces, "number of subspaces K")->capture_default_str();
    synth->add_option("--subdim", spec.subspace_dim, "subspace dimension d")->capture_default_str();
    synth->add_option("--inliers", spec.inliers_per_subspace, "inliers per subspace")->capture_default_str();
    synth->add_option("--outliers", spec.num_outliers, "number of outliers")->capture_default_str();
    synth->add_option("--noise", spec.noise_sigma, "inlier noise sigma")->capture_default_str();
    synth->add_option("--seed", spec.rng_seed, "RNG seed")->capture_default_str();
    synth->add_option("--out,-o", synth_out, "matrix output path")->capture_default_str();
    synth->add_option("--labels-out", synth_labels, "labels path (default <stem>.labels.txt)");
    synth->add_option("--membership-out", synth_membership, "subspace index per point (-1 = outlier)");
    synth->add_option("--format", synth_format, "csv | bin (default: from extension)");
    synth->add_flag("--cols-are-points", synth_cols, "write one point per column");

    // bench
    auto* bench = app.add_subcommand("bench", "AUC/F1 sweep over methods and stage counts");
    InputFlags bench_in;
    SolverFlags bench_solver;
    std::string bench_labels, bench_out;
    std::vector<std::string> methods{"odcsr", "rgraph", "l1th"};
    bench_in.add_to(*bench);
    bench_solver.add_to(*bench, false);
    bench->add_option("--labels", bench_labels, "ground-truth labels (0/1 per line)");
    bench->add_option("--out,-o", bench_out, "CSV output (default stdout)");
    bench->add_option("--methods", methods, "subset of odcsr,rgraph,l1th")->delimiter(',');

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*detect) {
            return cmd_detect(detect_in, detect_solver, detect_out, detect_labels, epsilon, strict,
                              out, err);
        }
        if (*synth) {
            return cmd_synth(spec, synth_out, synth_labels, synth_membership, synth_format,
                             synth_cols, out);
        }
        return cmd_bench(bench_in, bench_solver, bench_labels, bench_out, methods, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

} // namespace odcsr::cli

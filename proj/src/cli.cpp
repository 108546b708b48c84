#include "aencmi/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aencmi/common.hpp"
#include "aencmi/dataset.hpp"
#include "aencmi/experiment.hpp"
#include "aencmi/model.hpp"
#include "aencmi/solver.hpp"
#include "aencmi/weights.hpp"

namespace aencmi::cli {

namespace {

struct RunConfig {
    std::string matrix_path;
    std::string labels_path;
    std::string model_path;
    std::string annotations_path;
    std::string out_dir = ".";
    std::string method = "aen_cmi";
    std::size_t repeats = 10;
    double split_fraction = 0.5;
    std::uint64_t seed = 1;
    Hyper hyper;
};

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

nlohmann::json config_to_json(const RunConfig& cfg, const std::string& subcommand) {
    nlohmann::json j;
    j["tool"] = "aencmi";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    nlohmann::json inputs;
    if (!cfg.matrix_path.empty()) {
        inputs["matrix"] = cfg.matrix_path;
        inputs["matrix_hash"] = file_hash_hex(cfg.matrix_path);
    }
    if (!cfg.labels_path.empty()) {
        inputs["labels"] = cfg.labels_path;
        inputs["labels_hash"] = file_hash_hex(cfg.labels_path);
    }
    if (!cfg.model_path.empty()) inputs["model"] = cfg.model_path;
    if (!cfg.annotations_path.empty()) inputs["annotations"] = cfg.annotations_path;
    j["inputs"] = std::move(inputs);

    nlohmann::json config;
    config["method"] = cfg.method;
    config["repeats"] = cfg.repeats;
    config["split_fraction"] = cfg.split_fraction;
    config["seed"] = cfg.seed;
    config["alpha"] = cfg.hyper.alpha;
    config["delta"] = cfg.hyper.delta;
    config["bins"] = cfg.hyper.bins;
    config["folds"] = cfg.hyper.folds;
    config["exclude_self"] = cfg.hyper.exclude_self;
    config["readapt"] = cfg.hyper.readapt;
    config["n_lambda"] = cfg.hyper.n_lambda;
    config["lambda_min_ratio"] = cfg.hyper.lambda_min_ratio;
    config["tolerance"] = cfg.hyper.tolerance;
    config["max_sweeps"] = cfg.hyper.max_sweeps;
    if (cfg.hyper.fixed_lambda > 0.0) config["lambda"] = cfg.hyper.fixed_lambda;
    j["config"] = std::move(config);
    return j;
}

void write_manifest(const RunConfig& cfg, const std::string& subcommand) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / "run_manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << config_to_json(cfg, subcommand).dump(2) << '\n';
}

std::vector<std::size_t> all_samples(const ExpressionDataset& ds) {
    std::vector<std::size_t> idx(ds.n_samples);
    for (std::size_t i = 0; i < ds.n_samples; ++i) idx[i] = i;
    return idx;
}

void add_hyper_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--alpha", cfg.hyper.alpha, "Elastic-net mix in (0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--delta", cfg.hyper.delta, "Weight threshold, w = 1/(s+delta)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--bins", cfg.hyper.bins, "Equal-frequency bins per feature")
        ->check(CLI::Range(2, 255))
        ->capture_default_str();
    cmd->add_option("--folds", cfg.hyper.folds, "Cross-validation folds")
        ->check(CLI::Range(2, 1000000))
        ->capture_default_str();
    cmd->add_flag("--exclude-self", cfg.hyper.exclude_self,
                  "Drop the j == k term from the significance sum");
    cmd->add_option("--readapt", cfg.hyper.readapt, "Weight re-estimation passes on the previous support")
        ->check(CLI::Range(1, 100))
        ->capture_default_str();
    cmd->add_option("--n-lambda", cfg.hyper.n_lambda, "Lambda grid size")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    cmd->add_option("--lambda-min-ratio", cfg.hyper.lambda_min_ratio, "Grid floor as fraction of lambda_max")
        ->check(CLI::Range(1e-12, 0.999999))
        ->capture_default_str();
    cmd->add_option("--tol", cfg.hyper.tolerance, "Max coefficient change per sweep at convergence")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-sweeps", cfg.hyper.max_sweeps, "Sweep budget per fit")
        ->check(CLI::Range(1, 100000000))
        ->capture_default_str();
    cmd->add_option("--threads", cfg.hyper.threads, "Worker threads (0 = hardware); outputs do not depend on it")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Base seed; all randomness derives from it")->capture_default_str();
    cmd->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
}

void add_data_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--matrix", cfg.matrix_path, "Expression matrix CSV")->required();
    cmd->add_option("--labels", cfg.labels_path, "Labels CSV (sample_id,label)")->required();
}

void add_method_option(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--method", cfg.method, "aen_cmi | elastic_net | adaptive_lasso | aen_ridge_free")
        ->check(CLI::IsMember({"aen_cmi", "elastic_net", "adaptive_lasso", "aen_ridge_free"}))
        ->capture_default_str();
}

void cmd_fit(const RunConfig& cfg) {
    const ExpressionDataset ds = load_csv(cfg.matrix_path, cfg.labels_path);
    const ModelFit fit = fit_model(ds, all_samples(ds), method_from_name(cfg.method), cfg.hyper, cfg.seed);
    std::filesystem::create_directories(cfg.out_dir);
    save_model_json(fit, (std::filesystem::path(cfg.out_dir) / "model.json").string());
    std::cout << "fit: " << fit.selected_features.size() << " features selected at lambda "
              << format_double(fit.chosen_lambda) << "\n";
}

void cmd_cv(const RunConfig& cfg) {
    const ExpressionDataset ds = load_csv(cfg.matrix_path, cfg.labels_path);
    const CvResult cv = cross_validate(ds, all_samples(ds), method_from_name(cfg.method), cfg.hyper, cfg.seed);
    std::filesystem::create_directories(cfg.out_dir);
    emit_error_curve(cv, (std::filesystem::path(cfg.out_dir) / "cv_curve.csv").string());

    nlohmann::json j;
    j["chosen_lambda"] = cv.chosen_lambda;
    j["chosen_index"] = cv.chosen_index;
    j["folds"] = cv.folds;
    j["seed"] = cv.seed;
    j["min_mean_misclassified"] = cv.mean_misclassified[cv.chosen_index];
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "cv.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cv.json");
    out << j.dump(2) << '\n';
    std::cout << "cv: chose lambda " << format_double(cv.chosen_lambda) << " (mean misclassified "
              << format_double(cv.mean_misclassified[cv.chosen_index]) << ")\n";
}

void cmd_path(const RunConfig& cfg) {
    const ExpressionDataset ds = load_csv(cfg.matrix_path, cfg.labels_path);
    const auto subset = all_samples(ds);
    const Method method = method_from_name(cfg.method);
    const double alpha = method == Method::adaptive_lasso ? 1.0 : cfg.hyper.alpha;
    const std::vector<double> weights = method_weights(ds, subset, method, cfg.hyper, cfg.seed);
    const StandardizedView view = standardize(ds, subset);
    std::vector<double> retained;
    for (std::size_t j : view.retained_features) retained.push_back(weights[j]);
    const PathFit path = fit_path(view.columns, view.response, alpha, retained, cfg.hyper.n_lambda,
                                  cfg.hyper.lambda_min_ratio, cfg.hyper.tolerance, cfg.hyper.max_sweeps);

    // Standardized-scale coefficient paths for every feature that is active
    // anywhere on the grid.
    std::vector<std::size_t> ever_active;
    for (std::size_t c = 0; c < view.retained_features.size(); ++c) {
        for (const auto& fit : path.fits) {
            if (fit.beta[c] != 0.0) {
                ever_active.push_back(c);
                break;
            }
        }
    }
    std::filesystem::create_directories(cfg.out_dir);
    const auto csv_path = std::filesystem::path(cfg.out_dir) / "path.csv";
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "lambda,feature_id,coefficient\n";
    for (std::size_t li = 0; li < path.lambdas.size(); ++li) {
        for (std::size_t c : ever_active) {
            out << format_double(path.lambdas[li]) << ',' << ds.feature_ids[view.retained_features[c]] << ','
                << format_double(path.fits[li].beta[c]) << '\n';
        }
    }
    std::cout << "path: " << path.lambdas.size() << " lambdas, " << ever_active.size()
              << " features active somewhere\n";
}

void cmd_predict(const RunConfig& cfg) {
    const ModelFit fit = load_model_json(cfg.model_path);
    const MatrixCsv m = load_matrix_csv(cfg.matrix_path);
    if (m.feature_ids != fit.feature_ids) {
        throw std::runtime_error("matrix feature columns do not match the model's feature ids");
    }
    std::filesystem::create_directories(cfg.out_dir);
    const auto csv_path = std::filesystem::path(cfg.out_dir) / "predictions.csv";
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "sample_id,score,label\n";
    std::vector<double> row(m.n_features);
    for (std::size_t i = 0; i < m.n_samples; ++i) {
        for (std::size_t j = 0; j < m.n_features; ++j) row[j] = m.values[i * m.n_features + j];
        const double score = predict_score(fit, row);
        out << m.sample_ids[i] << ',' << format_double(score) << ',' << (score > 0.5 ? 1 : 0) << '\n';
    }
    std::cout << "predict: scored " << m.n_samples << " samples\n";
}

void cmd_evaluate(const RunConfig& cfg) {
    const ExpressionDataset ds = load_csv(cfg.matrix_path, cfg.labels_path);
    const std::string dataset_name = std::filesystem::path(cfg.matrix_path).stem().string();
    const ExperimentReport report = run_protocol(ds, method_from_name(cfg.method), cfg.repeats,
                                                 cfg.split_fraction, cfg.hyper, cfg.seed, dataset_name);
    if (!cfg.annotations_path.empty()) {
        const auto annotations = load_annotations(cfg.annotations_path);
        write_report_files(report, cfg.out_dir, &annotations);
    } else {
        write_report_files(report, cfg.out_dir);
    }
    std::cout << "evaluate: " << report.method << " accuracy " << format_double(report.accuracy_mean) << " ("
              << format_double(report.accuracy_sd) << "), genes " << format_double(report.genes_mean) << " ("
              << format_double(report.genes_sd) << ")\n";
}

void cmd_rank(const RunConfig& cfg) {
    const ExpressionDataset ds = load_csv(cfg.matrix_path, cfg.labels_path);
    const WeightProfile profile = build_weight_profile(ds, all_samples(ds), cfg.hyper.bins, cfg.hyper.delta,
                                                       cfg.hyper.exclude_self, cfg.hyper.threads);
    std::vector<std::size_t> order(ds.n_features);
    for (std::size_t j = 0; j < ds.n_features; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (profile.significance[a] != profile.significance[b])
            return profile.significance[a] > profile.significance[b];
        return ds.feature_ids[a] < ds.feature_ids[b];
    });
    std::filesystem::create_directories(cfg.out_dir);
    const auto csv_path = std::filesystem::path(cfg.out_dir) / "ranking.csv";
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "rank,feature_id,significance,weight\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t j = order[r];
        out << r + 1 << ',' << ds.feature_ids[j] << ',' << format_double(profile.significance[j]) << ','
            << format_double(profile.weights[j]) << '\n';
    }
    std::cout << "rank: wrote " << order.size() << " features\n";
}

}  // namespace

int run(std::vector<std::string> args) {
    RunConfig cfg;
    CLI::App app{"Adaptive elastic net with conditional-mutual-information penalty weights"};
    app.require_subcommand(1);

    auto* fit_cmd = app.add_subcommand("fit", "Fit a model on the full dataset and write model.json");
    add_data_options(fit_cmd, cfg);
    add_method_option(fit_cmd, cfg);
    add_hyper_options(fit_cmd, cfg);
    fit_cmd->add_option("--lambda", cfg.hyper.fixed_lambda, "Skip cross-validation and fit at this lambda")
        ->check(CLI::PositiveNumber);

    auto* cv_cmd = app.add_subcommand("cv", "Cross-validate lambda and export the error curve");
    add_data_options(cv_cmd, cfg);
    add_method_option(cv_cmd, cfg);
    add_hyper_options(cv_cmd, cfg);

    auto* path_cmd = app.add_subcommand("path", "Export the coefficient path over the lambda grid");
    add_data_options(path_cmd, cfg);
    add_method_option(path_cmd, cfg);
    add_hyper_options(path_cmd, cfg);

    auto* predict_cmd = app.add_subcommand("predict", "Score samples with a saved model");
    predict_cmd->add_option("--model", cfg.model_path, "model.json from fit")->required();
    predict_cmd->add_option("--matrix", cfg.matrix_path, "Expression matrix CSV")->required();
    predict_cmd->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Repeated random-split evaluation of one method");
    add_data_options(evaluate_cmd, cfg);
    add_method_option(evaluate_cmd, cfg);
    evaluate_cmd->add_option("--repeats", cfg.repeats, "Number of random splits")
        ->check(CLI::Range(1, 1000000))
        ->capture_default_str();
    evaluate_cmd->add_option("--split-fraction", cfg.split_fraction, "Training fraction per split")
        ->check(CLI::Range(1e-6, 0.999999))
        ->capture_default_str();
    evaluate_cmd->add_option("--annotations", cfg.annotations_path,
                             "Optional CSV feature_id,accession,description joined into the frequency table");
    add_hyper_options(evaluate_cmd, cfg);

    auto* rank_cmd = app.add_subcommand("rank", "Rank features by significance score");
    add_data_options(rank_cmd, cfg);
    add_hyper_options(rank_cmd, cfg);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    // The path entry point needs a strictly positive l1 share.
    if (!predict_cmd->parsed() && cfg.hyper.alpha <= 0.0 && cfg.method != "adaptive_lasso") {
        std::cerr << "error: --alpha must be > 0 (pure ridge has no lambda_max; no finite grid entry point)\n";
        return 2;
    }

    try {
        if (fit_cmd->parsed()) {
            write_manifest(cfg, "fit");
            cmd_fit(cfg);
        } else if (cv_cmd->parsed()) {
            write_manifest(cfg, "cv");
            cmd_cv(cfg);
        } else if (path_cmd->parsed()) {
            write_manifest(cfg, "path");
            cmd_path(cfg);
        } else if (predict_cmd->parsed()) {
            write_manifest(cfg, "predict");
            cmd_predict(cfg);
        } else if (evaluate_cmd->parsed()) {
            write_manifest(cfg, "evaluate");
            cmd_evaluate(cfg);
        } else if (rank_cmd->parsed()) {
            write_manifest(cfg, "rank");
            cmd_rank(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace aencmi::cli

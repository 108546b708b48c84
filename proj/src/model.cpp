#include "aencmi/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <json.hpp>

#include "aencmi/common.hpp"

namespace aencmi {

namespace {

/// Misclassification counts per lambda for held-out rows scored with a
/// training-fold model. Scores are response_mean + Z beta on the
/// standardized scale, thresholded at 0.5 on the label scale.
std::vector<std::size_t> misclassified_per_lambda(const PathFit& path, const StandardizedView& view,
                                                  const ExpressionDataset& ds,
                                                  const std::vector<std::size_t>& heldout) {
    const auto z_cols = apply_standardization(view, ds, heldout);
    std::vector<std::size_t> errors(path.lambdas.size(), 0);
    std::vector<double> score(heldout.size());
    for (std::size_t li = 0; li < path.lambdas.size(); ++li) {
        const auto& beta = path.fits[li].beta;
        std::fill(score.begin(), score.end(), view.response_mean);
        for (std::size_t c = 0; c < z_cols.size(); ++c) {
            if (beta[c] == 0.0) continue;
            for (std::size_t r = 0; r < heldout.size(); ++r) score[r] += z_cols[c][r] * beta[c];
        }
        for (std::size_t r = 0; r < heldout.size(); ++r) {
            const int predicted = score[r] > 0.5 ? 1 : 0;
            if (predicted != ds.labels[heldout[r]]) ++errors[li];
        }
    }
    return errors;
}

std::vector<double> weights_for_retained(const std::vector<double>& full, const StandardizedView& view) {
    std::vector<double> out;
    out.reserve(view.retained_features.size());
    for (std::size_t j : view.retained_features) out.push_back(full[j]);
    return out;
}

}  // namespace

std::string method_name(Method method) {
    switch (method) {
        case Method::aen_cmi: return "aen_cmi";
        case Method::elastic_net: return "elastic_net";
        case Method::adaptive_lasso: return "adaptive_lasso";
        case Method::aen_ridge_free: return "aen_ridge_free";
    }
    throw std::logic_error("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "aen_cmi") return Method::aen_cmi;
    if (name == "elastic_net") return Method::elastic_net;
    if (name == "adaptive_lasso") return Method::adaptive_lasso;
    if (name == "aen_ridge_free") return Method::aen_ridge_free;
    throw std::invalid_argument("unknown method: " + name +
                                " (expected aen_cmi | elastic_net | adaptive_lasso | aen_ridge_free)");
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 0 ? class0 : class1).push_back(i);
    if (folds > class0.size() || folds > class1.size()) {
        throw std::invalid_argument("fold count exceeds a class count (" + std::to_string(class0.size()) + "/" +
                                    std::to_string(class1.size()) + " vs " + std::to_string(folds) + " folds)");
    }
    Rng rng(mix_seed(seed + kSeedOffsetCv));
    shuffle(class0, rng);
    shuffle(class1, rng);
    std::vector<std::size_t> fold_of(labels.size(), 0);
    for (std::size_t i = 0; i < class0.size(); ++i) fold_of[class0[i]] = i % folds;
    for (std::size_t i = 0; i < class1.size(); ++i) fold_of[class1[i]] = i % folds;
    return fold_of;
}

std::vector<double> method_weights(const ExpressionDataset& ds, const std::vector<std::size_t>& subset,
                                   Method method, const Hyper& hyper, [[maybe_unused]] std::uint64_t seed) {
    if (!hyper.fixed_weights.empty()) {
        if (hyper.fixed_weights.size() != ds.n_features) {
            throw std::invalid_argument("fixed_weights length != feature count");
        }
        return hyper.fixed_weights;
    }
    switch (method) {
        case Method::elastic_net:
            return std::vector<double>(ds.n_features, 1.0);
        case Method::aen_cmi:
        case Method::adaptive_lasso:
            return build_weight_profile(ds, subset, hyper.bins, hyper.delta, hyper.exclude_self, hyper.threads)
                .weights;
        case Method::aen_ridge_free: {
            // Initial estimator: the least-penalized identity-weight
            // elastic net on this subset (the grid floor), i.e. a low-bias
            // fit whose coefficient magnitudes seed the adaptive weights.
            const StandardizedView view = standardize(ds, subset);
            const std::vector<double> ones(view.retained_features.size(), 1.0);
            const PathFit path = fit_path(view.columns, view.response, hyper.alpha, ones, hyper.n_lambda,
                                          hyper.lambda_min_ratio, hyper.tolerance, hyper.max_sweeps);
            const Coefficients& init_fit = path.fits.back();
            std::vector<double> weights(ds.n_features, 1.0 / hyper.delta);
            for (std::size_t c = 0; c < view.retained_features.size(); ++c) {
                weights[view.retained_features[c]] = 1.0 / (std::abs(init_fit.beta[c]) + hyper.delta);
            }
            return weights;
        }
    }
    throw std::logic_error("unknown method");
}

namespace {

/// Shared CV core: the provider returns the weight vector for any sample
/// subset (the full training subset and each fold's training rows).
CvResult cross_validate_impl(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset,
                             double alpha, const Hyper& hyper, std::uint64_t seed,
                             const std::function<std::vector<double>(const std::vector<std::size_t>&, std::uint64_t)>&
                                 weights_for_subset) {
    std::vector<int> subset_labels;
    subset_labels.reserve(train_subset.size());
    for (std::size_t i : train_subset) subset_labels.push_back(ds.labels[i]);
    const std::vector<std::size_t> fold_of = stratified_folds(subset_labels, hyper.folds, seed);

    // First pass: fold compositions, per-fold weights and standardization.
    // The shared grid must start at or above every fold's lambda_max as
    // well as the full subset's, so its head is the all-zero model in
    // every fold and the error there is the majority-class baseline.
    const std::vector<double> full_weights = weights_for_subset(train_subset, seed);
    const StandardizedView full_view = standardize(ds, train_subset);
    double lam_head =
        lambda_max(full_view.columns, full_view.response, alpha, weights_for_retained(full_weights, full_view));

    std::vector<std::vector<std::size_t>> fold_tests(hyper.folds);
    std::vector<StandardizedView> fold_views(hyper.folds);
    std::vector<std::vector<double>> fold_weights(hyper.folds);
    for (std::size_t f = 0; f < hyper.folds; ++f) {
        std::vector<std::size_t> fold_train;
        for (std::size_t pos = 0; pos < train_subset.size(); ++pos) {
            (fold_of[pos] == f ? fold_tests[f] : fold_train).push_back(train_subset[pos]);
        }
        // Weights and standardization come from the fold's own training
        // rows; the held-out fold influences nothing but the error count.
        const std::vector<double> weights = weights_for_subset(fold_train, mix_seed(seed + kSeedOffsetCv + f));
        fold_views[f] = standardize(ds, fold_train);
        fold_weights[f] = weights_for_retained(weights, fold_views[f]);
        lam_head = std::max(lam_head, lambda_max(fold_views[f].columns, fold_views[f].response, alpha,
                                                 fold_weights[f]));
    }
    const std::vector<double> grid = lambda_grid(lam_head, hyper.n_lambda, hyper.lambda_min_ratio);

    std::vector<std::vector<std::size_t>> errors(hyper.folds);
    for (std::size_t f = 0; f < hyper.folds; ++f) {
        const PathFit path = fit_path_on_grid(fold_views[f].columns, fold_views[f].response, alpha,
                                              fold_weights[f], grid, hyper.tolerance, hyper.max_sweeps);
        errors[f] = misclassified_per_lambda(path, fold_views[f], ds, fold_tests[f]);
    }

    CvResult cv;
    cv.lambdas = grid;
    cv.folds = hyper.folds;
    cv.seed = seed;
    cv.mean_misclassified.resize(grid.size());
    cv.se_misclassified.resize(grid.size());
    const double k = static_cast<double>(hyper.folds);
    for (std::size_t li = 0; li < grid.size(); ++li) {
        double mean = 0.0;
        for (std::size_t f = 0; f < hyper.folds; ++f) mean += static_cast<double>(errors[f][li]);
        mean /= k;
        double var = 0.0;
        for (std::size_t f = 0; f < hyper.folds; ++f) {
            const double d = static_cast<double>(errors[f][li]) - mean;
            var += d * d;
        }
        var /= (k - 1.0);
        cv.mean_misclassified[li] = mean;
        cv.se_misclassified[li] = std::sqrt(var / k);
    }

    cv.chosen_index = 0;
    for (std::size_t li = 1; li < grid.size(); ++li) {
        if (cv.mean_misclassified[li] < cv.mean_misclassified[cv.chosen_index]) cv.chosen_index = li;
    }
    cv.chosen_lambda = grid[cv.chosen_index];
    return cv;
}

}  // namespace

CvResult cross_validate(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset,
                        Method method, const Hyper& hyper, std::uint64_t seed) {
    const double alpha = method == Method::adaptive_lasso ? 1.0 : hyper.alpha;
    return cross_validate_impl(ds, train_subset, alpha, hyper, seed,
                               [&](const std::vector<std::size_t>& subset, std::uint64_t sub_seed) {
                                   return method_weights(ds, subset, method, hyper, sub_seed);
                               });
}

CvResult cross_validate_fixed_weights(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset,
                                      double alpha, const std::vector<double>& weights, const Hyper& hyper,
                                      std::uint64_t seed) {
    if (weights.size() != ds.n_features) throw std::invalid_argument("weights length != feature count");
    return cross_validate_impl(ds, train_subset, alpha, hyper, seed,
                               [&](const std::vector<std::size_t>&, std::uint64_t) { return weights; });
}

ModelFit fit_model(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset, Method method,
                   const Hyper& hyper, std::uint64_t seed) {
    if (train_subset.empty()) throw std::invalid_argument("empty training subset");

    ModelFit out;
    out.method = method;
    out.feature_ids = ds.feature_ids;
    out.hyper = hyper;
    out.seed = seed;
    out.alpha = method == Method::adaptive_lasso ? 1.0 : hyper.alpha;

    // Weight profile for the first pass. The readapt loop below rescores
    // features against the support of the previous fit (CMI methods only).
    WeightProfile profile;
    profile.delta = hyper.delta;
    profile.bins = hyper.bins;
    profile.exclude_self = hyper.exclude_self;
    const bool cmi_method =
        (method == Method::aen_cmi || method == Method::adaptive_lasso) && hyper.fixed_weights.empty();
    if (cmi_method) {
        profile = build_weight_profile(ds, train_subset, hyper.bins, hyper.delta, hyper.exclude_self, hyper.threads);
    } else {
        profile.weights = method_weights(ds, train_subset, method, hyper, seed);
        if (method == Method::aen_ridge_free) {
            profile.significance.assign(ds.n_features, 0.0);  // not CMI-based
        }
    }

    const StandardizedView view = standardize(ds, train_subset);
    std::vector<int> subset_labels;
    subset_labels.reserve(train_subset.size());
    for (std::size_t i : train_subset) subset_labels.push_back(ds.labels[i]);

    DiscretizedMatrix dm;  // reused by readapt passes
    if (cmi_method && hyper.readapt > 1) {
        dm = discretize_matrix(ds.values, ds.n_samples, ds.n_features, train_subset, hyper.bins);
    }

    CvResult cv;
    Coefficients final_fit;
    int passes_done = 0;
    std::vector<double> weights = profile.weights;
    for (int pass = 1; pass <= std::max(1, hyper.readapt); ++pass) {
        if (hyper.fixed_lambda > 0.0) {
            cv.lambdas = {hyper.fixed_lambda};
            cv.mean_misclassified = {0.0};
            cv.se_misclassified = {0.0};
            cv.chosen_lambda = hyper.fixed_lambda;
            cv.chosen_index = 0;
            cv.folds = 0;
            cv.seed = seed;
        } else if (pass == 1) {
            cv = cross_validate(ds, train_subset, method, hyper, seed);
        } else {
            // Later passes keep the pass-specific weights fixed across
            // folds; this loop is an optional extension, off by default.
            cv = cross_validate_fixed_weights(ds, train_subset, out.alpha, weights, hyper, seed);
        }
        const std::vector<double> retained_weights = weights_for_retained(weights, view);
        const double lam_max = lambda_max(view.columns, view.response, out.alpha, retained_weights);
        const double lam_lo = std::min(cv.chosen_lambda, lam_max);
        PathFit path;
        if (cv.chosen_lambda >= lam_max) {
            SolverConfig cfg;
            cfg.alpha = out.alpha;
            cfg.lambda = cv.chosen_lambda;
            cfg.weights = retained_weights;
            cfg.tolerance = hyper.tolerance;
            cfg.max_sweeps = hyper.max_sweeps;
            final_fit = fit(view.columns, view.response, cfg);
        } else {
            // Warm-started descent from lambda_max down to the chosen value.
            std::vector<double> grid;
            for (double lam : cv.lambdas) {
                if (lam < lam_max && lam > lam_lo) grid.push_back(lam);
            }
            grid.insert(grid.begin(), lam_max);
            grid.push_back(lam_lo);
            path = fit_path_on_grid(view.columns, view.response, out.alpha, retained_weights, grid,
                                    hyper.tolerance, hyper.max_sweeps);
            final_fit = path.fits.back();
        }
        passes_done = pass;

        if (pass >= hyper.readapt || !cmi_method) break;
        std::vector<std::size_t> support;
        for (std::size_t c = 0; c < final_fit.beta.size(); ++c) {
            if (final_fit.beta[c] != 0.0) support.push_back(view.retained_features[c]);
        }
        if (support.size() < 2) break;
        auto sig = significance_over_support(dm, subset_labels, support, hyper.exclude_self, hyper.threads);
        for (double& s : sig) s = std::max(0.0, s);
        profile.significance = sig;
        profile.weights = weights_from_significance(sig, hyper.delta);
        weights = profile.weights;
    }

    out.weight_profile = profile;
    out.cv = cv;
    out.chosen_lambda = cv.chosen_lambda;
    out.readapt_used = passes_done;
    out.beta_std = final_fit.beta;
    out.stats.column_means = view.column_means;
    out.stats.column_scales = view.column_scales;
    out.stats.retained_features = view.retained_features;
    out.stats.dropped_features = view.dropped_features;
    out.stats.response_mean = view.response_mean;

    // Back-transform: standardized z = (x - m) * c, so the original-scale
    // coefficient is beta * c and the intercept absorbs the means.
    out.coefficients.assign(ds.n_features, 0.0);
    double intercept = view.response_mean;
    for (std::size_t c = 0; c < view.retained_features.size(); ++c) {
        const std::size_t j = view.retained_features[c];
        const double b = final_fit.beta[c] * view.column_scales[j];
        out.coefficients[j] = b;
        intercept -= b * view.column_means[j];
    }
    out.intercept = intercept;
    for (std::size_t j = 0; j < ds.n_features; ++j) {
        if (out.coefficients[j] != 0.0) {
            out.selected_indices.push_back(j);
            out.selected_features.push_back(ds.feature_ids[j]);
        }
    }
    return out;
}

double predict_score(const ModelFit& fit, const std::vector<double>& row) {
    if (row.size() != fit.coefficients.size()) {
        throw std::invalid_argument("predict_score: row length " + std::to_string(row.size()) +
                                    " != feature count " + std::to_string(fit.coefficients.size()));
    }
    double score = fit.intercept;
    for (std::size_t j : fit.selected_indices) score += fit.coefficients[j] * row[j];
    if (!std::isfinite(score)) throw std::runtime_error("non-finite prediction score");
    return score;
}

int classify(const ModelFit& fit, const std::vector<double>& row) {
    return predict_score(fit, row) > 0.5 ? 1 : 0;
}

void save_model_json(const ModelFit& fit, const std::string& path) {
    nlohmann::json j;
    j["format"] = "aencmi-model";
    j["tool_version"] = kVersion;
    j["method"] = method_name(fit.method);
    j["alpha"] = fit.alpha;
    j["chosen_lambda"] = fit.chosen_lambda;
    j["seed"] = fit.seed;
    j["intercept"] = fit.intercept;
    j["feature_ids"] = fit.feature_ids;
    j["coefficients"] = fit.coefficients;
    j["selected_features"] = fit.selected_features;

    nlohmann::json hyper;
    hyper["alpha"] = fit.hyper.alpha;
    hyper["delta"] = fit.hyper.delta;
    hyper["bins"] = fit.hyper.bins;
    hyper["folds"] = fit.hyper.folds;
    hyper["exclude_self"] = fit.hyper.exclude_self;
    hyper["readapt"] = fit.hyper.readapt;
    hyper["n_lambda"] = fit.hyper.n_lambda;
    hyper["lambda_min_ratio"] = fit.hyper.lambda_min_ratio;
    hyper["tolerance"] = fit.hyper.tolerance;
    hyper["max_sweeps"] = fit.hyper.max_sweeps;
    j["hyper"] = std::move(hyper);

    nlohmann::json profile;
    profile["delta"] = fit.weight_profile.delta;
    profile["bins"] = fit.weight_profile.bins;
    profile["exclude_self"] = fit.weight_profile.exclude_self;
    profile["readapt_used"] = fit.readapt_used;
    if (!fit.weight_profile.significance.empty()) {
        const auto [lo, hi] = std::minmax_element(fit.weight_profile.significance.begin(),
                                                  fit.weight_profile.significance.end());
        double mean = 0.0;
        for (double s : fit.weight_profile.significance) mean += s;
        mean /= static_cast<double>(fit.weight_profile.significance.size());
        profile["significance_min"] = *lo;
        profile["significance_mean"] = mean;
        profile["significance_max"] = *hi;
    }
    j["weight_profile"] = std::move(profile);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(2) << '\n';
}

ModelFit load_model_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("format") || j["format"] != "aencmi-model") {
        throw std::runtime_error("not an aencmi model file: " + path);
    }
    ModelFit fit;
    fit.method = method_from_name(j.at("method").get<std::string>());
    fit.alpha = j.at("alpha").get<double>();
    fit.chosen_lambda = j.at("chosen_lambda").get<double>();
    fit.seed = j.at("seed").get<std::uint64_t>();
    fit.intercept = j.at("intercept").get<double>();
    fit.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    fit.coefficients = j.at("coefficients").get<std::vector<double>>();
    if (fit.coefficients.size() != fit.feature_ids.size()) {
        throw std::runtime_error("model file has mismatched feature/coefficient lengths: " + path);
    }
    for (std::size_t k = 0; k < fit.coefficients.size(); ++k) {
        if (fit.coefficients[k] != 0.0) {
            fit.selected_indices.push_back(k);
            fit.selected_features.push_back(fit.feature_ids[k]);
        }
    }
    return fit;
}

}  // namespace aencmi

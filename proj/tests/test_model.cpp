#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "aencmi/common.hpp"
#include "aencmi/dataset.hpp"
#include "aencmi/model.hpp"
#include "support/fixtures.hpp"

using namespace aencmi;

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

Hyper fast_hyper() {
    Hyper h;
    h.folds = 5;
    h.n_lambda = 60;
    return h;
}

std::vector<double> dataset_row(const ExpressionDataset& ds, std::size_t i) {
    std::vector<double> row(ds.n_features);
    for (std::size_t j = 0; j < ds.n_features; ++j) row[j] = ds.at(i, j);
    return row;
}

}  // namespace

TEST_CASE("stratified folds cover both classes and respect class counts") {
    std::vector<int> labels;
    for (int i = 0; i < 11; ++i) labels.push_back(0);
    for (int i = 0; i < 20; ++i) labels.push_back(1);
    const auto fold_of = stratified_folds(labels, 10, 42);
    std::vector<std::set<int>> fold_classes(10);
    for (std::size_t i = 0; i < labels.size(); ++i) fold_classes[fold_of[i]].insert(labels[i]);
    for (const auto& classes : fold_classes) CHECK(!classes.empty());
    // every training complement keeps both classes
    for (std::size_t f = 0; f < 10; ++f) {
        std::set<int> rest;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (fold_of[i] != f) rest.insert(labels[i]);
        }
        CHECK(rest.size() == 2);
    }
    CHECK_THROWS_AS(stratified_folds(labels, 12, 1), std::invalid_argument);  // > class0 count
}

TEST_CASE("cross-validation drives misclassification to zero on separable clouds") {
    const auto ds = fixtures::two_cloud_dataset(17);
    const auto cv = cross_validate(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 5);
    const double best = *std::min_element(cv.mean_misclassified.begin(), cv.mean_misclassified.end());
    CHECK(best == 0.0);
    CHECK(cv.mean_misclassified[cv.chosen_index] == 0.0);
    CHECK(cv.lambdas.size() == 60);
    CHECK(cv.chosen_lambda == cv.lambdas[cv.chosen_index]);

    // determinism
    const auto again = cross_validate(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 5);
    CHECK(again.chosen_lambda == cv.chosen_lambda);
    CHECK(again.mean_misclassified == cv.mean_misclassified);
    CHECK(again.se_misclassified == cv.se_misclassified);
}

TEST_CASE("ties in mean misclassification resolve to the larger lambda") {
    // Separable clouds: the zero-error plateau spans many lambdas, and the
    // chosen one must be the first (largest) index attaining the minimum.
    const auto ds = fixtures::two_cloud_dataset(17);
    const auto cv = cross_validate(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 5);
    const double best = *std::min_element(cv.mean_misclassified.begin(), cv.mean_misclassified.end());
    std::size_t first_best = 0;
    std::size_t attained = 0;
    for (std::size_t i = 0; i < cv.mean_misclassified.size(); ++i) {
        if (cv.mean_misclassified[i] == best) {
            if (attained == 0) first_best = i;
            ++attained;
        }
    }
    REQUIRE(attained > 1);  // a genuine tie exists
    CHECK(cv.chosen_index == first_best);
}

TEST_CASE("fixed identity weights reproduce the elastic_net method exactly") {
    const auto ds = fixtures::planted_dataset(19, 10, 8);
    const auto h = fast_hyper();
    const auto via_method = cross_validate(ds, all_indices(ds.n_samples), Method::elastic_net, h, 9);
    const auto via_fixed = cross_validate_fixed_weights(ds, all_indices(ds.n_samples), h.alpha,
                                                        std::vector<double>(ds.n_features, 1.0), h, 9);
    CHECK(via_method.chosen_lambda == via_fixed.chosen_lambda);
    CHECK(via_method.mean_misclassified == via_fixed.mean_misclassified);
}

TEST_CASE("fit_model records its configuration and selects the planted pair") {
    std::size_t hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto ds = fixtures::planted_dataset(seed * 131, 30, 20);
        const auto fit = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), seed);
        CHECK(fit.hyper.delta == 0.001);
        CHECK(fit.alpha == 0.05);
        CHECK(fit.weight_profile.bins == 3);
        const std::set<std::string> selected(fit.selected_features.begin(), fit.selected_features.end());
        if (selected.count("g1") && selected.count("g2")) ++hits;
        // selected ids are exactly the nonzero coefficients
        std::size_t nonzero = 0;
        for (double b : fit.coefficients) nonzero += b != 0.0 ? 1 : 0;
        CHECK(nonzero == fit.selected_features.size());
    }
    CHECK(hits >= 9);
}

TEST_CASE("label-independent data yields near-empty models") {
    std::vector<double> counts;
    for (std::uint64_t seed = 1; seed <= 9; ++seed) {
        const auto ds = fixtures::null_dataset(seed * 977);
        const auto fit = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), seed);
        counts.push_back(static_cast<double>(fit.selected_features.size()));
    }
    std::sort(counts.begin(), counts.end());
    CHECK(counts[counts.size() / 2] <= 2.0);
}

TEST_CASE("prediction: empty model returns the training label mean") {
    ModelFit fit;
    fit.coefficients.assign(4, 0.0);
    fit.feature_ids = {"a", "b", "c", "d"};
    fit.intercept = 0.5;  // balanced training labels
    const std::vector<double> row{1.0, -2.0, 3.0, 4.0};
    CHECK(predict_score(fit, row) == 0.5);
    CHECK(classify(fit, row) == 0);  // strict inequality at the boundary
}

TEST_CASE("classification threshold is strict at 0.5") {
    ModelFit fit;
    fit.coefficients = {1.0};
    fit.selected_indices = {0};
    fit.feature_ids = {"a"};
    fit.intercept = 0.0;
    CHECK(classify(fit, {0.6}) == 1);
    CHECK(classify(fit, {0.5}) == 0);
    CHECK(classify(fit, {0.49}) == 0);
    // equivalent sign form once the 0.5 shift is absorbed
    for (double x : {-1.0, 0.2, 0.5, 0.50001, 2.0}) {
        const bool sign_rule = predict_score(fit, {x}) - 0.5 > 0.0;
        CHECK(classify(fit, {x}) == (sign_rule ? 1 : 0));
    }
    CHECK_THROWS_AS(predict_score(fit, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("prediction is affine: shifted scores add") {
    const auto ds = fixtures::two_cloud_dataset(23);
    const auto fit = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 3);
    const auto x1 = dataset_row(ds, 0);
    const auto x2 = dataset_row(ds, 25);
    std::vector<double> sum(x1.size());
    for (std::size_t j = 0; j < x1.size(); ++j) sum[j] = x1[j] + x2[j];
    const double lhs = predict_score(fit, sum) - fit.intercept;
    const double rhs = (predict_score(fit, x1) - fit.intercept) + (predict_score(fit, x2) - fit.intercept);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("original-scale predictions reproduce standardized-scale fits") {
    const auto ds = fixtures::planted_dataset(29, 12, 10);
    const auto train = all_indices(ds.n_samples);
    const auto fit = fit_model(ds, train, Method::aen_cmi, fast_hyper(), 11);

    const auto view = standardize(ds, train);
    for (std::size_t r = 0; r < train.size(); ++r) {
        double std_score = view.response_mean;
        for (std::size_t c = 0; c < view.retained_features.size(); ++c) {
            std_score += view.columns[c][r] * fit.beta_std[c];
        }
        const double orig_score = predict_score(fit, dataset_row(ds, train[r]));
        CHECK(std::abs(std_score - orig_score) <= 1e-10);
    }
}

TEST_CASE("cross-validation ignores held-out rows entirely") {
    const auto base = fixtures::planted_dataset(37, 12, 8);
    const auto split = random_split(base, 0.5, 2);

    // one extra feature: noise on training rows in both variants, and equal
    // to the label on held-out rows in the tampered variant only
    Rng rng(99);
    std::vector<double> extra(base.n_samples);
    for (double& v : extra) v = rng.normal();
    auto with_extra_feature = [&](bool tampered) {
        std::vector<std::vector<double>> rows(base.n_samples, std::vector<double>(base.n_features + 1));
        for (std::size_t i = 0; i < base.n_samples; ++i) {
            for (std::size_t j = 0; j < base.n_features; ++j) rows[i][j] = base.at(i, j);
            rows[i][base.n_features] = extra[i];
        }
        if (tampered) {
            for (std::size_t i : split.test_indices) rows[i][base.n_features] = base.labels[i];
        }
        return fixtures::make_dataset(rows, base.labels);
    };

    const auto clean = with_extra_feature(false);
    const auto tampered = with_extra_feature(true);
    const auto cv_clean = cross_validate(clean, split.train_indices, Method::aen_cmi, fast_hyper(), 7);
    const auto cv_tampered = cross_validate(tampered, split.train_indices, Method::aen_cmi, fast_hyper(), 7);
    CHECK(cv_clean.chosen_lambda == cv_tampered.chosen_lambda);
    CHECK(cv_clean.mean_misclassified == cv_tampered.mean_misclassified);
}

TEST_CASE("model json round-trips through save and load") {
    const auto ds = fixtures::two_cloud_dataset(41);
    const auto fit = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 13);
    const auto path = (std::filesystem::temp_directory_path() / "aencmi_model_roundtrip.json").string();
    save_model_json(fit, path);
    const auto loaded = load_model_json(path);
    CHECK(loaded.feature_ids == fit.feature_ids);
    CHECK(loaded.intercept == fit.intercept);
    CHECK(loaded.coefficients == fit.coefficients);
    CHECK(loaded.selected_features == fit.selected_features);
    for (std::size_t i = 0; i < ds.n_samples; i += 7) {
        const auto row = dataset_row(ds, i);
        CHECK(predict_score(loaded, row) == predict_score(fit, row));
    }
    std::filesystem::remove(path);
}

TEST_CASE("readapt reruns weight estimation on the previous support") {
    const auto ds = fixtures::planted_dataset(47, 30, 12);
    auto h = fast_hyper();
    const auto single = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, h, 19);
    h.readapt = 3;
    const auto readapted = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, h, 19);
    CHECK(readapted.readapt_used >= 1);
    CHECK(readapted.readapt_used <= 3);
    if (single.selected_features.size() >= 2) {
        CHECK(readapted.readapt_used > 1);
        // rescoring against the support changes the profile
        CHECK(readapted.weight_profile.weights != single.weight_profile.weights);
    }
    // the readapted model still selects exactly its nonzero coefficients
    std::size_t nonzero = 0;
    for (double b : readapted.coefficients) nonzero += b != 0.0 ? 1 : 0;
    CHECK(nonzero == readapted.selected_features.size());
}

TEST_CASE("fit_model is deterministic in the seed") {
    const auto ds = fixtures::planted_dataset(43, 10, 8);
    const auto a = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 21);
    const auto b = fit_model(ds, all_indices(ds.n_samples), Method::aen_cmi, fast_hyper(), 21);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.chosen_lambda == b.chosen_lambda);
    CHECK(a.selected_features == b.selected_features);
}

#ifndef AENCMI_MODEL_HPP
#define AENCMI_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aencmi/dataset.hpp"
#include "aencmi/solver.hpp"
#include "aencmi/weights.hpp"

namespace aencmi {

/// Fitting method. aen_cmi carries conditional-mutual-information penalty
/// weights; elastic_net is the identity-weight reduction; adaptive_lasso is
/// the alpha = 1 reduction with the same weights; aen_ridge_free rebuilds
/// the classic adaptive weights from an initial elastic-net fit,
/// w_j = (|beta_enet_j| + delta)^-1.
enum class Method { aen_cmi, elastic_net, adaptive_lasso, aen_ridge_free };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct Hyper {
    double alpha = 0.05;
    double delta = 0.001;
    int bins = 3;
    std::size_t folds = 10;
    bool exclude_self = false;
    int readapt = 1;
    std::size_t n_lambda = 100;
    double lambda_min_ratio = 0.01;
    double tolerance = 1e-7;
    std::size_t max_sweeps = 10000;
    unsigned threads = 1;
    // When positive, skip cross-validation and fit at exactly this lambda.
    double fixed_lambda = 0.0;
    // When nonempty, every method uses these weights verbatim (length p);
    // lets tests pin the weight profile independently of the method.
    std::vector<double> fixed_weights;
};

struct CvResult {
    std::vector<double> lambdas;             // descending, shared across folds
    std::vector<double> mean_misclassified;  // mean held-out error count per fold
    std::vector<double> se_misclassified;    // standard error over folds
    double chosen_lambda = 0.0;
    std::size_t chosen_index = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
};

struct StandardizationStats {
    std::vector<double> column_means;
    std::vector<double> column_scales;  // 0 marks a dropped column
    std::vector<std::size_t> retained_features;
    std::vector<std::size_t> dropped_features;
    double response_mean = 0.0;
};

struct ModelFit {
    Method method = Method::aen_cmi;
    std::vector<std::string> feature_ids;
    std::vector<double> coefficients;  // original feature scale, length p
    double intercept = 0.0;
    std::vector<std::size_t> selected_indices;
    std::vector<std::string> selected_features;
    WeightProfile weight_profile;  // identity for elastic_net
    double chosen_lambda = 0.0;
    double alpha = 0.0;
    Hyper hyper;
    std::uint64_t seed = 0;
    int readapt_used = 1;
    CvResult cv;
    // standardized-scale view of the same fit, kept for auditing
    std::vector<double> beta_std;  // aligned with stats.retained_features
    StandardizationStats stats;
};

/// Penalty weights the given method would use on this sample subset.
/// Length p, all entries positive. For aen_ridge_free this runs an inner
/// identity-weight cross-validation seeded from `seed`.
std::vector<double> method_weights(const ExpressionDataset& ds, const std::vector<std::size_t>& subset,
                                   Method method, const Hyper& hyper, std::uint64_t seed);

/// Stratified k-fold selection of lambda on a grid shared across folds.
/// Weights and standardization are recomputed inside each training fold so
/// no held-out fold leaks into them. Ties in mean misclassification go to
/// the larger lambda.
CvResult cross_validate(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset,
                        Method method, const Hyper& hyper, std::uint64_t seed);

/// Cross-validation with one fixed weight vector used in every fold
/// (weights that do not derive from the fold data cannot leak).
CvResult cross_validate_fixed_weights(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset,
                                      double alpha, const std::vector<double>& weights, const Hyper& hyper,
                                      std::uint64_t seed);

/// Weight profile, cross-validated lambda, final path fit at the chosen
/// lambda, coefficients mapped back to the original feature scale.
ModelFit fit_model(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset, Method method,
                   const Hyper& hyper, std::uint64_t seed);

inline ModelFit fit_aen_cmi(const ExpressionDataset& ds, const std::vector<std::size_t>& train_subset,
                            const Hyper& hyper, std::uint64_t seed) {
    return fit_model(ds, train_subset, Method::aen_cmi, hyper, seed);
}

/// theta_0 + sum_j theta_j x_j on the original feature scale.
double predict_score(const ModelFit& fit, const std::vector<double>& row);

/// 1 iff predict_score(fit, row) > 0.5 (strict).
int classify(const ModelFit& fit, const std::vector<double>& row);

/// Stratified fold assignment; fold_of[i] in [0, folds) for each position
/// of `labels`. Throws if folds exceeds either class count.
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed);

/// Model on disk: feature ids, original-scale coefficients, intercept,
/// hyperparameters, weight-profile summary, seed. load_model_json restores
/// exactly what predict_score and classify need.
void save_model_json(const ModelFit& fit, const std::string& path);
ModelFit load_model_json(const std::string& path);

}  // namespace aencmi

#endif  // AENCMI_MODEL_HPP

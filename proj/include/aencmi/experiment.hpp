#ifndef AENCMI_EXPERIMENT_HPP
#define AENCMI_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aencmi/dataset.hpp"
#include "aencmi/model.hpp"

namespace aencmi {

struct RepeatRecord {
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    double accuracy = 0.0;
    std::vector<std::string> selected;
    double chosen_lambda = 0.0;
};

/// Repeated random-split evaluation of one method: accuracy and
/// selected-gene statistics plus per-feature selection counts.
struct ExperimentReport {
    std::string method;
    std::string dataset_name;
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::size_t repeats = 0;
    double split_fraction = 0.0;
    std::uint64_t base_seed = 0;
    Hyper hyper;
    double accuracy_mean = 0.0;
    double accuracy_sd = 0.0;
    double genes_mean = 0.0;
    double genes_sd = 0.0;
    bool sd_degenerate = false;  // true when repeats == 1
    std::vector<RepeatRecord> per_repeat;
    std::map<std::string, std::size_t> selection_frequency;  // feature id -> count
};

/// Repeat r: stratified split with seed base_seed + r, full pipeline on the
/// training half, plain accuracy on the held-out half.
ExperimentReport run_protocol(const ExpressionDataset& ds, Method method, std::size_t repeats,
                              double split_fraction, const Hyper& hyper, std::uint64_t base_seed,
                              const std::string& dataset_name = "");

/// Descending by count, ties by feature id; never-selected features are
/// omitted.
std::vector<std::pair<std::string, std::size_t>> selection_frequency_table(const ExperimentReport& report);

/// CSV `lambda,mean_misclassified,se`, numbers in shortest round-trip form.
void emit_error_curve(const CvResult& cv, const std::string& path);

/// Inverse of emit_error_curve; reproduces the arrays bit for bit.
CvResult load_error_curve(const std::string& path);

struct Annotation {
    std::string accession;
    std::string description;
};

/// Optional annotation CSV: feature_id,accession,description.
std::map<std::string, Annotation> load_annotations(const std::string& path);

struct GroupingAudit {
    std::size_t pairs_checked = 0;       // nonzero same-sign coefficient pairs
    double max_identity_residual = 0.0;  // stationarity-subtraction identity
    std::size_t bound_violations = 0;    // against the coefficient-gap bound
    double max_gap = 0.0;                // largest |theta_j - theta_l| seen
    double response_norm = 0.0;
};

/// For every same-sign pair of nonzero coefficients, checks (a) the exact
/// stationarity-subtraction identity
///   theta_j - theta_l = (1/(n lambda (1-alpha))) (t_j x_j - t_l x_l)' (r - X theta)
/// with t_j = 1/w_j, and (b) the derived gap bound
///   |theta_j - theta_l| <= ||r|| sqrt(1 - g*rho) sqrt(t_j^2+t_l^2) / (lambda (1-alpha) sqrt(n)),
/// rho = (1/n) x_j'x_l, g = 2 t_j t_l / (t_j^2 + t_l^2). Requires alpha < 1.
/// See docs/grouping-bound.md for the derivation.
GroupingAudit grouping_audit(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                             const std::vector<double>& beta, const std::vector<double>& weights, double lambda,
                             double alpha, double slack = 1e-8);

/// Serialized report (stable key order, shortest round-trip numbers);
/// byte-identical for identical inputs regardless of thread count.
std::string report_to_json(const ExperimentReport& report);

/// Writes report.json, report.csv (one row per repeat) and
/// selection_frequency.csv (optionally joined with annotations).
void write_report_files(const ExperimentReport& report, const std::string& out_dir,
                        const std::map<std::string, Annotation>* annotations = nullptr);

}  // namespace aencmi

#endif  // AENCMI_EXPERIMENT_HPP

#ifndef AENCMI_DATASET_HPP
#define AENCMI_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace aencmi {

/// Expression matrix (samples x features) with binary labels. Immutable
/// after construction; validate() enforces the invariants below.
struct ExpressionDataset {
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::vector<double> values;  // row-major, n_samples * n_features
    std::vector<std::string> feature_ids;
    std::vector<std::string> sample_ids;
    std::vector<int> labels;  // entries in {0,1}, both classes present

    double at(std::size_t sample, std::size_t feature) const {
        return values[sample * n_features + feature];
    }

    /// Throws std::invalid_argument on any violated invariant:
    /// n >= 2, p >= 1, both classes present, finite values, unique ids.
    void validate() const;
};

/// Column statistics from a training subset plus the transformed training
/// block. Retained columns are centered with mean-square one; columns that
/// are constant over the subset are dropped and listed.
struct StandardizedView {
    std::size_t n = 0;                          // subset size
    std::vector<std::vector<double>> columns;   // retained columns, each length n
    std::vector<double> column_means;           // length p (original indexing)
    std::vector<double> column_scales;          // length p; 0 marks a dropped column
    std::vector<std::size_t> retained_features; // original indices, ascending
    std::vector<std::size_t> dropped_features;  // original indices of zero-variance columns
    std::vector<double> response;               // centered labels over the subset
    double response_mean = 0.0;                 // label mean over the subset
};

struct SplitSpec {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t seed = 0;
};

/// Matrix CSV: header `sample_id,<feature ids...>`, one numeric row per
/// sample. Labels CSV: header `sample_id,label`, labels in {0,1}. Rows are
/// joined by sample_id; output row order follows the matrix file.
ExpressionDataset load_csv(const std::string& matrix_path, const std::string& labels_path);

/// Unlabeled expression matrix, same CSV layout as load_csv's matrix file.
struct MatrixCsv {
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::vector<double> values;  // row-major
    std::vector<std::string> feature_ids;
    std::vector<std::string> sample_ids;
};
MatrixCsv load_matrix_csv(const std::string& matrix_path);

/// Center each column over sample_subset and scale to mean-square one;
/// drops zero-variance columns. Response is the label vector centered by
/// its subset mean.
StandardizedView standardize(const ExpressionDataset& ds, const std::vector<std::size_t>& sample_subset);

/// Transform held-out rows with training statistics; dropped columns are
/// removed. Returns columns in retained order, each of length subset size.
std::vector<std::vector<double>> apply_standardization(const StandardizedView& view,
                                                       const ExpressionDataset& ds,
                                                       const std::vector<std::size_t>& sample_subset);

/// Deterministic stratified split: each class is shuffled with the seeded
/// generator and divided so both sides hold both classes and the train side
/// has round(train_fraction * n) samples.
SplitSpec random_split(const ExpressionDataset& ds, double train_fraction, std::uint64_t seed);

}  // namespace aencmi

#endif  // AENCMI_DATASET_HPP

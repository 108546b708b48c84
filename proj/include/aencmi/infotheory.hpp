#ifndef AENCMI_INFOTHEORY_HPP
#define AENCMI_INFOTHEORY_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace aencmi {

/// Integer-binned copy of an expression matrix, one code column per
/// feature. Codes are dense in 0..bins_per_feature[j]-1.
struct DiscretizedMatrix {
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::vector<std::vector<std::uint8_t>> codes;  // per feature, length n_samples
    std::vector<int> bins_per_feature;             // effective bin count per feature
    std::vector<std::vector<double>> bin_edges;    // lower-inclusive start of each upper bin
};

/// Empirical joint distribution over symbol tuples; the plugin estimators
/// and their test oracles both build on it.
struct JointDistribution {
    std::map<std::vector<int>, std::size_t> counts;
    std::size_t total = 0;

    static JointDistribution from_columns(const std::vector<const std::vector<int>*>& columns);
};

struct DiscretizedColumn {
    std::vector<std::uint8_t> codes;
    int bins = 0;                   // effective bin count after tie merging
    std::vector<double> edges;      // cut values; code = #edges <= x
};

/// Equal-frequency binning with ties kept together: target cut positions at
/// i*n/bins are snapped to the nearest change point of the sorted column,
/// so equal values always share a bin and bins may merge.
DiscretizedColumn discretize_equal_frequency(const std::vector<double>& column, int bins);

/// Discretize the given rows of every feature column.
DiscretizedMatrix discretize_matrix(const std::vector<double>& row_major_values, std::size_t n_samples,
                                    std::size_t n_features, const std::vector<std::size_t>& sample_subset,
                                    int bins);

/// Plugin entropy in bits, H = -sum p log2 p over empirical frequencies.
double entropy(const std::vector<int>& v);

/// Plugin mutual information in bits; zero-probability cells contribute 0.
double mutual_information(const std::vector<int>& a, const std::vector<int>& b);

/// Plugin conditional mutual information in bits,
/// I(a;b|z) = sum_z p(z) I(a;b | Z=z).
double conditional_mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                                      const std::vector<int>& z);

}  // namespace aencmi

#endif  // AENCMI_INFOTHEORY_HPP

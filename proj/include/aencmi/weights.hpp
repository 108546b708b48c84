#ifndef AENCMI_WEIGHTS_HPP
#define AENCMI_WEIGHTS_HPP

#include <cstddef>
#include <vector>

#include "aencmi/dataset.hpp"
#include "aencmi/infotheory.hpp"

namespace aencmi {

/// Per-feature significance scores and the penalty weights derived from
/// them. weights[k] == 1 / (significance[k] + delta).
struct WeightProfile {
    std::vector<double> significance;  // s_k >= 0, in bits
    std::vector<double> weights;       // w_k > 0, <= 1/delta
    double delta = 0.0;
    int bins = 0;
    bool exclude_self = false;
};

/// s_k = (1/(p-1)) * sum_j I(x_k; x_j | y). The sum includes the j == k
/// term (I(x_k;x_k|y) = H(x_k|y)) unless exclude_self is set, in which
/// case it runs over j != k with the same 1/(p-1) normalization.
std::vector<double> gene_significance(const DiscretizedMatrix& dm, const std::vector<int>& labels,
                                      bool exclude_self = false, unsigned threads = 1);

/// Like gene_significance but the inner sum runs only over the features in
/// `support` (every k is still scored). Normalized by the number of summed
/// terms for k inside the support; used by the readapt loop.
std::vector<double> significance_over_support(const DiscretizedMatrix& dm, const std::vector<int>& labels,
                                              const std::vector<std::size_t>& support,
                                              bool exclude_self = false, unsigned threads = 1);

/// w_k = (s_k + delta)^-1; requires delta > 0 and all s_k >= 0.
std::vector<double> weights_from_significance(const std::vector<double>& significance, double delta);

/// Discretize the training rows, score every feature, derive weights.
WeightProfile build_weight_profile(const ExpressionDataset& ds, const std::vector<std::size_t>& subset,
                                   int bins, double delta, bool exclude_self = false, unsigned threads = 1);

}  // namespace aencmi

#endif  // AENCMI_WEIGHTS_HPP

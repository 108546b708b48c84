#include "aencmi/weights.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>

#include "aencmi/common.hpp"

namespace aencmi {

namespace {

// Precomputed per-profile state for the plugin CMI over (feature, feature)
// pairs conditioned on the binary label. All probabilities are integer
// counts over n samples, so every log2 comes from one table over 0..n.
struct PairCmiContext {
    std::size_t n = 0;
    int n_classes = 0;
    std::vector<std::uint8_t> z;                  // class code per sample
    std::vector<std::size_t> class_count;         // per class
    std::vector<double> log2_table;               // log2(k), [0] unused sentinel 0
    const DiscretizedMatrix* dm = nullptr;
    std::vector<std::vector<std::uint16_t>> za;   // per feature: (z_i * B_k + code_i)
    std::vector<std::vector<std::size_t>> marg;   // per feature: counts[z * B_k + a]
};

PairCmiContext make_context(const DiscretizedMatrix& dm, const std::vector<int>& labels) {
    if (labels.size() != dm.n_samples) throw std::invalid_argument("labels length != discretized sample count");
    PairCmiContext ctx;
    ctx.n = dm.n_samples;
    ctx.dm = &dm;
    int max_label = 0;
    for (int y : labels) {
        if (y < 0) throw std::invalid_argument("negative label");
        max_label = std::max(max_label, y);
    }
    ctx.n_classes = max_label + 1;
    ctx.z.resize(ctx.n);
    ctx.class_count.assign(static_cast<std::size_t>(ctx.n_classes), 0);
    for (std::size_t i = 0; i < ctx.n; ++i) {
        ctx.z[i] = static_cast<std::uint8_t>(labels[i]);
        ++ctx.class_count[static_cast<std::size_t>(labels[i])];
    }
    bool seen_empty = false;
    for (std::size_t c : ctx.class_count) seen_empty = seen_empty || c == 0;
    if (ctx.n_classes < 2 || seen_empty) throw std::invalid_argument("label vector must contain both classes");

    ctx.log2_table.resize(ctx.n + 1);
    ctx.log2_table[0] = 0.0;
    for (std::size_t k = 1; k <= ctx.n; ++k) ctx.log2_table[k] = std::log2(static_cast<double>(k));

    ctx.za.resize(dm.n_features);
    ctx.marg.resize(dm.n_features);
    for (std::size_t k = 0; k < dm.n_features; ++k) {
        const auto bins = static_cast<std::size_t>(dm.bins_per_feature[k]);
        auto& za = ctx.za[k];
        auto& marg = ctx.marg[k];
        za.resize(ctx.n);
        marg.assign(static_cast<std::size_t>(ctx.n_classes) * bins, 0);
        const auto& codes = dm.codes[k];
        for (std::size_t i = 0; i < ctx.n; ++i) {
            const std::size_t cell = ctx.z[i] * bins + codes[i];
            za[i] = static_cast<std::uint16_t>(cell);
            ++marg[cell];
        }
    }
    return ctx;
}

/// I(x_k; x_j | y) in bits via joint integer counts.
double pair_cmi(const PairCmiContext& ctx, std::size_t k, std::size_t j, std::vector<std::size_t>& scratch) {
    const auto bk = static_cast<std::size_t>(ctx.dm->bins_per_feature[k]);
    const auto bj = static_cast<std::size_t>(ctx.dm->bins_per_feature[j]);
    if (bk == 1 || bj == 1) return 0.0;

    const std::size_t cells = static_cast<std::size_t>(ctx.n_classes) * bk * bj;
    scratch.assign(cells, 0);
    const auto& za = ctx.za[k];
    const auto& codes_j = ctx.dm->codes[j];
    for (std::size_t i = 0; i < ctx.n; ++i) {
        ++scratch[za[i] * bj + codes_j[i]];
    }

    const auto& lg = ctx.log2_table;
    const auto& marg_k = ctx.marg[k];
    const auto& marg_j = ctx.marg[j];
    double acc = 0.0;
    for (int zc = 0; zc < ctx.n_classes; ++zc) {
        const double log_nz = lg[ctx.class_count[static_cast<std::size_t>(zc)]];
        for (std::size_t a = 0; a < bk; ++a) {
            const double log_r = lg[marg_k[static_cast<std::size_t>(zc) * bk + a]];
            const std::size_t base = (static_cast<std::size_t>(zc) * bk + a) * bj;
            for (std::size_t b = 0; b < bj; ++b) {
                const std::size_t c = scratch[base + b];
                if (c == 0) continue;
                acc += static_cast<double>(c) *
                       (lg[c] + log_nz - log_r - lg[marg_j[static_cast<std::size_t>(zc) * bj + b]]);
            }
        }
    }
    return acc / static_cast<double>(ctx.n);
}

/// H(x_k | y) in bits, the j == k term of the significance sum.
double self_term(const PairCmiContext& ctx, std::size_t k) {
    const auto bk = static_cast<std::size_t>(ctx.dm->bins_per_feature[k]);
    const auto& lg = ctx.log2_table;
    const auto& marg = ctx.marg[k];
    double acc = 0.0;
    for (int zc = 0; zc < ctx.n_classes; ++zc) {
        const double log_nz = lg[ctx.class_count[static_cast<std::size_t>(zc)]];
        for (std::size_t a = 0; a < bk; ++a) {
            const std::size_t r = marg[static_cast<std::size_t>(zc) * bk + a];
            if (r == 0) continue;
            acc -= static_cast<double>(r) * (lg[r] - log_nz);
        }
    }
    return acc / static_cast<double>(ctx.n);
}

}  // namespace

std::vector<double> gene_significance(const DiscretizedMatrix& dm, const std::vector<int>& labels,
                                      bool exclude_self, unsigned threads) {
    const std::size_t p = dm.n_features;
    if (p < 2) throw std::invalid_argument("gene_significance needs at least 2 features");
    const PairCmiContext ctx = make_context(dm, labels);

    // Upper-triangle pair values, computed in parallel with one row per
    // work item, then reduced sequentially so accumulation order (and the
    // result) never depends on the thread count.
    std::vector<double> pair_values(p * (p - 1) / 2);
    auto tri_index = [p](std::size_t k, std::size_t j) {
        return k * (2 * p - k - 1) / 2 + (j - k - 1);
    };

    unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (workers == 0) workers = 1;
    std::atomic<std::size_t> next_row{0};
    auto row_worker = [&]() {
        std::vector<std::size_t> scratch;
        for (;;) {
            const std::size_t k = next_row.fetch_add(1);
            if (k + 1 >= p) break;
            double* out = &pair_values[tri_index(k, k + 1)];
            for (std::size_t j = k + 1; j < p; ++j) {
                out[j - k - 1] = pair_cmi(ctx, k, j, scratch);
            }
        }
    };
    if (workers == 1) {
        row_worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(row_worker);
        for (auto& t : pool) t.join();
    }

    std::vector<double> significance(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += pair_values[tri_index(j, k)];
        if (!exclude_self) sum += self_term(ctx, k);
        for (std::size_t j = k + 1; j < p; ++j) sum += pair_values[tri_index(k, j)];
        significance[k] = sum / static_cast<double>(p - 1);
    }
    return significance;
}

std::vector<double> significance_over_support(const DiscretizedMatrix& dm, const std::vector<int>& labels,
                                              const std::vector<std::size_t>& support,
                                              bool exclude_self, unsigned threads) {
    const std::size_t p = dm.n_features;
    if (support.size() < 2) throw std::invalid_argument("significance_over_support needs a support of >= 2 features");
    const PairCmiContext ctx = make_context(dm, labels);

    std::vector<char> in_support(p, 0);
    for (std::size_t j : support) {
        if (j >= p) throw std::out_of_range("support feature index out of range");
        in_support[j] = 1;
    }

    std::vector<double> significance(p, 0.0);
    parallel_for(p, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> scratch;
        for (std::size_t k = begin; k < end; ++k) {
            double sum = 0.0;
            for (std::size_t j : support) {
                if (j == k) {
                    if (!exclude_self) sum += self_term(ctx, k);
                    continue;
                }
                sum += pair_cmi(ctx, k, j, scratch);
            }
            // Inside the support the normalizer mirrors the full-matrix
            // convention (|S|-1); features outside are scored against all
            // |S| support members.
            std::size_t denom = in_support[k] ? support.size() - 1 : support.size();
            if (denom == 0) denom = 1;
            significance[k] = sum / static_cast<double>(denom);
        }
    });
    return significance;
}

std::vector<double> weights_from_significance(const std::vector<double>& significance, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    std::vector<double> weights(significance.size());
    for (std::size_t k = 0; k < significance.size(); ++k) {
        if (significance[k] < 0.0) throw std::invalid_argument("negative significance score");
        weights[k] = 1.0 / (significance[k] + delta);
    }
    return weights;
}

WeightProfile build_weight_profile(const ExpressionDataset& ds, const std::vector<std::size_t>& subset,
                                   int bins, double delta, bool exclude_self, unsigned threads) {
    std::vector<int> labels;
    labels.reserve(subset.size());
    for (std::size_t i : subset) {
        if (i >= ds.n_samples) throw std::out_of_range("sample index out of range");
        labels.push_back(ds.labels[i]);
    }
    const DiscretizedMatrix dm = discretize_matrix(ds.values, ds.n_samples, ds.n_features, subset, bins);
    WeightProfile profile;
    profile.bins = bins;
    profile.delta = delta;
    profile.exclude_self = exclude_self;
    profile.significance = gene_significance(dm, labels, exclude_self, threads);
    // Plugin estimates can land a hair below zero through rounding; clamp
    // so the weight formula's domain holds.
    for (double& s : profile.significance) s = std::max(0.0, s);
    profile.weights = weights_from_significance(profile.significance, delta);
    return profile;
}

}  // namespace aencmi

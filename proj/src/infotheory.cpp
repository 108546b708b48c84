#include "aencmi/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aencmi {

namespace {

/// Map arbitrary symbols to dense codes 0..k-1, preserving value order.
std::vector<int> dense_recode(const std::vector<int>& v, int& n_symbols) {
    std::vector<int> uniq(v);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    n_symbols = static_cast<int>(uniq.size());
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), v[i]) - uniq.begin());
    }
    return out;
}

}  // namespace

JointDistribution JointDistribution::from_columns(const std::vector<const std::vector<int>*>& columns) {
    JointDistribution jd;
    if (columns.empty()) return jd;
    const std::size_t n = columns.front()->size();
    for (const auto* col : columns) {
        if (col->size() != n) throw std::invalid_argument("joint distribution columns differ in length");
    }
    std::vector<int> tuple(columns.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < columns.size(); ++c) tuple[c] = (*columns[c])[i];
        ++jd.counts[tuple];
    }
    jd.total = n;
    return jd;
}

DiscretizedColumn discretize_equal_frequency(const std::vector<double>& column, int bins) {
    if (bins < 2) throw std::invalid_argument("discretize_equal_frequency: bins must be >= 2");
    if (column.empty()) throw std::invalid_argument("discretize_equal_frequency: empty column");
    const std::size_t n = column.size();

    std::vector<double> sorted(column);
    std::sort(sorted.begin(), sorted.end());

    // Positions where the sorted column changes value; cut points can only
    // live here, which keeps ties in one bin.
    std::vector<std::size_t> changes;
    for (std::size_t s = 1; s < n; ++s) {
        if (sorted[s - 1] < sorted[s]) changes.push_back(s);
    }

    DiscretizedColumn out;
    if (!changes.empty()) {
        // Snap each equal-frequency target i*n/bins to the nearest change
        // position (compared exactly via |s*bins - i*n|; ties go low).
        std::vector<std::size_t> chosen;
        for (int i = 1; i < bins; ++i) {
            const long long target_scaled = static_cast<long long>(i) * static_cast<long long>(n);
            std::size_t best = changes.front();
            long long best_dist = -1;
            for (std::size_t s : changes) {
                const long long dist = std::llabs(static_cast<long long>(s) * bins - target_scaled);
                if (best_dist < 0 || dist < best_dist) {
                    best_dist = dist;
                    best = s;
                }
            }
            chosen.push_back(best);
        }
        std::sort(chosen.begin(), chosen.end());
        chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
        for (std::size_t s : chosen) out.edges.push_back(sorted[s]);
    }
    out.bins = static_cast<int>(out.edges.size()) + 1;
    out.codes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto code = std::upper_bound(out.edges.begin(), out.edges.end(), column[i]) - out.edges.begin();
        out.codes[i] = static_cast<std::uint8_t>(code);
    }
    return out;
}

DiscretizedMatrix discretize_matrix(const std::vector<double>& row_major_values, std::size_t n_samples,
                                    std::size_t n_features, const std::vector<std::size_t>& sample_subset,
                                    int bins) {
    DiscretizedMatrix dm;
    dm.n_samples = sample_subset.size();
    dm.n_features = n_features;
    dm.codes.resize(n_features);
    dm.bins_per_feature.resize(n_features);
    dm.bin_edges.resize(n_features);
    std::vector<double> column(sample_subset.size());
    for (std::size_t j = 0; j < n_features; ++j) {
        for (std::size_t r = 0; r < sample_subset.size(); ++r) {
            const std::size_t i = sample_subset[r];
            if (i >= n_samples) throw std::out_of_range("sample index out of range");
            column[r] = row_major_values[i * n_features + j];
        }
        auto binned = discretize_equal_frequency(column, bins);
        dm.codes[j] = std::move(binned.codes);
        dm.bins_per_feature[j] = binned.bins;
        dm.bin_edges[j] = std::move(binned.edges);
    }
    return dm;
}

double entropy(const std::vector<int>& v) {
    if (v.empty()) throw std::invalid_argument("entropy of empty vector");
    int n_symbols = 0;
    const auto codes = dense_recode(v, n_symbols);
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_symbols), 0);
    for (int c : codes) ++counts[static_cast<std::size_t>(c)];
    const double n = static_cast<double>(v.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mutual_information: length mismatch");
    if (a.empty()) throw std::invalid_argument("mutual_information: empty input");
    int na = 0, nb = 0;
    const auto ca = dense_recode(a, na);
    const auto cb = dense_recode(b, nb);
    std::vector<std::size_t> joint(static_cast<std::size_t>(na) * nb, 0);
    std::vector<std::size_t> marg_a(na, 0), marg_b(nb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++joint[static_cast<std::size_t>(ca[i]) * nb + cb[i]];
        ++marg_a[static_cast<std::size_t>(ca[i])];
        ++marg_b[static_cast<std::size_t>(cb[i])];
    }
    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (int x = 0; x < na; ++x) {
        for (int y = 0; y < nb; ++y) {
            const std::size_t c = joint[static_cast<std::size_t>(x) * nb + y];
            if (c == 0) continue;
            const double ratio = (static_cast<double>(c) * n) /
                                 (static_cast<double>(marg_a[x]) * static_cast<double>(marg_b[y]));
            mi += (static_cast<double>(c) / n) * std::log2(ratio);
        }
    }
    return mi;
}

double conditional_mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                                      const std::vector<int>& z) {
    if (a.size() != b.size() || a.size() != z.size()) {
        throw std::invalid_argument("conditional_mutual_information: length mismatch");
    }
    if (a.empty()) throw std::invalid_argument("conditional_mutual_information: empty input");
    int na = 0, nb = 0, nz = 0;
    const auto ca = dense_recode(a, na);
    const auto cb = dense_recode(b, nb);
    const auto cz = dense_recode(z, nz);

    std::vector<std::size_t> joint(static_cast<std::size_t>(nz) * na * nb, 0);
    std::vector<std::size_t> marg_az(static_cast<std::size_t>(nz) * na, 0);
    std::vector<std::size_t> marg_bz(static_cast<std::size_t>(nz) * nb, 0);
    std::vector<std::size_t> marg_z(nz, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto zi = static_cast<std::size_t>(cz[i]);
        ++joint[(zi * na + ca[i]) * nb + cb[i]];
        ++marg_az[zi * na + ca[i]];
        ++marg_bz[zi * nb + cb[i]];
        ++marg_z[zi];
    }

    const double n = static_cast<double>(a.size());
    double cmi = 0.0;
    for (int zi = 0; zi < nz; ++zi) {
        const double n_z = static_cast<double>(marg_z[static_cast<std::size_t>(zi)]);
        if (n_z == 0.0) continue;
        for (int x = 0; x < na; ++x) {
            for (int y = 0; y < nb; ++y) {
                const std::size_t c = joint[(static_cast<std::size_t>(zi) * na + x) * nb + y];
                if (c == 0) continue;
                const double r = static_cast<double>(marg_az[static_cast<std::size_t>(zi) * na + x]);
                const double s = static_cast<double>(marg_bz[static_cast<std::size_t>(zi) * nb + y]);
                const double ratio = (static_cast<double>(c) * n_z) / (r * s);
                cmi += (static_cast<double>(c) / n) * std::log2(ratio);
            }
        }
    }
    return cmi;
}

}  // namespace aencmi

#include "aencmi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "aencmi/common.hpp"

namespace aencmi {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

void ExpressionDataset::validate() const {
    if (n_samples < 2) throw std::invalid_argument("dataset needs at least 2 samples");
    if (n_features < 1) throw std::invalid_argument("dataset needs at least 1 feature");
    if (values.size() != n_samples * n_features) throw std::invalid_argument("value buffer size mismatch");
    if (feature_ids.size() != n_features || sample_ids.size() != n_samples || labels.size() != n_samples)
        throw std::invalid_argument("id/label vector length mismatch");
    bool has0 = false, has1 = false;
    for (int label : labels) {
        if (label == 0) has0 = true;
        else if (label == 1) has1 = true;
        else throw std::invalid_argument("label outside {0,1}: " + std::to_string(label));
    }
    if (!has0 || !has1) throw std::invalid_argument("labels must contain both classes");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite entry in expression matrix");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : feature_ids) {
        if (!seen.insert(id).second) throw std::invalid_argument("duplicate feature id: " + id);
    }
}

MatrixCsv load_matrix_csv(const std::string& matrix_path) {
    const auto matrix_lines = read_lines(matrix_path);
    if (matrix_lines.size() < 2) throw std::runtime_error("matrix file has no data rows: " + matrix_path);
    const auto header = split_csv_line(matrix_lines[0]);
    if (header.size() < 2) throw std::runtime_error("matrix header needs sample_id plus at least one feature");

    MatrixCsv m;
    m.n_features = header.size() - 1;
    m.feature_ids.assign(header.begin() + 1, header.end());
    m.n_samples = matrix_lines.size() - 1;
    m.values.reserve(m.n_samples * m.n_features);
    m.sample_ids.reserve(m.n_samples);

    for (std::size_t row = 1; row < matrix_lines.size(); ++row) {
        const auto fields = split_csv_line(matrix_lines[row]);
        if (fields.size() != header.size()) {
            throw std::runtime_error("ragged row " + std::to_string(row) + " in " + matrix_path + ": expected " +
                                     std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        m.sample_ids.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            try {
                m.values.push_back(parse_double(fields[j]));
            } catch (const std::invalid_argument&) {
                throw std::runtime_error("non-numeric cell at row " + std::to_string(row) + ", column " +
                                         header[j] + " in " + matrix_path);
            }
        }
    }
    return m;
}

ExpressionDataset load_csv(const std::string& matrix_path, const std::string& labels_path) {
    MatrixCsv m = load_matrix_csv(matrix_path);
    ExpressionDataset ds;
    ds.n_samples = m.n_samples;
    ds.n_features = m.n_features;
    ds.values = std::move(m.values);
    ds.feature_ids = std::move(m.feature_ids);
    ds.sample_ids = std::move(m.sample_ids);

    std::unordered_map<std::string, int> label_by_sample;
    const auto label_lines = read_lines(labels_path);
    if (label_lines.size() < 2) throw std::runtime_error("labels file has no data rows: " + labels_path);
    for (std::size_t row = 1; row < label_lines.size(); ++row) {
        const auto fields = split_csv_line(label_lines[row]);
        if (fields.size() != 2) throw std::runtime_error("labels row " + std::to_string(row) + " needs sample_id,label");
        const std::string& text = fields[1];
        if (text != "0" && text != "1") {
            throw std::runtime_error("label not in {0,1} for sample " + fields[0] + ": '" + text + "'");
        }
        if (!label_by_sample.emplace(fields[0], text == "1" ? 1 : 0).second) {
            throw std::runtime_error("duplicate sample id in labels file: " + fields[0]);
        }
    }
    if (label_by_sample.size() != ds.n_samples) {
        throw std::runtime_error("sample-id mismatch: matrix has " + std::to_string(ds.n_samples) +
                                 " samples, labels file has " + std::to_string(label_by_sample.size()));
    }
    ds.labels.reserve(ds.n_samples);
    for (const auto& id : ds.sample_ids) {
        const auto it = label_by_sample.find(id);
        if (it == label_by_sample.end()) throw std::runtime_error("no label for sample id: " + id);
        ds.labels.push_back(it->second);
    }

    ds.validate();
    return ds;
}

StandardizedView standardize(const ExpressionDataset& ds, const std::vector<std::size_t>& sample_subset) {
    if (sample_subset.size() < 2) throw std::invalid_argument("standardize needs at least 2 samples");
    for (std::size_t i : sample_subset) {
        if (i >= ds.n_samples) throw std::out_of_range("sample index out of range");
    }

    const std::size_t n = sample_subset.size();
    const std::size_t p = ds.n_features;
    StandardizedView view;
    view.n = n;
    view.column_means.assign(p, 0.0);
    view.column_scales.assign(p, 0.0);

    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i : sample_subset) mean += ds.at(i, j);
        mean /= static_cast<double>(n);
        double msq = 0.0;
        for (std::size_t i : sample_subset) {
            const double d = ds.at(i, j) - mean;
            msq += d * d;
        }
        msq /= static_cast<double>(n);
        view.column_means[j] = mean;
        if (msq <= 0.0) {
            view.dropped_features.push_back(j);
            continue;
        }
        const double scale = 1.0 / std::sqrt(msq);
        view.column_scales[j] = scale;
        view.retained_features.push_back(j);
        std::vector<double> col(n);
        for (std::size_t r = 0; r < n; ++r) {
            col[r] = (ds.at(sample_subset[r], j) - mean) * scale;
        }
        view.columns.push_back(std::move(col));
    }
    if (view.retained_features.empty()) throw std::invalid_argument("all columns are constant over the subset");

    double label_mean = 0.0;
    for (std::size_t i : sample_subset) label_mean += ds.labels[i];
    label_mean /= static_cast<double>(n);
    view.response_mean = label_mean;
    view.response.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        view.response[r] = static_cast<double>(ds.labels[sample_subset[r]]) - label_mean;
    }
    return view;
}

std::vector<std::vector<double>> apply_standardization(const StandardizedView& view,
                                                       const ExpressionDataset& ds,
                                                       const std::vector<std::size_t>& sample_subset) {
    for (std::size_t i : sample_subset) {
        if (i >= ds.n_samples) throw std::out_of_range("sample index out of range");
    }
    std::vector<std::vector<double>> out(view.retained_features.size());
    for (std::size_t c = 0; c < view.retained_features.size(); ++c) {
        const std::size_t j = view.retained_features[c];
        const double mean = view.column_means[j];
        const double scale = view.column_scales[j];
        auto& col = out[c];
        col.resize(sample_subset.size());
        for (std::size_t r = 0; r < sample_subset.size(); ++r) {
            col[r] = (ds.at(sample_subset[r], j) - mean) * scale;
        }
    }
    return out;
}

SplitSpec random_split(const ExpressionDataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0,1)");
    }
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < ds.n_samples; ++i) {
        (ds.labels[i] == 0 ? class0 : class1).push_back(i);
    }

    const auto target_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.n_samples)));
    if (target_train == 0 || target_train == ds.n_samples) {
        throw std::invalid_argument("train_fraction yields an empty side");
    }

    // Per-class train counts: floors first, then the class with the larger
    // fractional remainder absorbs the leftover. Each side keeps at least
    // one sample of each class.
    const double exact0 = train_fraction * static_cast<double>(class0.size());
    const double exact1 = train_fraction * static_cast<double>(class1.size());
    std::size_t take0 = static_cast<std::size_t>(exact0);
    std::size_t take1 = static_cast<std::size_t>(exact1);
    while (take0 + take1 < target_train) {
        if (exact0 - static_cast<double>(take0) >= exact1 - static_cast<double>(take1) && take0 < class0.size()) {
            ++take0;
        } else {
            ++take1;
        }
    }
    auto clamp_both_sides = [](std::size_t take, std::size_t total) {
        take = std::max<std::size_t>(take, 1);
        return std::min(take, total - 1);
    };
    take0 = clamp_both_sides(take0, class0.size());
    take1 = clamp_both_sides(take1, class1.size());

    Rng rng(mix_seed(seed + kSeedOffsetSplit));
    shuffle(class0, rng);
    shuffle(class1, rng);

    SplitSpec split;
    split.seed = seed;
    split.train_indices.assign(class0.begin(), class0.begin() + static_cast<std::ptrdiff_t>(take0));
    split.train_indices.insert(split.train_indices.end(), class1.begin(),
                               class1.begin() + static_cast<std::ptrdiff_t>(take1));
    split.test_indices.assign(class0.begin() + static_cast<std::ptrdiff_t>(take0), class0.end());
    split.test_indices.insert(split.test_indices.end(), class1.begin() + static_cast<std::ptrdiff_t>(take1),
                              class1.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());
    return split;
}

}  // namespace aencmi

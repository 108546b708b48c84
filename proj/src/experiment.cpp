#include "aencmi/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aencmi/common.hpp"

namespace aencmi {

namespace {

void require_writable(std::ofstream& out, const std::string& path) {
    if (!out) throw std::runtime_error("cannot write file: " + path);
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        var += d * d;
    }
    var /= (n - 1.0);
    return {mean, std::sqrt(var)};
}

nlohmann::json hyper_to_json(const Hyper& hyper) {
    // threads is an execution detail, not config: outputs do not depend on
    // it and it stays out of serialized form.
    nlohmann::json j;
    j["alpha"] = hyper.alpha;
    j["delta"] = hyper.delta;
    j["bins"] = hyper.bins;
    j["folds"] = hyper.folds;
    j["exclude_self"] = hyper.exclude_self;
    j["readapt"] = hyper.readapt;
    j["n_lambda"] = hyper.n_lambda;
    j["lambda_min_ratio"] = hyper.lambda_min_ratio;
    j["tolerance"] = hyper.tolerance;
    j["max_sweeps"] = hyper.max_sweeps;
    return j;
}

}  // namespace

ExperimentReport run_protocol(const ExpressionDataset& ds, Method method, std::size_t repeats,
                              double split_fraction, const Hyper& hyper, std::uint64_t base_seed,
                              const std::string& dataset_name) {
    if (repeats < 1) throw std::invalid_argument("run_protocol needs at least 1 repeat");

    ExperimentReport report;
    report.method = method_name(method);
    report.dataset_name = dataset_name;
    report.n_samples = ds.n_samples;
    report.n_features = ds.n_features;
    report.repeats = repeats;
    report.split_fraction = split_fraction;
    report.base_seed = base_seed;
    report.hyper = hyper;
    report.sd_degenerate = repeats == 1;

    std::vector<double> accuracies, gene_counts;
    for (std::size_t r = 0; r < repeats; ++r) {
        const std::uint64_t seed = base_seed + r;
        const SplitSpec split = random_split(ds, split_fraction, seed);
        const ModelFit fit = fit_model(ds, split.train_indices, method, hyper, seed);

        std::size_t correct = 0;
        std::vector<double> row(ds.n_features);
        for (std::size_t i : split.test_indices) {
            for (std::size_t j = 0; j < ds.n_features; ++j) row[j] = ds.at(i, j);
            if (classify(fit, row) == ds.labels[i]) ++correct;
        }

        RepeatRecord rec;
        rec.seed = seed;
        rec.train_indices = split.train_indices;
        rec.test_indices = split.test_indices;
        rec.accuracy = static_cast<double>(correct) / static_cast<double>(split.test_indices.size());
        rec.selected = fit.selected_features;
        rec.chosen_lambda = fit.chosen_lambda;

        accuracies.push_back(rec.accuracy);
        gene_counts.push_back(static_cast<double>(rec.selected.size()));
        for (const auto& id : rec.selected) ++report.selection_frequency[id];
        report.per_repeat.push_back(std::move(rec));
    }

    std::tie(report.accuracy_mean, report.accuracy_sd) = mean_sd(accuracies);
    std::tie(report.genes_mean, report.genes_sd) = mean_sd(gene_counts);
    return report;
}

std::vector<std::pair<std::string, std::size_t>> selection_frequency_table(const ExperimentReport& report) {
    std::vector<std::pair<std::string, std::size_t>> table(report.selection_frequency.begin(),
                                                           report.selection_frequency.end());
    std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return table;
}

void emit_error_curve(const CvResult& cv, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require_writable(out, path);
    out << "lambda,mean_misclassified,se\n";
    for (std::size_t i = 0; i < cv.lambdas.size(); ++i) {
        out << format_double(cv.lambdas[i]) << ',' << format_double(cv.mean_misclassified[i]) << ','
            << format_double(cv.se_misclassified[i]) << '\n';
    }
}

CvResult load_error_curve(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty error-curve file: " + path);
    CvResult cv;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 3) throw std::runtime_error("malformed error-curve row: " + line);
        cv.lambdas.push_back(parse_double(cells[0]));
        cv.mean_misclassified.push_back(parse_double(cells[1]));
        cv.se_misclassified.push_back(parse_double(cells[2]));
    }
    return cv;
}

std::map<std::string, Annotation> load_annotations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open annotations file: " + path);
    std::map<std::string, Annotation> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue;  // header
        }
        std::stringstream ss(line);
        std::string id, accession, description;
        std::getline(ss, id, ',');
        std::getline(ss, accession, ',');
        std::getline(ss, description);
        out[id] = Annotation{accession, description};
    }
    return out;
}

GroupingAudit grouping_audit(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                             const std::vector<double>& beta, const std::vector<double>& weights, double lambda,
                             double alpha, double slack) {
    if (!(alpha < 1.0)) throw std::invalid_argument("grouping audit needs alpha < 1 (ridge term present)");
    if (!(lambda > 0.0)) throw std::invalid_argument("grouping audit needs lambda > 0");
    const std::size_t n = response.size();
    const double dn = static_cast<double>(n);

    std::vector<double> residual(response);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (beta[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) residual[i] -= columns[j][i] * beta[j];
    }
    double response_norm = 0.0;
    for (double r : response) response_norm += r * r;
    response_norm = std::sqrt(response_norm);

    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) nonzero.push_back(j);
    }

    GroupingAudit audit;
    audit.response_norm = response_norm;
    const double denom = lambda * (1.0 - alpha);
    for (std::size_t a = 0; a < nonzero.size(); ++a) {
        for (std::size_t b = a + 1; b < nonzero.size(); ++b) {
            const std::size_t j = nonzero[a];
            const std::size_t l = nonzero[b];
            if (beta[j] * beta[l] <= 0.0) continue;
            ++audit.pairs_checked;

            const double tj = 1.0 / weights[j];
            const double tl = 1.0 / weights[l];
            double cross = 0.0;  // (t_j x_j - t_l x_l)' residual
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cross += (tj * columns[j][i] - tl * columns[l][i]) * residual[i];
                rho += columns[j][i] * columns[l][i];
            }
            rho /= dn;

            const double gap = beta[j] - beta[l];
            const double identity_rhs = cross / (dn * denom);
            audit.max_identity_residual = std::max(audit.max_identity_residual, std::abs(gap - identity_rhs));
            audit.max_gap = std::max(audit.max_gap, std::abs(gap));

            const double gamma_bar = 2.0 * std::abs(tj * tl) / (tj * tj + tl * tl);
            const double bound = response_norm * std::sqrt(std::max(0.0, 1.0 - gamma_bar * rho)) *
                                 std::sqrt(tj * tj + tl * tl) / (denom * std::sqrt(dn));
            if (std::abs(gap) > bound + slack) ++audit.bound_violations;
        }
    }
    return audit;
}

std::string report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["method"] = report.method;
    j["dataset"] = report.dataset_name;
    j["n_samples"] = report.n_samples;
    j["n_features"] = report.n_features;
    j["repeats"] = report.repeats;
    j["split_fraction"] = report.split_fraction;
    j["base_seed"] = report.base_seed;
    j["hyper"] = hyper_to_json(report.hyper);
    j["accuracy_mean"] = report.accuracy_mean;
    j["accuracy_sd"] = report.accuracy_sd;
    j["genes_mean"] = report.genes_mean;
    j["genes_sd"] = report.genes_sd;
    j["sd_degenerate"] = report.sd_degenerate;

    nlohmann::json repeats = nlohmann::json::array();
    for (const auto& rec : report.per_repeat) {
        nlohmann::json r;
        r["seed"] = rec.seed;
        r["train_indices"] = rec.train_indices;
        r["test_indices"] = rec.test_indices;
        r["accuracy"] = rec.accuracy;
        r["selected"] = rec.selected;
        r["chosen_lambda"] = rec.chosen_lambda;
        repeats.push_back(std::move(r));
    }
    j["per_repeat"] = std::move(repeats);

    nlohmann::json freq = nlohmann::json::object();
    for (const auto& [id, count] : report.selection_frequency) freq[id] = count;
    j["selection_frequency"] = std::move(freq);
    return j.dump(2) + "\n";
}

void write_report_files(const ExperimentReport& report, const std::string& out_dir,
                        const std::map<std::string, Annotation>* annotations) {
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);

    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        require_writable(out, (dir / "report.json").string());
        out << report_to_json(report);
    }
    {
        std::ofstream out(dir / "report.csv", std::ios::binary);
        require_writable(out, (dir / "report.csv").string());
        out << "repeat,seed,accuracy,selected_genes,chosen_lambda\n";
        for (std::size_t r = 0; r < report.per_repeat.size(); ++r) {
            const auto& rec = report.per_repeat[r];
            out << r << ',' << rec.seed << ',' << format_double(rec.accuracy) << ',' << rec.selected.size() << ','
                << format_double(rec.chosen_lambda) << '\n';
        }
    }
    {
        std::ofstream out(dir / "selection_frequency.csv", std::ios::binary);
        require_writable(out, (dir / "selection_frequency.csv").string());
        const bool annotated = annotations != nullptr;
        out << (annotated ? "feature_id,accession,description,selected,repeats,frequency\n"
                          : "feature_id,selected,repeats,frequency\n");
        for (const auto& [id, count] : selection_frequency_table(report)) {
            out << id;
            if (annotated) {
                const auto it = annotations->find(id);
                out << ',' << (it != annotations->end() ? it->second.accession : "") << ','
                    << (it != annotations->end() ? it->second.description : "");
            }
            out << ',' << count << ',' << report.repeats << ',' << count << '/' << report.repeats << '\n';
        }
    }
}

}  // namespace aencmi

// Deterministic synthetic datasets for the test and acceptance suites.
#ifndef AENCMI_TESTS_FIXTURES_HPP
#define AENCMI_TESTS_FIXTURES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aencmi/common.hpp"
#include "aencmi/dataset.hpp"

namespace fixtures {

inline aencmi::ExpressionDataset make_dataset(const std::vector<std::vector<double>>& rows,
                                              const std::vector<int>& labels) {
    aencmi::ExpressionDataset ds;
    ds.n_samples = rows.size();
    ds.n_features = rows.front().size();
    ds.values.reserve(ds.n_samples * ds.n_features);
    for (const auto& row : rows) {
        if (row.size() != ds.n_features) throw std::invalid_argument("ragged fixture rows");
        ds.values.insert(ds.values.end(), row.begin(), row.end());
    }
    ds.labels = labels;
    for (std::size_t j = 0; j < ds.n_features; ++j) ds.feature_ids.push_back("g" + std::to_string(j + 1));
    for (std::size_t i = 0; i < ds.n_samples; ++i) ds.sample_ids.push_back("s" + std::to_string(i + 1));
    ds.validate();
    return ds;
}

/// Random solver instance with exactly standardized columns (mean 0,
/// mean-square 1) and a centered response.
struct SolverProblem {
    std::vector<std::vector<double>> columns;
    std::vector<double> response;
};

inline SolverProblem standardized_problem(std::uint64_t seed, std::size_t n, std::size_t p,
                                          double signal = 1.0) {
    aencmi::Rng rng(seed);
    SolverProblem prob;
    prob.columns.resize(p);
    for (auto& col : prob.columns) {
        col.resize(n);
        for (double& v : col) v = rng.normal();
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n);
        double msq = 0.0;
        for (double& v : col) {
            v -= mean;
            msq += v * v;
        }
        msq /= static_cast<double>(n);
        const double scale = 1.0 / std::sqrt(msq);
        for (double& v : col) v *= scale;
    }
    prob.response.resize(n);
    std::vector<double> truth(p);
    for (double& b : truth) b = signal * (rng.next_double() - 0.5);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.3 * rng.normal();
        for (std::size_t j = 0; j < p; ++j) y += prob.columns[j][i] * truth[j];
        prob.response[i] = y;
    }
    double mean = 0.0;
    for (double y : prob.response) mean += y;
    mean /= static_cast<double>(n);
    for (double& y : prob.response) y -= mean;
    return prob;
}

/// Two well-separated Gaussian clouds (first two features carry the class,
/// the rest are noise); linearly separable with margin.
inline aencmi::ExpressionDataset two_cloud_dataset(std::uint64_t seed, std::size_t per_class = 20,
                                                   std::size_t p = 4) {
    aencmi::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> row(p);
            const double center = c == 0 ? -2.0 : 2.0;
            row[0] = center + 0.5 * rng.normal();
            row[1] = center + 0.5 * rng.normal();
            for (std::size_t j = 2; j < p; ++j) row[j] = rng.normal();
            rows.push_back(std::move(row));
            labels.push_back(static_cast<int>(c));
        }
    }
    return make_dataset(rows, labels);
}

/// Two informative features plus pure-noise features. The informative pair
/// shares a latent factor with opposite signs, so given the class they are
/// strongly (anti-)correlated, and together they carry far more signal
/// than either alone.
inline aencmi::ExpressionDataset planted_dataset(std::uint64_t seed, std::size_t per_class = 20,
                                                 std::size_t p = 20, double effect = 1.2,
                                                 double shared_load = 0.85) {
    aencmi::Rng rng(seed);
    const double own_load = std::sqrt(1.0 - shared_load * shared_load);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> row(p);
            const double class_shift = (c == 0 ? -0.5 : 0.5) * effect;
            const double shared = rng.normal();
            row[0] = class_shift + shared_load * shared + own_load * rng.normal();
            row[1] = class_shift - shared_load * shared + own_load * rng.normal();
            for (std::size_t j = 2; j < p; ++j) row[j] = rng.normal();
            rows.push_back(std::move(row));
            labels.push_back(static_cast<int>(c));
        }
    }
    return make_dataset(rows, labels);
}

/// Labels carry no information about any feature. Classes are unbalanced
/// like typical case/control panels.
inline aencmi::ExpressionDataset null_dataset(std::uint64_t seed, std::size_t class0 = 12,
                                              std::size_t class1 = 20, std::size_t p = 30) {
    aencmi::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t count = c == 0 ? class0 : class1;
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<double> row(p);
            for (double& v : row) v = rng.normal();
            rows.push_back(std::move(row));
            labels.push_back(static_cast<int>(c));
        }
    }
    return make_dataset(rows, labels);
}

/// Expression data shaped like a public microarray panel. Class signal
/// lives in a couple of broad "programs": each has one class latent, a
/// short head of marker genes and a tail of co-expressed genes loading
/// the same latent weakly. Most other genes are on/off (two expression
/// states), some with a weak class tilt in their firing rate. A fraction
/// of samples is heavily diluted (low purity), which bounds the reachable
/// accuracy without corrupting the training geometry. Per-gene log-normal
/// scales and offsets mimic raw intensity ranges.
struct MicroarrayConfig {
    std::size_t class0 = 22;
    std::size_t class1 = 40;
    std::size_t genes = 2000;
    std::size_t programs = 4;            // class-associated programs
    std::size_t program_size = 150;
    std::size_t strong_per_program = 7;  // marker-strength head genes
    double strong_load = 0.8;
    double tail_load_max = 0.35;         // graded tail loads U(0.1, this)
    std::size_t free_programs = 2;       // class-free broad programs
    std::size_t free_size = 300;
    double free_load = 0.6;
    std::size_t small_size = 50;         // small tight decoy modules fill
    std::size_t iid_background = 24;     // genes left fully unstructured
    double small_load = 0.55;
    double background_load = 0.25;
    double effect = 2.2;                 // class separation of program latents
    double latent_noise = 1.0;           // within-class spread of program latents
    double atypical_fraction = 0.12;     // per sample heterogeneity
    // Sample purity: a fraction of samples carry strongly diluted program
    // signal (their biological part shrinks toward baseline).
    double diluted_fraction = 0.0;
    double dilution_lo = 0.05;
    double dilution_hi = 0.3;
    // Background genes outside the broad structure are on/off: two
    // expression states with a per-gene on-rate.
    bool binary_background = true;
    double on_rate_lo = 0.2;
    double on_rate_hi = 0.5;
    // Share of on/off genes whose firing rate tilts weakly with the class.
    double binary_class_fraction = 0.15;
    double binary_tilt_lo = 0.08;
    double binary_tilt_hi = 0.2;
    std::uint64_t seed = 7;
};

inline aencmi::ExpressionDataset microarray_like(const MicroarrayConfig& cfg) {
    const std::size_t broad = cfg.programs * cfg.program_size + cfg.free_programs * cfg.free_size;
    if (broad + cfg.iid_background > cfg.genes) throw std::invalid_argument("structured genes exceed gene count");
    const std::size_t small_modules = (cfg.genes - broad - cfg.iid_background) / cfg.small_size;
    aencmi::Rng rng(aencmi::mix_seed(cfg.seed + aencmi::kSeedOffsetSynth));
    const std::size_t n = cfg.class0 + cfg.class1;
    const std::size_t n_latents = cfg.programs + cfg.free_programs + small_modules;

    // latent index of gene g (class programs, then free programs, then
    // small modules, then unstructured background)
    auto latent_of = [&](std::size_t g) -> std::size_t {
        if (g < cfg.programs * cfg.program_size) return g / cfg.program_size;
        std::size_t rest = g - cfg.programs * cfg.program_size;
        if (rest < cfg.free_programs * cfg.free_size) return cfg.programs + rest / cfg.free_size;
        rest -= cfg.free_programs * cfg.free_size;
        if (rest < small_modules * cfg.small_size) {
            return cfg.programs + cfg.free_programs + rest / cfg.small_size;
        }
        return n_latents;  // unstructured
    };

    std::vector<double> program_effect(cfg.programs);
    for (std::size_t m = 0; m < cfg.programs; ++m) {
        program_effect[m] = cfg.effect * rng.uniform(0.9, 1.2) * (m % 2 == 0 ? 1.0 : -1.0);
    }
    std::vector<double> load(cfg.genes, 0.0);
    for (std::size_t g = 0; g < cfg.genes; ++g) {
        const std::size_t m = latent_of(g);
        if (m < cfg.programs) {
            const std::size_t rank = g % cfg.program_size;
            if (rank < cfg.strong_per_program) {
                const double t = cfg.strong_per_program == 1
                                     ? 0.0
                                     : static_cast<double>(rank) /
                                           static_cast<double>(cfg.strong_per_program - 1);
                load[g] = cfg.strong_load * (1.0 - 0.3 * t);
            } else {
                load[g] = rng.uniform(0.1, cfg.tail_load_max);
            }
        } else if (m < cfg.programs + cfg.free_programs) {
            load[g] = cfg.free_load * rng.uniform(0.6, 1.2);
        } else if (m < n_latents) {
            load[g] = cfg.small_load * rng.uniform(0.8, 1.2);
        }
    }
    std::vector<double> gene_scale(cfg.genes), gene_offset(cfg.genes), on_rate(cfg.genes, 0.0),
        on_tilt(cfg.genes, 0.0);
    for (std::size_t g = 0; g < cfg.genes; ++g) {
        gene_scale[g] = std::exp(0.4 * rng.normal());
        gene_offset[g] = 2.0 * rng.normal();
        if (cfg.binary_background && latent_of(g) >= cfg.programs + cfg.free_programs) {
            on_rate[g] = rng.uniform(cfg.on_rate_lo, cfg.on_rate_hi);
            if (rng.next_double() < cfg.binary_class_fraction) {
                const double tilt = rng.uniform(cfg.binary_tilt_lo, cfg.binary_tilt_hi);
                on_tilt[g] = rng.next_double() < 0.5 ? tilt : -tilt;
            }
        }
    }

    std::vector<std::vector<double>> rows(n, std::vector<double>(cfg.genes));
    std::vector<int> labels(n);
    // Atypical samples are fixed per dataset and spread evenly through
    // both classes: every k-th sample expresses like the other class.
    std::vector<char> atypical_mask(n, 0);
    if (cfg.atypical_fraction > 0.0) {
        const auto stride = static_cast<std::size_t>(std::llround(1.0 / cfg.atypical_fraction));
        for (std::size_t i = stride / 2; i < n; i += stride) atypical_mask[i] = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i < cfg.class0 ? 0 : 1;
        labels[i] = y;
        // an atypical sample expresses every program like the other class,
        // so no gene can rescue it
        const bool atypical = atypical_mask[i] != 0;
        const double sign = (y == 0) == atypical ? 0.5 : -0.5;
        const double background = rng.normal();
        std::vector<double> latent(n_latents);
        for (std::size_t m = 0; m < n_latents; ++m) {
            latent[m] = m < cfg.programs ? sign * program_effect[m] + cfg.latent_noise * rng.normal()
                                         : rng.normal();
        }
        const bool diluted = rng.next_double() < cfg.diluted_fraction;
        const double purity = diluted ? rng.uniform(cfg.dilution_lo, cfg.dilution_hi) : 1.0;
        for (std::size_t g = 0; g < cfg.genes; ++g) {
            if (on_rate[g] > 0.0) {
                // on/off expression: high state when the gene fires
                const double rate = std::clamp(on_rate[g] + (y == 1 ? on_tilt[g] : 0.0), 0.02, 0.98);
                rows[i][g] = gene_offset[g] + gene_scale[g] * (rng.next_double() < rate ? 1.5 : -0.5);
                continue;
            }
            const std::size_t m = latent_of(g);
            const double ld = load[g];
            const double own = std::sqrt(
                std::max(0.05, 1.0 - ld * ld - cfg.background_load * cfg.background_load));
            double v = cfg.background_load * background + own * rng.normal();
            if (m < n_latents) v += purity * ld * latent[m];
            rows[i][g] = gene_offset[g] + gene_scale[g] * v;
        }
    }
    return make_dataset(rows, labels);
}

/// Fixture shaped like the 62-sample / 2000-gene colon panel
/// (22 normal vs 40 tumor), tuned so the default pipeline lands near
/// 0.85 accuracy with roughly two dozen selected genes on 31/31 splits.
inline MicroarrayConfig colon_like_config() {
    MicroarrayConfig cfg;
    cfg.class0 = 22;
    cfg.class1 = 40;
    cfg.genes = 2000;
    cfg.programs = 2;
    cfg.program_size = 39;
    cfg.strong_per_program = 8;
    cfg.strong_load = 0.9;
    cfg.tail_load_max = 0.05;
    cfg.free_programs = 0;
    cfg.background_load = 0.05;
    cfg.effect = 2.6;
    cfg.latent_noise = 0.35;
    cfg.atypical_fraction = 0.0;
    cfg.diluted_fraction = 0.32;
    cfg.dilution_lo = 0.05;
    cfg.dilution_hi = 0.3;
    cfg.binary_class_fraction = 0.15;
    cfg.binary_tilt_lo = 0.08;
    cfg.binary_tilt_hi = 0.2;
    cfg.seed = 3;
    return cfg;
}

/// Fixture shaped like the 72-sample / 3571-gene leukemia panel
/// (47 ALL vs 25 AML), tuned for 43/29 splits.
inline MicroarrayConfig leukemia_like_config() {
    MicroarrayConfig cfg = colon_like_config();
    cfg.class0 = 47;
    cfg.class1 = 25;
    cfg.genes = 3571;
    cfg.effect = 2.3;
    cfg.diluted_fraction = 0.33;
    cfg.dilution_lo = 0.02;
    cfg.dilution_hi = 0.12;
    cfg.binary_class_fraction = 0.05;
    cfg.binary_tilt_lo = 0.04;
    cfg.binary_tilt_hi = 0.08;
    cfg.seed = 2;
    return cfg;
}

inline void write_dataset_csv(const aencmi::ExpressionDataset& ds, const std::string& matrix_path,
                              const std::string& labels_path) {
    std::ofstream matrix(matrix_path, std::ios::binary);
    if (!matrix) throw std::runtime_error("cannot write " + matrix_path);
    matrix << "sample_id";
    for (const auto& id : ds.feature_ids) matrix << ',' << id;
    matrix << '\n';
    for (std::size_t i = 0; i < ds.n_samples; ++i) {
        matrix << ds.sample_ids[i];
        for (std::size_t j = 0; j < ds.n_features; ++j) matrix << ',' << aencmi::format_double(ds.at(i, j));
        matrix << '\n';
    }
    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels) throw std::runtime_error("cannot write " + labels_path);
    labels << "sample_id,label\n";
    for (std::size_t i = 0; i < ds.n_samples; ++i) labels << ds.sample_ids[i] << ',' << ds.labels[i] << '\n';
}

}  // namespace fixtures

#endif  // AENCMI_TESTS_FIXTURES_HPP

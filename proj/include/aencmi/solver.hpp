#ifndef AENCMI_SOLVER_HPP
#define AENCMI_SOLVER_HPP

#include <cstddef>
#include <vector>

namespace aencmi {

/// Weighted elastic-net configuration for one fit. The objective is
///
///   J(theta) = (1/(2n)) ||r - X theta||^2
///            + lambda * ( alpha * sum_j w_j |theta_j|
///                       + (1-alpha)/2 * sum_j w_j theta_j^2 )
///
/// over columns standardized to mean zero and mean-square one. The
/// coordinate update under this convention is exactly
/// theta_j <- S(rho_j, lambda*alpha*w_j) / (1 + lambda*(1-alpha)*w_j).
struct SolverConfig {
    double alpha = 0.05;       // in [0,1]: 1 = pure l1, 0 = pure ridge
    double lambda = 0.0;       // > 0
    std::vector<double> weights;  // per-feature penalty factors, all > 0
    double tolerance = 1e-7;   // max coefficient change per sweep
    std::size_t max_sweeps = 10000;
};

struct Coefficients {
    std::vector<double> beta;     // standardized-scale coefficients
    double intercept = 0.0;       // label mean of the training subset
    std::size_t sweeps_used = 0;
    bool converged = false;
    double objective_value = 0.0;
};

/// Solutions along a descending lambda grid; fits[0] sits at lambda_max
/// and is identically zero.
struct PathFit {
    std::vector<double> lambdas;
    std::vector<Coefficients> fits;
    double alpha = 0.0;
    std::vector<double> weights;
};

/// sign(z) * max(|z| - gamma, 0).
inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

double objective_value(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                       const SolverConfig& cfg, const std::vector<double>& beta);

/// Smallest lambda at which the all-zero vector is optimal:
/// max_j |(1/n) x_j' r| / (alpha w_j). Requires alpha > 0.
double lambda_max(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                  double alpha, const std::vector<double>& weights);

/// Cyclic coordinate descent with active-set sweeps. Converged means the
/// largest coefficient update in a full sweep fell below cfg.tolerance and
/// the KKT residual is at most 10x the tolerance. `init` warm-starts the
/// coefficients; `sweep_objectives`, when given, receives J after every
/// sweep (monotone non-increasing).
Coefficients fit(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                 const SolverConfig& cfg, const std::vector<double>* init = nullptr,
                 std::vector<double>* sweep_objectives = nullptr);

/// Log-spaced grid from lambda_max down to lambda_max * lambda_min_ratio,
/// each solution warm-started from the previous one.
PathFit fit_path(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                 double alpha, const std::vector<double>& weights, std::size_t n_lambda,
                 double lambda_min_ratio, double tolerance = 1e-7, std::size_t max_sweeps = 10000);

/// As fit_path but on a caller-supplied descending grid (used by
/// cross-validation so every fold shares one grid).
PathFit fit_path_on_grid(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                         double alpha, const std::vector<double>& weights, const std::vector<double>& lambdas,
                         double tolerance = 1e-7, std::size_t max_sweeps = 10000);

/// Max stationarity residual: for theta_j != 0,
///   |(1/n) x_j'(r - X theta) - lambda alpha w_j sign(theta_j)
///     - lambda (1-alpha) w_j theta_j|;
/// for theta_j == 0, max(0, |(1/n) x_j'(r - X theta)| - lambda alpha w_j).
double check_kkt(const std::vector<std::vector<double>>& columns, const std::vector<double>& response,
                 const SolverConfig& cfg, const std::vector<double>& beta);

std::vector<double> lambda_grid(double lam_max, std::size_t n_lambda, double lambda_min_ratio);

}  // namespace aencmi

#endif  // AENCMI_SOLVER_HPP

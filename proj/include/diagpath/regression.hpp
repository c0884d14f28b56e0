#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace diagpath::regression {

struct SvrOptions {
    double tolerance = 1e-3;            // stop when the maximal KKT violation drops below this
    std::size_t max_updates = 1000000;  // pair updates before giving up
    double psd_tolerance = 1e-8;        // relative to the largest diagonal entry
    bool check_psd = true;
};

struct SvrModel {
    std::vector<double> dual_coeffs;  // alpha_i - alpha_i^*
    double bias = 0;
    std::vector<std::size_t> support;
    double lambda = 0;
    double epsilon = 0;
    std::uint64_t fingerprint = 0;
    bool converged = false;
    std::size_t updates = 0;
    double max_violation = 0;
    double objective = 0;  // dual objective 1/2 c'Kc + eps |c|_1 - y'c

    std::size_t n_train() const { return dual_coeffs.size(); }
    double box() const { return lambda / static_cast<double>(dual_coeffs.size()); }
};

/// FNV-1a over the Gram and target bytes.
std::uint64_t fingerprint(const Eigen::MatrixXd& gram, const std::vector<double>& targets);

/// Throws ConditioningError unless gram is symmetric and PSD within tol * max(1, max diag).
void check_psd(const Eigen::MatrixXd& gram, double tol = 1e-8);

/// epsilon-SVR dual with box lambda / n, solved by SMO on the maximal violating pair.
SvrModel svr_train(const Eigen::MatrixXd& gram, const std::vector<double>& targets, double lambda,
                   double epsilon, const SvrOptions& opts = {});

/// cross_gram (test x train) * dual_coeffs + bias.
std::vector<double> svr_predict(const SvrModel& model, const Eigen::MatrixXd& cross_gram);

/// Value of the dual objective at coefficients c.
double svr_objective(const Eigen::MatrixXd& gram, const std::vector<double>& targets,
                     const std::vector<double>& c, double epsilon);

double mse(const std::vector<double>& pred, const std::vector<double>& truth);

struct CvReport {
    std::vector<double> lambdas;
    std::vector<double> epsilons;
    Eigen::MatrixXd mean_mse;     // [lambda][epsilon]
    std::vector<int> fold_of;     // fold index per training sample
    double best_lambda = 0;
    double best_epsilon = 0;
    double best_mse = 0;
};

/// Folds are a seeded shuffle dealt round robin. Minimum mean held-out MSE wins;
/// ties go to the smaller lambda, then the smaller epsilon.
CvReport grid_search_cv(const Eigen::MatrixXd& gram, const std::vector<double>& targets,
                        const std::vector<double>& lambda_grid, const std::vector<double>& epsilon_grid,
                        int n_folds, std::uint64_t seed, const SvrOptions& opts = {});

}  // namespace diagpath::regression

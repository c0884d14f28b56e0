#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diagpath/feature_path.hpp"
#include "diagpath/signature.hpp"

namespace diagpath::signature {

enum class Route : std::uint8_t {
    kExplicit = 0,     // materialized truncated signatures, then inner products
    kKernelTrick = 1,  // dynamic program over increment grams
    kLinear = 2,       // plain inner product of the flattened paths (crocker)
};

Route parse_route(const std::string& name);
std::string route_name(Route r);

struct KernelOptions {
    int level = 3;
    Route route = Route::kKernelTrick;
    bool normalize = false;
    std::size_t lags = 0;
    std::size_t tau = 1;
    std::size_t memory_budget = kDefaultMemoryBudget;
};

/// Gram matrix between two collections of feature paths. Entries are
/// computed independently in parallel; with symmetric == true (rows and
/// cols are the same collection) only the upper triangle is evaluated and
/// mirrored, so the result is exactly symmetric.
Eigen::MatrixXd signature_gram(const std::vector<FeaturePath>& rows,
                               const std::vector<FeaturePath>& cols, const KernelOptions& opts,
                               bool symmetric = false);

Eigen::MatrixXd signature_gram(const std::vector<FeaturePath>& paths, const KernelOptions& opts);

/// Kernel-trick Gram from a state-kernel provider: cross(i, j) returns the
/// L_i x L_j matrix of state kernel values between row path i and column
/// path j; row_self(i) / col_self(j) the matrix of a path against itself
/// (only used when normalizing).
struct StateKernelSource {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::function<Eigen::MatrixXd(std::size_t, std::size_t)> cross;
    std::function<Eigen::MatrixXd(std::size_t)> row_self;
    std::function<Eigen::MatrixXd(std::size_t)> col_self;
};

Eigen::MatrixXd state_kernel_gram(const StateKernelSource& src, int level, bool normalize,
                                  bool symmetric = false);

}  // namespace diagpath::signature

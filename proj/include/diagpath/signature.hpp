#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "diagpath/feature_path.hpp"

namespace diagpath::signature {

/// Levels 0..M of the tensor algebra over R^D; level k holds D^k
/// coefficients in row-major multi-index order. Level 0 is the scalar 1.
struct TruncatedTensor {
    std::size_t dim = 0;
    std::vector<std::vector<double>> levels;

    TruncatedTensor() = default;
    TruncatedTensor(std::size_t dimension, int level);

    int level() const { return static_cast<int>(levels.size()) - 1; }
    /// Squared norm of each level, level 0 included.
    std::vector<double> level_norms2() const;
    /// Square root of the sum over all levels (level 0 included).
    double norm() const;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{1} << 30;  // bytes

/// Number of coefficients in levels 0..M over R^D (saturates on overflow).
double tensor_size(std::size_t dim, int level);

/// Iterated sums of increments over strictly increasing index tuples, built
/// with S_k(t) = S_k(t-1) + S_{k-1}(t-1) (x) increment(t).
/// Throws SizeError (suggesting the kernel route) past the memory budget.
TruncatedTensor discrete_signature(const FeaturePath& path, int level,
                                   std::size_t memory_budget = kDefaultMemoryBudget);

/// Truncated tensor product (a (x) b) restricted to levels <= min level.
TruncatedTensor tensor_product(const TruncatedTensor& a, const TruncatedTensor& b);

double inner(const TruncatedTensor& a, const TruncatedTensor& b);

/// Multilinear dilation: level k multiplied by lambda^k.
TruncatedTensor dilate(const TruncatedTensor& t, double lambda);

/// Normalization function psi(x) = 2 - 1/x on [1, inf).
double psi(double x);

/// Dilation factor lambda in (0, 1] with sum_k lambda^{2k} n_k = psi(norm) - 1,
/// where n_k are the squared level norms (level 0 first). Found by bisection.
double normalization_lambda(const std::vector<double>& level_norms2);

struct Normalized {
    TruncatedTensor tensor;
    double lambda = 1.0;
};
Normalized tensor_normalize(const TruncatedTensor& t);

/// Inner products of increments, A[s, t] = <p1'(s), p2'(t)>; shape (L1-1) x (L2-1).
using IncrementGram = Eigen::MatrixXd;

IncrementGram increment_gram(const FeaturePath& p1, const FeaturePath& p2);

/// Second-order difference of a state kernel matrix K (L1 x L2):
/// K(j+1,k+1) - K(j,k+1) - K(j+1,k) + K(j,k).
IncrementGram increment_gram_from_kernel(const Eigen::MatrixXd& K);

/// Contribution of every level 0..M to the truncated signature kernel,
/// via R1 = A, Rm = A .* ExclusivePrefixSum2D(R(m-1)). O(M L1 L2) time, O(L1 L2) memory.
std::vector<double> signature_kernel_levels(const IncrementGram& A, int level);

/// 1 + sum of signature_kernel_levels beyond level 0.
double signature_kernel_dp(const IncrementGram& A, int level);

/// Lagged embedding: block i of row t is path(t - i * tau), zero for negative times.
FeaturePath sliding_window(const FeaturePath& path, std::size_t lags, std::size_t tau);

/// Sum of Euclidean increment norms.
double one_variation(const FeaturePath& path);

/// sqrt(exp(ell^2) ell^(M+1) / (M+1)!), a bound on the norm of the levels above M.
double signature_truncation_bound(double ell, int level);

}  // namespace diagpath::signature

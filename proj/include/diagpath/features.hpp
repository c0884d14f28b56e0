#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "diagpath/feature_path.hpp"
#include "diagpath/persistence.hpp"
#include "diagpath/swarm.hpp"

namespace diagpath::features {

using persistence::DiagramPath;
using persistence::DiagramTriple;
using persistence::PersistenceDiagram;

/// Truncated moment vector. Slot 0 is the constant (point mass); then the
/// exponent pairs (a, b) with b >= 1 ordered by total degree, then a ascending.
struct MomentVector {
    int degree = 0;
    double bound = 1.0;
    std::vector<double> coeffs;
};

/// n(n+1)/2 + 1
std::size_t moment_dimension(int degree);

/// Slot of exponent pair (a, b), b >= 1, a + b <= degree.
std::size_t moment_index(int a, int b);

/// Sum over points of sqrt(1/(a! b!)) birth^a lifetime^b for a + b <= n, b >= 1,
/// plus the point count in the constant slot; all scaled by the point weight.
MomentVector moment_features(const PersistenceDiagram& diagram, int degree);

/// Closed-form inner product of the untruncated moment vectors:
/// sum_ij exp(x_i . y_j) - exp(x_i1 y_j1) + 1. Evaluated in extended
/// precision; throws NumericalError when the result overflows a double.
double moment_kernel(const PersistenceDiagram& X, const PersistenceDiagram& Y);

/// sum_i e^{s_i} s_i^{n+1} / (n+1)!, s_i = birth_i + lifetime_i.
double moment_truncation_bound(const PersistenceDiagram& X, int degree);

/// sum_i sqrt(e^{r_i^2} r_i^{2(n+1)} / (n+1)!), r_i^2 = birth_i^2 + lifetime_i^2.
/// Taylor-remainder bound on the norm of the moments above degree n that
/// holds for every diagram.
double moment_tail_norm_bound(const PersistenceDiagram& X, int degree);

/// Betti numbers (b0, b1, b2) at each scale of a strictly increasing grid.
std::vector<std::array<double, 3>> betti_embedding(const DiagramTriple& frame,
                                                   const std::vector<double>& eps_grid);

/// Betti curves on eps_grid at every time_stride-th frame, flattened [dim][time][eps].
std::vector<double> crocker_vector(const DiagramPath& path, const std::vector<double>& eps_grid,
                                   std::size_t time_stride);

/// Scale grids.
std::vector<double> log_grid(double lo, double hi, std::size_t count);
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

/// Cloud coordinates multiplied by N^(1/d).
swarm::Cloud normalize_by_count(const swarm::Cloud& cloud, std::size_t N, int ambient_dim = 3);

/// Diagram viewed as a measure and multiplied by factor (point weights scale).
PersistenceDiagram diagram_scale(const PersistenceDiagram& diagram, double factor);

/// Concatenated moment vectors of the selected homology dimensions per frame.
FeaturePath moment_path(const DiagramPath& path, int degree, int max_dim);

/// Per frame, the flattened truncated signature (levels 1..inner_level) of
/// the Betti embedding over eps_grid.
FeaturePath betti_signature_path(const DiagramPath& path, const std::vector<double>& eps_grid,
                                 int inner_level);

/// Crocker columns [dim][eps] of every time_stride-th frame as a feature path.
FeaturePath crocker_path(const DiagramPath& path, const std::vector<double>& eps_grid,
                         std::size_t time_stride);

/// State kernel matrix between two diagram paths under the closed-form
/// moment kernel summed over homology dimensions 0..max_dim, with the
/// sliding-window lag structure (zero states before the start).
Eigen::MatrixXd moment_state_kernel(const DiagramPath& a, const DiagramPath& b, int max_dim,
                                    std::size_t lags = 0, std::size_t tau = 1);

}  // namespace diagpath::features

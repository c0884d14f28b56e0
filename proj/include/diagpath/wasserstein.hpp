#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "diagpath/persistence.hpp"

namespace diagpath::metrics {

using persistence::PersistenceDiagram;

inline constexpr std::ptrdiff_t kDiagonal = -1;

struct Match {
    std::ptrdiff_t x = kDiagonal;  // index into X or kDiagonal
    std::ptrdiff_t y = kDiagonal;  // index into Y or kDiagonal
    double cost = 0;
};

/// Optimal partial matching. Every point of X and of Y appears in exactly one
/// match; diagonal-to-diagonal pairs are omitted.
struct TransportPlan {
    std::vector<Match> matches;
    double cost = 0;
};

/// Euclidean ground distance in the birth/lifetime plane.
double ground_distance(const persistence::DiagramPoint& a, const persistence::DiagramPoint& b);

/// Padded (|X|+|Y|)^2 cost matrix, row-major: X points then diagonal slots
/// on rows, Y points then diagonal slots on columns.
std::vector<double> padded_cost_matrix(const PersistenceDiagram& X, const PersistenceDiagram& Y);

/// Minimum-cost perfect assignment of a square cost matrix (Hungarian method
/// with potentials). Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

/// Partial 1-Wasserstein distance: matched points pay their ground distance,
/// unmatched points pay their lifetime (distance to the diagonal).
std::pair<double, TransportPlan> w1_partial(const PersistenceDiagram& X, const PersistenceDiagram& Y);

}  // namespace diagpath::metrics

#include "diagpath/wasserstein.hpp"

#include <cmath>
#include <limits>

#include "diagpath/errors.hpp"

namespace diagpath::metrics {

double ground_distance(const persistence::DiagramPoint& a, const persistence::DiagramPoint& b) {
    return std::hypot(a.birth - b.birth, a.lifetime - b.lifetime);
}

std::vector<double> padded_cost_matrix(const PersistenceDiagram& X, const PersistenceDiagram& Y) {
    const std::size_t nx = X.size(), ny = Y.size(), n = nx + ny;
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0;
            if (i < nx && j < ny) v = ground_distance(X.points[i], Y.points[j]);
            else if (i < nx) v = X.points[i].lifetime;
            else if (j < ny) v = Y.points[j].lifetime;
            c[i * n + j] = v;
        }
    }
    return c;
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    if (cost.size() != n * n) throw ArgumentError("assignment: cost matrix must be n x n");
    // 1-based potentials formulation; column 0 is a sentinel.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

std::pair<double, TransportPlan> w1_partial(const PersistenceDiagram& X, const PersistenceDiagram& Y) {
    if (X.homology_dim != Y.homology_dim)
        throw ArgumentError("w1: diagrams have different homology dimensions");
    const std::size_t nx = X.size(), ny = Y.size(), n = nx + ny;
    TransportPlan plan;
    if (n == 0) return {0.0, plan};
    const std::vector<double> cost = padded_cost_matrix(X, Y);
    const std::vector<std::size_t> assign = solve_assignment(cost, n);
    // Canonical summation order: X points by index, then the Y points sent to
    // the diagonal by index. Diagonal rows are interchangeable, so row order
    // alone would make the total depend on which equivalent assignment won.
    std::vector<double> y_to_diag(ny, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = assign[i];
        const double c = cost[i * n + j];
        if (i < nx) {
            plan.cost += c;
            plan.matches.push_back({static_cast<std::ptrdiff_t>(i),
                                    j < ny ? static_cast<std::ptrdiff_t>(j) : kDiagonal, c});
        } else if (j < ny) {
            y_to_diag[j] = c;
        }
    }
    for (std::size_t j = 0; j < ny; ++j)
        if (y_to_diag[j] >= 0) {
            plan.cost += y_to_diag[j];
            plan.matches.push_back({kDiagonal, static_cast<std::ptrdiff_t>(j), y_to_diag[j]});
        }
    return {plan.cost, plan};
}

}  // namespace diagpath::metrics

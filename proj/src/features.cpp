#include "diagpath/features.hpp"

#include <cmath>
#include <limits>

#include "diagpath/errors.hpp"
#include "diagpath/signature.hpp"

namespace diagpath::features {

std::size_t moment_dimension(int degree) {
    return static_cast<std::size_t>(degree) * (degree + 1) / 2 + 1;
}

std::size_t moment_index(int a, int b) {
    const int m = a + b;
    // Slots of degrees 1..m-1 come first: sum_{k<m} k = m(m-1)/2.
    return 1 + static_cast<std::size_t>(m) * (m - 1) / 2 + static_cast<std::size_t>(a);
}

MomentVector moment_features(const PersistenceDiagram& diagram, int degree) {
    if (degree < 1) throw ArgumentError("moments: degree must be at least 1");
    MomentVector mv;
    mv.degree = degree;
    mv.bound = diagram.bound;
    mv.coeffs.assign(moment_dimension(degree), 0.0);

    // norm[a][b] = sqrt(1 / (a! b!))
    std::vector<double> inv_sqrt_fact(degree + 1);
    inv_sqrt_fact[0] = 1.0;
    for (int k = 1; k <= degree; ++k) inv_sqrt_fact[k] = inv_sqrt_fact[k - 1] / std::sqrt(double(k));

    std::vector<double> bpow(degree + 1), lpow(degree + 1);
    for (const auto& p : diagram.points) {
        bpow[0] = lpow[0] = 1.0;
        for (int k = 1; k <= degree; ++k) {
            bpow[k] = bpow[k - 1] * p.birth;
            lpow[k] = lpow[k - 1] * p.lifetime;
        }
        mv.coeffs[0] += 1.0;
        for (int m = 1; m <= degree; ++m)
            for (int a = 0; a < m; ++a) {
                const int b = m - a;
                mv.coeffs[moment_index(a, b)] += inv_sqrt_fact[a] * inv_sqrt_fact[b] * bpow[a] * lpow[b];
            }
    }
    if (diagram.weight != 1.0)
        for (double& c : mv.coeffs) c *= diagram.weight;
    return mv;
}

double moment_kernel(const PersistenceDiagram& X, const PersistenceDiagram& Y) {
    // exp(x.y) - exp(x1 y1) = exp(x1 y1) * expm1(x2 y2)
    long double sum = 0;
    for (const auto& x : X.points)
        for (const auto& y : Y.points) {
            const long double p1 = static_cast<long double>(x.birth) * y.birth;
            const long double p2 = static_cast<long double>(x.lifetime) * y.lifetime;
            sum += std::exp(p1) * std::expm1(p2) + 1.0L;
        }
    sum *= static_cast<long double>(X.weight) * Y.weight;
    if (!(std::abs(sum) <= static_cast<long double>(std::numeric_limits<double>::max())))
        throw NumericalError("moment kernel: value exceeds the double range");
    return static_cast<double>(sum);
}

double moment_truncation_bound(const PersistenceDiagram& X, int degree) {
    if (degree < 1) throw ArgumentError("moments: degree must be at least 1");
    double total = 0;
    for (const auto& p : X.points) {
        const double s = p.birth + p.lifetime;
        if (s == 0) continue;
        total += std::exp(s + (degree + 1) * std::log(s) - std::lgamma(degree + 2.0));
    }
    return X.weight * total;
}

double moment_tail_norm_bound(const PersistenceDiagram& X, int degree) {
    if (degree < 1) throw ArgumentError("moments: degree must be at least 1");
    double total = 0;
    for (const auto& p : X.points) {
        const double r2 = p.birth * p.birth + p.lifetime * p.lifetime;
        if (r2 == 0) continue;
        total += std::exp(0.5 * (r2 + (degree + 1) * std::log(r2) - std::lgamma(degree + 2.0)));
    }
    return X.weight * total;
}

std::vector<std::array<double, 3>> betti_embedding(const DiagramTriple& frame,
                                                   const std::vector<double>& eps_grid) {
    for (std::size_t i = 1; i < eps_grid.size(); ++i)
        if (!(eps_grid[i] > eps_grid[i - 1])) throw ArgumentError("betti: eps grid must increase strictly");
    std::vector<std::array<double, 3>> out(eps_grid.size());
    for (std::size_t i = 0; i < eps_grid.size(); ++i)
        for (int d = 0; d < 3; ++d) out[i][d] = persistence::weighted_betti(frame[d], eps_grid[i]);
    return out;
}

std::vector<double> crocker_vector(const DiagramPath& path, const std::vector<double>& eps_grid,
                                   std::size_t time_stride) {
    if (eps_grid.empty() || path.frames.empty()) throw ArgumentError("crocker: empty grid or path");
    if (time_stride < 1) throw ArgumentError("crocker: time stride must be at least 1");
    const std::size_t n_t = (path.frames.size() + time_stride - 1) / time_stride;
    const std::size_t n_e = eps_grid.size();
    std::vector<double> out(3 * n_t * n_e, 0.0);
    for (std::size_t ti = 0; ti < n_t; ++ti) {
        const auto emb = betti_embedding(path.frames[ti * time_stride], eps_grid);
        for (int d = 0; d < 3; ++d)
            for (std::size_t e = 0; e < n_e; ++e) out[(d * n_t + ti) * n_e + e] = emb[e][d];
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0) || !(hi > lo) || count < 1) throw ArgumentError("log grid: need 0 < lo < hi, count >= 1");
    std::vector<double> g(count);
    if (count == 1) return {lo};
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * double(i) / double(count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    if (!(hi > lo) || count < 1) throw ArgumentError("linear grid: need lo < hi, count >= 1");
    if (count == 1) return {lo};
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = lo + (hi - lo) * double(i) / double(count - 1);
    g.back() = hi;
    return g;
}

swarm::Cloud normalize_by_count(const swarm::Cloud& cloud, std::size_t N, int ambient_dim) {
    if (N < 1) throw ArgumentError("normalize: N must be at least 1");
    if (ambient_dim < 1) throw ArgumentError("normalize: ambient dimension must be positive");
    const double f = N == 1 ? 1.0 : std::pow(static_cast<double>(N), 1.0 / ambient_dim);
    swarm::Cloud out = cloud;
    for (auto& p : out)
        for (double& c : p) c *= f;
    return out;
}

PersistenceDiagram diagram_scale(const PersistenceDiagram& diagram, double factor) {
    if (!(factor > 0)) throw ArgumentError("diagram scale: factor must be positive");
    PersistenceDiagram out = diagram;
    out.weight *= factor;
    return out;
}

FeaturePath moment_path(const DiagramPath& path, int degree, int max_dim) {
    if (max_dim < 0 || max_dim > 2) throw ArgumentError("moments: max_dim must be 0, 1 or 2");
    const std::size_t per = moment_dimension(degree);
    FeaturePath out(path.frames.size(), per * (max_dim + 1), Provenance::kMoment);
    out.times = path.times;
    for (std::size_t t = 0; t < path.frames.size(); ++t) {
        auto row = out.row(t);
        for (int d = 0; d <= max_dim; ++d) {
            const MomentVector mv = moment_features(path.frames[t][d], degree);
            std::copy(mv.coeffs.begin(), mv.coeffs.end(), row.begin() + static_cast<std::ptrdiff_t>(d * per));
        }
    }
    return out;
}

FeaturePath betti_signature_path(const DiagramPath& path, const std::vector<double>& eps_grid,
                                 int inner_level) {
    if (inner_level < 1) throw ArgumentError("betti signature: level must be at least 1");
    const std::size_t width = static_cast<std::size_t>(signature::tensor_size(3, inner_level)) - 1;
    FeaturePath out(path.frames.size(), width, Provenance::kBettiSignature);
    out.times = path.times;
    for (std::size_t t = 0; t < path.frames.size(); ++t) {
        const auto emb = betti_embedding(path.frames[t], eps_grid);
        FeaturePath curve(emb.size(), 3);
        for (std::size_t e = 0; e < emb.size(); ++e)
            for (int d = 0; d < 3; ++d) curve.row(e)[d] = emb[e][d];
        const auto sig = signature::discrete_signature(curve, inner_level);
        auto row = out.row(t);
        std::size_t k = 0;
        for (int lvl = 1; lvl <= inner_level; ++lvl)
            for (double v : sig.levels[lvl]) row[k++] = v;
    }
    return out;
}

FeaturePath crocker_path(const DiagramPath& path, const std::vector<double>& eps_grid,
                         std::size_t time_stride) {
    if (time_stride < 1) throw ArgumentError("crocker: time stride must be at least 1");
    const std::size_t n_t = (path.frames.size() + time_stride - 1) / time_stride;
    const std::size_t n_e = eps_grid.size();
    FeaturePath out(n_t, 3 * n_e, Provenance::kCrockerColumn);
    for (std::size_t ti = 0; ti < n_t; ++ti) {
        out.times[ti] = path.times[ti * time_stride];
        const auto emb = betti_embedding(path.frames[ti * time_stride], eps_grid);
        auto row = out.row(ti);
        for (int d = 0; d < 3; ++d)
            for (std::size_t e = 0; e < n_e; ++e) row[d * n_e + e] = emb[e][d];
    }
    return out;
}

Eigen::MatrixXd moment_state_kernel(const DiagramPath& a, const DiagramPath& b, int max_dim,
                                    std::size_t lags, std::size_t tau) {
    if (tau < 1) throw ArgumentError("moment state kernel: tau must be at least 1");
    const std::size_t la = a.frames.size(), lb = b.frames.size();
    Eigen::MatrixXd base(la, lb);
    for (std::size_t s = 0; s < la; ++s)
        for (std::size_t t = 0; t < lb; ++t) {
            double v = 0;
            for (int d = 0; d <= max_dim; ++d) v += moment_kernel(a.frames[s][d], b.frames[t][d]);
            base(s, t) = v;
        }
    if (lags == 0) return base;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(la, lb);
    for (std::size_t s = 0; s < la; ++s)
        for (std::size_t t = 0; t < lb; ++t)
            for (std::size_t i = 0; i <= lags; ++i)
                if (i * tau <= s && i * tau <= t) K(s, t) += base(s - i * tau, t - i * tau);
    return K;
}

}  // namespace diagpath::features

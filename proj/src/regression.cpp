#include "diagpath/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "diagpath/errors.hpp"
#include "diagpath/parallel.hpp"
#include "diagpath/rng.hpp"

namespace diagpath::regression {

namespace {

void fnv(std::uint64_t& h, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

constexpr double kTau = 1e-12;

}  // namespace

std::uint64_t fingerprint(const Eigen::MatrixXd& gram, const std::vector<double>& targets) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::uint64_t shape[2] = {static_cast<std::uint64_t>(gram.rows()),
                                    static_cast<std::uint64_t>(gram.cols())};
    fnv(h, shape, sizeof shape);
    fnv(h, gram.data(), sizeof(double) * static_cast<std::size_t>(gram.size()));
    fnv(h, targets.data(), sizeof(double) * targets.size());
    return h;
}

void check_psd(const Eigen::MatrixXd& gram, double tol) {
    if (gram.rows() != gram.cols()) throw ArgumentError("gram matrix must be square");
    if (gram.rows() == 0) return;
    if (!gram.allFinite()) throw ConditioningError("gram matrix has non-finite entries");
    const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
    const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol * scale) throw ConditioningError("gram matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -tol * scale)
        throw ConditioningError("gram matrix is not positive semidefinite (min eigenvalue " +
                                std::to_string(lo) + ")");
}

SvrModel svr_train(const Eigen::MatrixXd& gram, const std::vector<double>& targets, double lambda,
                   double epsilon, const SvrOptions& opts) {
    const std::size_t n = targets.size();
    if (n == 0) throw ArgumentError("svr: empty training set");
    if (static_cast<std::size_t>(gram.rows()) != n || static_cast<std::size_t>(gram.cols()) != n)
        throw ArgumentError("svr: gram shape does not match the targets");
    if (!(lambda > 0)) throw ArgumentError("svr: lambda must be positive");
    if (!(epsilon >= 0)) throw ArgumentError("svr: epsilon must be nonnegative");
    if (opts.check_psd) check_psd(gram, opts.psd_tolerance);

    const double C = lambda / static_cast<double>(n);
    // Variables 0..n-1 are alpha (sign +1), n..2n-1 are alpha^* (sign -1).
    const std::size_t m = 2 * n;
    std::vector<double> a(m, 0.0), G(m);
    std::vector<signed char> z(m);
    for (std::size_t t = 0; t < n; ++t) {
        z[t] = 1;
        z[t + n] = -1;
        G[t] = epsilon - targets[t];
        G[t + n] = epsilon + targets[t];
    }
    auto K = [&](std::size_t i, std::size_t j) { return gram(i % n, j % n); };
    auto in_up = [&](std::size_t t) { return z[t] > 0 ? a[t] < C : a[t] > 0; };
    auto in_low = [&](std::size_t t) { return z[t] > 0 ? a[t] > 0 : a[t] < C; };

    SvrModel model;
    model.lambda = lambda;
    model.epsilon = epsilon;
    model.fingerprint = fingerprint(gram, targets);

    std::size_t updates = 0;
    double violation = std::numeric_limits<double>::infinity();
    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = m, j = m;
        for (std::size_t t = 0; t < m; ++t) {
            const double v = -z[t] * G[t];
            if (in_up(t) && v > gmax) gmax = v, i = t;
            if (in_low(t) && v < gmin) gmin = v, j = t;
        }
        violation = (i == m || j == m) ? 0.0 : gmax - gmin;
        if (violation < opts.tolerance) {
            model.converged = true;
            break;
        }
        if (updates >= opts.max_updates) break;
        ++updates;

        const double Qii = K(i, i), Qjj = K(j, j);
        const double Qij = z[i] * z[j] * K(i, j);
        const double ai = a[i], aj = a[j];
        if (z[i] != z[j]) {
            double quad = Qii + Qjj + 2 * Qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) a[j] = 0, a[i] = diff;
            } else if (a[i] < 0) {
                a[i] = 0, a[j] = -diff;
            }
            if (diff > 0) {
                if (a[i] > C) a[i] = C, a[j] = C - diff;
            } else if (a[j] > C) {
                a[j] = C, a[i] = C + diff;
            }
        } else {
            double quad = Qii + Qjj - 2 * Qij;
            if (quad <= 0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) a[i] = C, a[j] = sum - C;
            } else if (a[j] < 0) {
                a[j] = 0, a[i] = sum;
            }
            if (sum > C) {
                if (a[j] > C) a[j] = C, a[i] = sum - C;
            } else if (a[i] < 0) {
                a[i] = 0, a[j] = sum;
            }
        }
        const double di = a[i] - ai, dj = a[j] - aj;
        for (std::size_t t = 0; t < m; ++t)
            G[t] += z[t] * (z[i] * K(i, t) * di + z[j] * K(j, t) * dj);
    }
    model.updates = updates;
    model.max_violation = violation;

    // Offset: average over free variables, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double yG = z[t] * G[t];
        if (a[t] >= C) {
            if (z[t] < 0) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else if (a[t] <= 0) {
            if (z[t] > 0) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else {
            ++n_free;
            sum_free += yG;
        }
    }
    const double rho = n_free > 0 ? sum_free / double(n_free) : 0.5 * (ub + lb);
    model.bias = -rho;

    model.dual_coeffs.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        model.dual_coeffs[t] = a[t] - a[t + n];
        if (model.dual_coeffs[t] != 0) model.support.push_back(t);
    }
    model.objective = svr_objective(gram, targets, model.dual_coeffs, epsilon);
    return model;
}

std::vector<double> svr_predict(const SvrModel& model, const Eigen::MatrixXd& cross_gram) {
    if (static_cast<std::size_t>(cross_gram.cols()) != model.n_train())
        throw ArgumentError("svr predict: cross gram has " + std::to_string(cross_gram.cols()) +
                            " columns, model was trained on " + std::to_string(model.n_train()));
    const Eigen::Map<const Eigen::VectorXd> c(model.dual_coeffs.data(),
                                              static_cast<Eigen::Index>(model.dual_coeffs.size()));
    const Eigen::VectorXd f = cross_gram * c;
    std::vector<double> out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index r = 0; r < f.size(); ++r) out[r] = f[r] + model.bias;
    return out;
}

double svr_objective(const Eigen::MatrixXd& gram, const std::vector<double>& targets,
                     const std::vector<double>& c, double epsilon) {
    const Eigen::Map<const Eigen::VectorXd> cv(c.data(), static_cast<Eigen::Index>(c.size()));
    const Eigen::Map<const Eigen::VectorXd> y(targets.data(), static_cast<Eigen::Index>(targets.size()));
    return 0.5 * cv.dot(gram * cv) + epsilon * cv.lpNorm<1>() - y.dot(cv);
}

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw ArgumentError("mse: length mismatch");
    if (pred.empty()) throw ArgumentError("mse: empty input");
    double s = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

CvReport grid_search_cv(const Eigen::MatrixXd& gram, const std::vector<double>& targets,
                        const std::vector<double>& lambda_grid, const std::vector<double>& epsilon_grid,
                        int n_folds, std::uint64_t seed, const SvrOptions& opts) {
    const std::size_t n = targets.size();
    if (n_folds < 2 || static_cast<std::size_t>(n_folds) > n)
        throw ArgumentError("cv: need 2 <= folds <= training size");
    if (lambda_grid.empty() || epsilon_grid.empty()) throw ArgumentError("cv: empty grid");
    if (static_cast<std::size_t>(gram.rows()) != n || gram.cols() != gram.rows())
        throw ArgumentError("cv: gram shape does not match the targets");
    if (opts.check_psd) check_psd(gram, opts.psd_tolerance);

    CvReport rep;
    rep.lambdas = lambda_grid;
    rep.epsilons = epsilon_grid;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(seed, 0xcf);
    std::shuffle(perm.begin(), perm.end(), rng);
    rep.fold_of.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) rep.fold_of[perm[k]] = static_cast<int>(k % n_folds);

    struct Split {
        Eigen::MatrixXd train, cross;
        std::vector<double> y_train, y_test;
    };
    std::vector<Split> splits(n_folds);
    for (int f = 0; f < n_folds; ++f) {
        std::vector<Eigen::Index> tr, te;
        for (std::size_t k = 0; k < n; ++k) (rep.fold_of[k] == f ? te : tr).push_back(Eigen::Index(k));
        Split& s = splits[f];
        s.train = gram(tr, tr);
        s.cross = gram(te, tr);
        for (auto k : tr) s.y_train.push_back(targets[k]);
        for (auto k : te) s.y_test.push_back(targets[k]);
    }

    SvrOptions inner = opts;
    inner.check_psd = false;  // principal submatrices of a PSD matrix stay PSD
    const std::size_t nl = lambda_grid.size(), ne = epsilon_grid.size();
    std::vector<double> fold_mse(nl * ne * n_folds);
    parallel_for(fold_mse.size(), [&](std::size_t job) {
        const std::size_t f = job % n_folds, pair = job / n_folds;
        const Split& s = splits[f];
        const SvrModel m = svr_train(s.train, s.y_train, lambda_grid[pair / ne], epsilon_grid[pair % ne], inner);
        fold_mse[job] = mse(svr_predict(m, s.cross), s.y_test);
    });

    rep.mean_mse.resize(Eigen::Index(nl), Eigen::Index(ne));
    for (std::size_t p = 0; p < nl * ne; ++p) {
        double s = 0;
        for (int f = 0; f < n_folds; ++f) s += fold_mse[p * n_folds + f];
        rep.mean_mse(Eigen::Index(p / ne), Eigen::Index(p % ne)) = s / n_folds;
    }

    // Scan in (lambda, epsilon) ascending order; strict improvement keeps the earliest tie.
    std::vector<std::size_t> li(nl), ei(ne);
    std::iota(li.begin(), li.end(), 0);
    std::iota(ei.begin(), ei.end(), 0);
    std::stable_sort(li.begin(), li.end(), [&](auto x, auto y) { return lambda_grid[x] < lambda_grid[y]; });
    std::stable_sort(ei.begin(), ei.end(), [&](auto x, auto y) { return epsilon_grid[x] < epsilon_grid[y]; });
    rep.best_mse = std::numeric_limits<double>::infinity();
    for (auto l : li)
        for (auto e : ei) {
            const double v = rep.mean_mse(Eigen::Index(l), Eigen::Index(e));
            if (v < rep.best_mse) {
                rep.best_mse = v;
                rep.best_lambda = lambda_grid[l];
                rep.best_epsilon = epsilon_grid[e];
            }
        }
    if (!std::isfinite(rep.best_mse)) throw NumericalError("cv: no grid pair produced a finite MSE");
    return rep;
}

}  // namespace diagpath::regression

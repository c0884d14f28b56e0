#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "diagpath/errors.hpp"
#include "diagpath/regression.hpp"

using namespace diagpath;
using namespace diagpath::regression;

namespace {

Eigen::MatrixXd random_gram(std::mt19937_64& rng, int n, int features) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(n, features);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < features; ++j) X(i, j) = g(rng);
    return X * X.transpose();
}

// Minimum of 1/2 c'Kc + eps|c|_1 - y'c over |c_i| <= C, sum c = 0, by
// enumerating which coefficients sit at -C, in (-C,0), at 0, in (0,C), at C
// and solving the stationarity system for the free ones.
double qp_oracle(const Eigen::MatrixXd& K, const std::vector<double>& y, double C, double eps) {
    const int n = int(y.size());
    int patterns = 1;
    for (int i = 0; i < n; ++i) patterns *= 5;
    double best = INFINITY;
    std::vector<int> state(n);
    for (int code = 0; code < patterns; ++code) {
        int rest = code;
        for (int i = 0; i < n; ++i) {
            state[i] = rest % 5;
            rest /= 5;
        }
        std::vector<int> free;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (state[i] == 0) c[i] = -C;
            if (state[i] == 4) c[i] = C;
            if (state[i] == 1 || state[i] == 3) free.push_back(i);
        }
        const int f = int(free.size());
        if (f == 0) {
            if (std::abs(c.sum()) > 1e-12 * C) continue;
        } else {
            // rows: K_FF c_F + b 1 = y_F - eps s_F - K_F,fixed c_fixed ; sum c_F = -sum c_fixed
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd rhs(f + 1);
            for (int a = 0; a < f; ++a) {
                const int i = free[a];
                const double s = state[i] == 3 ? 1.0 : -1.0;
                for (int b = 0; b < f; ++b) A(a, b) = K(i, free[b]);
                A(a, f) = 1;
                rhs[a] = y[i] - eps * s - K.row(i).dot(c);
            }
            for (int b = 0; b < f; ++b) A(f, b) = 1;
            rhs[f] = -c.sum();
            const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
            if (!((A * sol - rhs).norm() <= 1e-9 * (1 + rhs.norm()))) continue;
            bool ok = true;
            for (int a = 0; a < f; ++a) {
                const double v = sol[a];
                if (state[free[a]] == 3 && !(v >= 0 && v <= C)) ok = false;
                if (state[free[a]] == 1 && !(v <= 0 && v >= -C)) ok = false;
                c[free[a]] = v;
            }
            if (!ok) continue;
        }
        std::vector<double> cv(c.data(), c.data() + n);
        best = std::min(best, svr_objective(K, y, cv, eps));
    }
    return best;
}

}  // namespace

TEST_CASE("one training sample sits inside the tube") {
    Eigen::MatrixXd K(1, 1);
    K << 2.0;
    for (double eps : {0.0, 0.1, 1.0}) {
        const auto m = svr_train(K, {3.5}, 10.0, eps);
        const auto p = svr_predict(m, K);
        CHECK(std::abs(p[0] - 3.5) <= eps + 1e-12);
        CHECK(m.dual_coeffs[0] == 0);
    }
}

TEST_CASE("two samples on the line reproduce y = x") {
    Eigen::MatrixXd K(2, 2);
    K << 1, 2, 2, 4;  // linear kernel at x = 1, 2
    const auto m = svr_train(K, {1, 2}, 1000.0, 0.0, SvrOptions{1e-9});
    const auto p = svr_predict(m, K);
    CHECK(p[0] == doctest::Approx(1).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(2).epsilon(1e-4));
    // w = c1 + 2 c2 with c1 = -c2, so w = 1 forces c = (-1, 1)
    CHECK(m.dual_coeffs[1] - m.dual_coeffs[0] == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(m.bias == doctest::Approx(0).scale(1).epsilon(1e-4));
}

TEST_CASE("solver objective matches the active-set oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    double worst = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 8;
        const auto K = random_gram(rng, n, 10);
        std::vector<double> y(n);
        for (double& v : y) v = g(rng);
        const double lambda = trial % 2 ? 4.0 : 40.0;
        const double eps = 0.05 * trial;
        const auto m = svr_train(K, y, lambda, eps);
        const double want = qp_oracle(K, y, lambda / n, eps);
        REQUIRE(std::isfinite(want));
        const double rel = std::abs(m.objective - want) / std::max(1.0, std::abs(want));
        worst = std::max(worst, rel);
        CHECK(m.objective >= want - 1e-9 * std::abs(want));
        CHECK(rel <= 1e-6);
    }
    MESSAGE("worst relative objective gap at the default tolerance: " << worst);
}

TEST_CASE("feasibility and KKT at convergence") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 10 + trial;
        const auto K = random_gram(rng, n, 4);
        std::vector<double> y(n);
        for (double& v : y) v = g(rng);
        const double lambda = std::pow(10.0, trial % 5 - 2), eps = 0.02 * (trial % 4);
        const auto m = svr_train(K, y, lambda, eps);
        REQUIRE(m.converged);
        CHECK(m.max_violation < 1e-3);
        double sum = 0;
        for (double c : m.dual_coeffs) {
            CHECK(std::abs(c) <= m.box() * (1 + 1e-12));
            sum += c;
        }
        CHECK(std::abs(sum) <= 1e-8 * m.box() * n);
        const auto p = svr_predict(m, K);
        for (int i = 0; i < n; ++i)
            if (std::abs(y[i] - p[i]) < eps - 1e-3) CHECK(m.dual_coeffs[i] == 0);
        CHECK(m.objective == doctest::Approx(svr_objective(K, y, m.dual_coeffs, eps)));
        CHECK(m.fingerprint == fingerprint(K, y));
    }
}

TEST_CASE("prediction examples") {
    std::mt19937_64 rng(13);
    const auto K = random_gram(rng, 6, 3);
    const std::vector<double> y = {1, -1, 0.5, 2, 0, 1};
    const auto m = svr_train(K, y, 5.0, 0.1);
    const auto train_pred = svr_predict(m, K);
    for (int i = 0; i < 6; ++i) {
        double s = m.bias;
        for (int j = 0; j < 6; ++j) s += K(i, j) * m.dual_coeffs[j];
        CHECK(train_pred[i] == doctest::Approx(s).epsilon(1e-14));
    }
    const auto z = svr_predict(m, Eigen::MatrixXd::Zero(3, 6));
    for (double v : z) CHECK(v == m.bias);
    Eigen::MatrixXd dup(2, 6);
    dup.row(0) = K.row(2);
    dup.row(1) = K.row(2);
    const auto d = svr_predict(m, dup);
    CHECK(d[0] == d[1]);
    CHECK_THROWS_AS(svr_predict(m, Eigen::MatrixXd::Zero(2, 5)), ArgumentError);
}

TEST_CASE("mse") {
    CHECK(mse({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(mse({0, 0}, {1, 1}) == 1);
    CHECK(mse({0, 2}, {0, 0}) == 2);
    CHECK_THROWS(mse({0}, {0, 1}));
}

TEST_CASE("psd check") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(svr_train(bad, {0, 1}, 1, 0), ConditioningError);
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(check_psd(asym), ConditioningError);
    Eigen::MatrixXd ok(2, 2);
    ok << 1, 1, 1, 1;
    CHECK_NOTHROW(check_psd(ok));
    CHECK_THROWS_AS(svr_train(ok, {0, 1}, -1, 0), ArgumentError);
}

TEST_CASE("grid search") {
    std::mt19937_64 rng(15);
    const int n = 20;
    const auto K = random_gram(rng, n, 3);
    const std::vector<double> lg = {1e-2, 1, 100}, eg = {1e-3, 1e-1};

    SUBCASE("constant targets pick the smallest pair") {
        const std::vector<double> y(n, 0.75);
        const auto r = grid_search_cv(K, y, lg, eg, 4, 1);
        CHECK(r.mean_mse.maxCoeff() < 1e-20);
        CHECK(r.best_lambda == 1e-2);
        CHECK(r.best_epsilon == 1e-3);
    }
    SUBCASE("folds partition the samples") {
        std::vector<double> y(n);
        for (double& v : y) v = std::normal_distribution<double>()(rng);
        const auto r = grid_search_cv(K, y, lg, eg, 4, 7);
        REQUIRE(r.fold_of.size() == std::size_t(n));
        std::vector<int> sizes(4, 0);
        for (int f : r.fold_of) {
            REQUIRE(f >= 0);
            REQUIRE(f < 4);
            ++sizes[f];
        }
        for (int s : sizes) CHECK(s == 5);
        CHECK(r.mean_mse.rows() == 3);
        CHECK(r.mean_mse.cols() == 2);
        CHECK(r.best_mse == r.mean_mse.minCoeff());

        const auto again = grid_search_cv(K, y, lg, eg, 4, 7);
        CHECK(again.fold_of == r.fold_of);
        CHECK(again.mean_mse == r.mean_mse);
        CHECK(again.best_lambda == r.best_lambda);
        const auto other = grid_search_cv(K, y, lg, eg, 4, 8);
        CHECK(other.fold_of != r.fold_of);
    }
    SUBCASE("fold count bounds") {
        const std::vector<double> y(n, 1.0);
        CHECK_THROWS_AS(grid_search_cv(K, y, lg, eg, 1, 0), ArgumentError);
        CHECK_THROWS_AS(grid_search_cv(K, y, lg, eg, n + 1, 0), ArgumentError);
    }
}

#include "diagpath/signature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diagpath/errors.hpp"

namespace diagpath::signature {

TruncatedTensor::TruncatedTensor(std::size_t dimension, int level) : dim(dimension) {
    if (level < 0) throw ArgumentError("tensor: level must be nonnegative");
    levels.resize(static_cast<std::size_t>(level) + 1);
    std::size_t width = 1;
    for (auto& l : levels) {
        l.assign(width, 0.0);
        width *= dimension;
    }
    levels[0][0] = 1.0;
}

std::vector<double> TruncatedTensor::level_norms2() const {
    std::vector<double> out(levels.size(), 0.0);
    for (std::size_t k = 0; k < levels.size(); ++k)
        for (double v : levels[k]) out[k] += v * v;
    return out;
}

double TruncatedTensor::norm() const {
    double s = 0;
    for (double v : level_norms2()) s += v;
    return std::sqrt(s);
}

double tensor_size(std::size_t dim, int level) {
    double total = 0, width = 1;
    for (int k = 0; k <= level; ++k) {
        total += width;
        width *= static_cast<double>(dim);
    }
    return total;
}

TruncatedTensor discrete_signature(const FeaturePath& path, int level, std::size_t memory_budget) {
    if (path.length() < 1) throw ArgumentError("signature: path must have at least one state");
    if (level < 0) throw ArgumentError("signature: level must be nonnegative");
    const double bytes = tensor_size(path.dim, level) * sizeof(double);
    if (bytes > static_cast<double>(memory_budget)) {
        std::ostringstream msg;
        msg << "signature: level " << level << " over dimension " << path.dim << " needs " << bytes
            << " bytes (budget " << memory_budget << "); use the kernel-trick route instead";
        throw SizeError(msg.str(), bytes);
    }
    const std::size_t D = path.dim;
    TruncatedTensor S(D, level);
    std::vector<double> inc(D);
    for (std::size_t t = 0; t + 1 < path.length(); ++t) {
        const auto a = path.row(t);
        const auto b = path.row(t + 1);
        for (std::size_t i = 0; i < D; ++i) inc[i] = b[i] - a[i];
        // Descending k keeps S_{k-1} at its value before this increment.
        for (int k = level; k >= 1; --k) {
            const auto& prev = S.levels[k - 1];
            auto& cur = S.levels[k];
            for (std::size_t p = 0; p < prev.size(); ++p) {
                const double c = prev[p];
                double* dst = cur.data() + p * D;
                for (std::size_t i = 0; i < D; ++i) dst[i] += c * inc[i];
            }
        }
    }
    return S;
}

TruncatedTensor tensor_product(const TruncatedTensor& a, const TruncatedTensor& b) {
    if (a.dim != b.dim) throw ArgumentError("tensor product: dimension mismatch");
    const int M = std::min(a.level(), b.level());
    TruncatedTensor out(a.dim, M);
    out.levels[0][0] = a.levels[0][0] * b.levels[0][0];
    for (int k = 1; k <= M; ++k) {
        auto& dst = out.levels[k];
        std::fill(dst.begin(), dst.end(), 0.0);
        for (int i = 0; i <= k; ++i) {
            const auto& x = a.levels[i];
            const auto& y = b.levels[k - i];
            for (std::size_t p = 0; p < x.size(); ++p) {
                const double c = x[p];
                double* row = dst.data() + p * y.size();
                for (std::size_t q = 0; q < y.size(); ++q) row[q] += c * y[q];
            }
        }
    }
    return out;
}

double inner(const TruncatedTensor& a, const TruncatedTensor& b) {
    if (a.dim != b.dim || a.level() != b.level()) throw ArgumentError("inner: tensor shape mismatch");
    double s = 0;
    for (std::size_t k = 0; k < a.levels.size(); ++k) {
        double lk = 0;
        for (std::size_t i = 0; i < a.levels[k].size(); ++i) lk += a.levels[k][i] * b.levels[k][i];
        s += lk;
    }
    return s;
}

TruncatedTensor dilate(const TruncatedTensor& t, double lambda) {
    TruncatedTensor out = t;
    double f = 1.0;
    for (std::size_t k = 1; k < out.levels.size(); ++k) {
        f *= lambda;
        for (double& v : out.levels[k]) v *= f;
    }
    return out;
}

double psi(double x) { return 2.0 - 1.0 / x; }

double normalization_lambda(const std::vector<double>& n2) {
    double total = 0, higher = 0;
    for (std::size_t k = 0; k < n2.size(); ++k) {
        total += n2[k];
        if (k > 0) higher += n2[k];
    }
    if (higher == 0.0) return 1.0;
    const double target = psi(std::sqrt(total)) - 1.0;
    auto lhs = [&](double lambda) {
        double s = 0, f = 1;
        for (std::size_t k = 1; k < n2.size(); ++k) {
            f *= lambda * lambda;
            s += f * n2[k];
        }
        return s;
    };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (lhs(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

Normalized tensor_normalize(const TruncatedTensor& t) {
    const double lambda = normalization_lambda(t.level_norms2());
    if (lambda == 1.0) return {t, 1.0};
    return {dilate(t, lambda), lambda};
}

IncrementGram increment_gram(const FeaturePath& p1, const FeaturePath& p2) {
    if (p1.dim != p2.dim) throw ArgumentError("increment gram: feature dimensions differ");
    if (p1.length() < 1 || p2.length() < 1) throw ArgumentError("increment gram: empty path");
    const std::size_t n1 = p1.length() - 1, n2 = p2.length() - 1, D = p1.dim;
    Eigen::MatrixXd d1(n1, D), d2(n2, D);
    for (std::size_t s = 0; s < n1; ++s)
        for (std::size_t i = 0; i < D; ++i) d1(s, i) = p1.row(s + 1)[i] - p1.row(s)[i];
    for (std::size_t t = 0; t < n2; ++t)
        for (std::size_t i = 0; i < D; ++i) d2(t, i) = p2.row(t + 1)[i] - p2.row(t)[i];
    IncrementGram A(n1, n2);
    for (std::size_t s = 0; s < n1; ++s)
        for (std::size_t t = 0; t < n2; ++t) {
            double v = 0;
            for (std::size_t i = 0; i < D; ++i) v += d1(s, i) * d2(t, i);
            A(s, t) = v;
        }
    return A;
}

IncrementGram increment_gram_from_kernel(const Eigen::MatrixXd& K) {
    if (K.rows() < 1 || K.cols() < 1) throw ArgumentError("increment gram: empty kernel matrix");
    const Eigen::Index n1 = K.rows() - 1, n2 = K.cols() - 1;
    IncrementGram A(n1, n2);
    for (Eigen::Index j = 0; j < n1; ++j)
        for (Eigen::Index k = 0; k < n2; ++k)
            A(j, k) = K(j + 1, k + 1) - K(j, k + 1) - K(j + 1, k) + K(j, k);
    return A;
}

std::vector<double> signature_kernel_levels(const IncrementGram& A, int level) {
    if (level < 0) throw ArgumentError("signature kernel: level must be nonnegative");
    std::vector<double> out(static_cast<std::size_t>(level) + 1, 0.0);
    out[0] = 1.0;
    const Eigen::Index n1 = A.rows(), n2 = A.cols();
    if (level == 0 || n1 == 0 || n2 == 0) return out;

    // R and the prefix table are row-major with a zero guard row/column.
    const std::size_t w = static_cast<std::size_t>(n2) + 1;
    std::vector<double> R(static_cast<std::size_t>(n1) * n2), P((n1 + 1) * w, 0.0);
    for (Eigen::Index s = 0; s < n1; ++s)
        for (Eigen::Index t = 0; t < n2; ++t) R[s * n2 + t] = A(s, t);
    for (int m = 1; m <= level; ++m) {
        if (m > 1) {
            // P[s+1][t+1] = sum_{s' <= s, t' <= t} R[s'][t'], so P[s][t] is the exclusive sum.
            for (Eigen::Index s = 0; s < n1; ++s) {
                double run = 0;
                for (Eigen::Index t = 0; t < n2; ++t) {
                    run += R[s * n2 + t];
                    P[(s + 1) * w + t + 1] = P[s * w + t + 1] + run;
                }
            }
            for (Eigen::Index s = 0; s < n1; ++s)
                for (Eigen::Index t = 0; t < n2; ++t) R[s * n2 + t] = A(s, t) * P[s * w + t];
        }
        double sum = 0;
        for (double v : R) sum += v;
        out[m] = sum;
    }
    return out;
}

double signature_kernel_dp(const IncrementGram& A, int level) {
    const std::vector<double> lv = signature_kernel_levels(A, level);
    double s = 0;
    for (double v : lv) s += v;
    return s;
}

FeaturePath sliding_window(const FeaturePath& path, std::size_t lags, std::size_t tau) {
    if (tau < 1) throw ArgumentError("sliding window: tau must be at least 1");
    const std::size_t L = path.length(), D = path.dim;
    FeaturePath out(L, D * (lags + 1), path.provenance);
    out.times = path.times;
    for (std::size_t t = 0; t < L; ++t) {
        auto dst = out.row(t);
        for (std::size_t i = 0; i <= lags; ++i) {
            if (i * tau > t) continue;  // zero before the start
            const auto src = path.row(t - i * tau);
            std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(i * D));
        }
    }
    return out;
}

double one_variation(const FeaturePath& path) {
    if (path.length() < 1) throw ArgumentError("one_variation: empty path");
    double total = 0;
    for (std::size_t t = 0; t + 1 < path.length(); ++t) {
        double s = 0;
        for (std::size_t i = 0; i < path.dim; ++i) {
            const double d = path.row(t + 1)[i] - path.row(t)[i];
            s += d * d;
        }
        total += std::sqrt(s);
    }
    return total;
}

double signature_truncation_bound(double ell, int level) {
    if (!(ell >= 0)) throw ArgumentError("truncation bound: 1-variation must be nonnegative");
    const double log_b = ell * ell + (level + 1) * std::log(ell) - std::lgamma(level + 2.0);
    return ell == 0 ? 0.0 : std::sqrt(std::exp(log_b));
}

}  // namespace diagpath::signature

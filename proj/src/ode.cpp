#include "diagpath/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diagpath/errors.hpp"

namespace diagpath::ode {

namespace {

// Butcher tableau of the Dormand-Prince 5(4) pair.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// y5 - y4
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants (Hairer & Wanner defaults for DOPRI5).
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;  // h shrinks by at most 5x per step
constexpr double kFacMax = 10.0;

void hermite(double t0, double h, std::span<const double> y0, std::span<const double> f0,
             std::span<const double> y1, std::span<const double> f1, double t,
             std::span<double> out) {
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

}  // namespace

DormandPrince54::DormandPrince54(Rhs rhs, std::size_t dim, Tolerances tol)
    : rhs_(std::move(rhs)), dim_(dim), tol_(tol) {
    if (dim_ == 0) throw ArgumentError("ode: state dimension must be positive");
    if (!(tol_.abs > 0) || !(tol_.rel >= 0)) throw ArgumentError("ode: bad tolerances");
}

double DormandPrince54::error_norm(std::span<const double> err, std::span<const double> y0,
                                   std::span<const double> y1) const {
    double acc = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double sc = tol_.abs + tol_.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(dim_));
}

double DormandPrince54::initial_step(double t0, std::span<const double> y0,
                                     std::span<const double> f0, double span) const {
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double sc = tol_.abs + tol_.rel * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / dim_);
    d1 = std::sqrt(d1 / dim_);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);

    std::vector<double> y1(dim_), f1(dim_);
    for (std::size_t i = 0; i < dim_; ++i) y1[i] = y0[i] + h0 * f0[i];
    rhs_(t0 + h0, y1, f1);
    double d2 = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double sc = tol_.abs + tol_.rel * std::abs(y0[i]);
        const double r = (f1[i] - f0[i]) / sc;
        d2 += r * r;
    }
    d2 = std::sqrt(d2 / dim_) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    double h = std::min(100 * h0, h1);
    if (tol_.max_step > 0) h = std::min(h, tol_.max_step);
    return std::min(h, span);
}

Stats DormandPrince54::integrate(double t0, std::vector<double> y, std::span<const double> sample_times,
                                 const SampleSink& sink) const {
    if (y.size() != dim_) throw ArgumentError("ode: initial state has wrong dimension");
    Stats stats;
    if (sample_times.empty()) return stats;
    if (sample_times.front() < t0) throw ArgumentError("ode: sample time before t0");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i] > sample_times[i - 1]))
            throw ArgumentError("ode: sample times must be strictly increasing");

    const std::size_t n = dim_;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y1(n), err(n),
        out(n);
    std::size_t next = 0;
    double t = t0;

    // Samples that coincide with the start.
    while (next < sample_times.size() && sample_times[next] == t0) {
        if (!sink(next, t0, y)) return stats;
        ++next;
    }
    if (next == sample_times.size()) return stats;

    const double t_end = sample_times.back();
    rhs_(t, y, k1);
    ++stats.rhs_evals;
    double h = initial_step(t, y, k1, t_end - t);
    ++stats.rhs_evals;
    double fac_old = 1e-4;
    bool last_rejected = false;

    while (next < sample_times.size()) {
        if (stats.accepted + stats.rejected >= tol_.max_steps) {
            std::ostringstream msg;
            msg << "ode: step budget exhausted at t=" << t;
            throw IntegrationError(msg.str(), t);
        }
        if (tol_.max_step > 0) h = std::min(h, tol_.max_step);
        const bool final_step = t + h >= t_end;
        if (final_step) h = t_end - t;
        const double h_floor = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < h_floor) {
            std::ostringstream msg;
            msg << "ode: step size underflow (h=" << h << ") at t=" << t;
            throw IntegrationError(msg.str(), t);
        }

        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        rhs_(t + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs_(t + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(t + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double t_new = final_step ? t_end : t + h;
        rhs_(t_new, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        rhs_(t_new, y1, k7);
        stats.rhs_evals += 6;
        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double e = error_norm(err, y, y1);
        if (!std::isfinite(e)) e = 1e10;

        const double fac11 = std::pow(e, kExpo);
        if (e <= 1.0) {
            double fac = fac11 / std::pow(fac_old, kBeta);
            fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            fac_old = std::max(e, 1e-4);

            // Emit every sample inside (t, t_new].
            while (next < sample_times.size() && sample_times[next] <= t_new) {
                const double ts = sample_times[next];
                if (ts == t_new) {
                    if (!sink(next, ts, y1)) return stats;
                } else {
                    hermite(t, t_new - t, y, k1, y1, k7, ts, out);
                    if (!sink(next, ts, out)) return stats;
                }
                ++next;
            }
            t = t_new;
            y.swap(y1);
            k1.swap(k7);
            h = h_new;
            ++stats.accepted;
            last_rejected = false;
        } else {
            h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
            ++stats.rejected;
            last_rejected = true;
        }
    }
    return stats;
}

}  // namespace diagpath::ode

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace diagpath::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Called at every requested output time; returning false stops integration.
using SampleSink = std::function<bool(std::size_t index, double t, std::span<const double> y)>;

struct Tolerances {
    double abs = 1e-8;
    double rel = 1e-6;
    double max_step = 0.0;  // 0 = unbounded
    std::size_t max_steps = 50'000'000;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

/// Dormand-Prince 5(4) with PI step-size control. Dense output between steps
/// is the cubic Hermite interpolant built from the step endpoints and their
/// derivatives (the derivative at the new point comes for free via FSAL).
class DormandPrince54 {
public:
    DormandPrince54(Rhs rhs, std::size_t dim, Tolerances tol = {});

    /// Integrates from (t0, y0) and delivers the state at each of the strictly
    /// increasing sample_times (all >= t0). Throws IntegrationError when the
    /// step size underflows or the step budget is exhausted.
    Stats integrate(double t0, std::vector<double> y0, std::span<const double> sample_times,
                    const SampleSink& sink) const;

private:
    double initial_step(double t0, std::span<const double> y0, std::span<const double> f0,
                        double direction_span) const;
    double error_norm(std::span<const double> err, std::span<const double> y0,
                      std::span<const double> y1) const;

    Rhs rhs_;
    std::size_t dim_;
    Tolerances tol_;
};

}  // namespace diagpath::ode

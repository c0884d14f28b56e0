#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "diagpath/ode.hpp"

namespace diagpath::swarm {

using Point3 = std::array<double, 3>;
using Cloud = std::vector<Point3>;

/// Parameters of the D'Orsogna self-propelled particle model.
struct SwarmParams {
    double mass = 1.0;
    double alpha = 1.0;  // self-propulsion
    double beta = 0.5;   // drag
    double repulsion_strength = 0.6;
    double attraction_strength = 1.0;
    double repulsion_length = 0.3;
    double attraction_length = 1.0;

    /// C = C_r / C_a
    double strength_ratio() const { return repulsion_strength / attraction_strength; }
    /// l = l_r / l_a
    double length_ratio() const { return repulsion_length / attraction_length; }

    /// Nondimensional parameters with C_a = l_a = 1.
    static SwarmParams from_ratios(double C, double ell, double mass = 1.0, double alpha = 1.0,
                                   double beta = 0.5);

    /// Throws ArgumentError unless mass and the four potential parameters are
    /// strictly positive and alpha, beta are nonnegative.
    void validate() const;
};

struct SwarmTrajectory {
    std::vector<double> times;
    std::vector<Cloud> positions;   // [time][agent]
    std::vector<Cloud> velocities;  // [time][agent]
    SwarmParams params;
    std::uint64_t seed = 0;

    std::size_t n_steps() const { return times.size(); }
    std::size_t n_agents() const { return positions.empty() ? 0 : positions.front().size(); }
};

/// Time-indexed point clouds; counts may differ between time steps.
struct PointCloudSeries {
    std::vector<double> times;
    std::vector<Cloud> clouds;
    SwarmParams params;
    std::uint64_t seed = 0;
};

struct SimulateOptions {
    ode::Tolerances tolerances{};
    /// When positive, integration stops early once the trajectory is known to
    /// be unbounded (the returned trajectory is then truncated).
    double abort_displacement = 0.0;
    double abort_cutoff = 0.0;
    /// Pair forces use the direction d / sqrt(r^2 + softening^2) instead of d / r.
    /// The pair force of the model jumps at r = 0 whenever U'(0) != 0, and
    /// fused pairs then chatter at step sizes near the tolerance. Zero keeps
    /// the exact model; equilibrium separations are unchanged either way.
    double softening = 0.0;
};

/// Potential derivative U'(r) of a single pair interaction.
double pair_potential_derivative(const SwarmParams& p, double r);
double pair_potential(const SwarmParams& p, double r);

/// Evaluates the model's right-hand side for the packed state
/// [x_0 .. x_{N-1}, v_0 .. v_{N-1}] (each 3 doubles).
void swarm_rhs(const SwarmParams& p, std::span<const double> state, std::span<double> dstate,
               double softening = 0.0);

/// Random initial state: positions uniform in the unit cube, velocity
/// components Gaussian with mean 1 and variance 1.
std::vector<double> initial_state(std::size_t n_agent, std::uint64_t seed);

/// Integrates from a given packed initial state, sampling n_steps uniform times on [0, t_end].
SwarmTrajectory simulate_from(const SwarmParams& params, std::vector<double> state, double t_end,
                              std::size_t n_steps, const SimulateOptions& opts = {});

SwarmTrajectory simulate(const SwarmParams& params, std::size_t n_agent, double t_end,
                         std::size_t n_steps, std::uint64_t seed, const SimulateOptions& opts = {});

/// True iff some agent coordinate moves more than displacement_limit away from
/// its initial value at a sampled time <= t_cutoff.
bool is_unbounded(const SwarmTrajectory& traj, double displacement_limit = 40.0,
                  double t_cutoff = 200.0);

struct SubsampleScheme {
    enum class Kind { kFixed, kRandom };
    Kind kind = Kind::kFixed;
    std::size_t n = 0;   // fixed count
    std::size_t lo = 0;  // random range, inclusive
    std::size_t hi = 0;

    static SubsampleScheme fixed(std::size_t n) { return {Kind::kFixed, n, 0, 0}; }
    static SubsampleScheme random(std::size_t lo, std::size_t hi) { return {Kind::kRandom, 0, lo, hi}; }
};

/// Independent uniform sample without replacement at each time step.
PointCloudSeries subsample(const SwarmTrajectory& traj, const SubsampleScheme& scheme,
                           std::uint64_t seed);

/// Whole trajectory as a point-cloud series (no subsampling).
PointCloudSeries full_series(const SwarmTrajectory& traj);

/// Length and time units of a rescaling x = length * x', t = time * t'.
struct Scaling {
    double length = 1.0;
    double time = 1.0;
};

/// Rescaling onto C_a = l_a = 1 at unchanged mass: length = l_a,
/// time = l_a / sqrt(C_a), alpha' = alpha * time, beta' = beta * length^2 / time.
/// A trajectory x'(t') of the returned model maps back via x = length * x'(t / time).
std::pair<Scaling, SwarmParams> nondimensionalize(const SwarmParams& p);

}  // namespace diagpath::swarm

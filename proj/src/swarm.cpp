#include "diagpath/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "diagpath/errors.hpp"
#include "diagpath/rng.hpp"

namespace diagpath::swarm {

SwarmParams SwarmParams::from_ratios(double C, double ell, double mass, double alpha, double beta) {
    SwarmParams p;
    p.mass = mass;
    p.alpha = alpha;
    p.beta = beta;
    p.repulsion_strength = C;
    p.attraction_strength = 1.0;
    p.repulsion_length = ell;
    p.attraction_length = 1.0;
    return p;
}

void SwarmParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0; };
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
    if (!positive(mass)) throw ArgumentError("swarm: mass must be positive");
    if (!nonneg(alpha) || !nonneg(beta))
        throw ArgumentError("swarm: propulsion and drag must be nonnegative");
    if (!positive(repulsion_strength) || !positive(attraction_strength) ||
        !positive(repulsion_length) || !positive(attraction_length))
        throw ArgumentError("swarm: interaction strengths and lengths must be positive");
}

double pair_potential(const SwarmParams& p, double r) {
    return p.repulsion_strength * std::exp(-r / p.repulsion_length) -
           p.attraction_strength * std::exp(-r / p.attraction_length);
}

double pair_potential_derivative(const SwarmParams& p, double r) {
    return -(p.repulsion_strength / p.repulsion_length) * std::exp(-r / p.repulsion_length) +
           (p.attraction_strength / p.attraction_length) * std::exp(-r / p.attraction_length);
}

void swarm_rhs(const SwarmParams& p, std::span<const double> state, std::span<double> dstate,
               double softening) {
    const std::size_t n = state.size() / 6;
    const double* x = state.data();
    const double* v = state.data() + 3 * n;
    double* dx = dstate.data();
    double* dv = dstate.data() + 3 * n;

    const double inv_m = 1.0 / p.mass;
    const double kr = p.repulsion_strength / p.repulsion_length;
    const double ka = p.attraction_strength / p.attraction_length;
    const double inv_lr = 1.0 / p.repulsion_length;
    const double inv_la = 1.0 / p.attraction_length;
    const double soft2 = softening * softening;

    for (std::size_t i = 0; i < n; ++i) {
        const double* vi = v + 3 * i;
        const double speed2 = vi[0] * vi[0] + vi[1] * vi[1] + vi[2] * vi[2];
        const double prop = p.alpha - p.beta * speed2;
        for (int k = 0; k < 3; ++k) {
            dx[3 * i + k] = vi[k];
            dv[3 * i + k] = prop * vi[k];
        }
    }
    // -grad_i U = -sum_j U'(r_ij) (x_i - x_j) / r_ij; each pair visited once.
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x + 3 * i;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* xj = x + 3 * j;
            const double d0 = xi[0] - xj[0], d1 = xi[1] - xj[1], d2 = xi[2] - xj[2];
            const double r = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
            if (r == 0.0) continue;
            const double du = -kr * std::exp(-r * inv_lr) + ka * std::exp(-r * inv_la);
            const double s = soft2 > 0 ? du / std::sqrt(r * r + soft2) : du / r;
            dv[3 * i + 0] -= s * d0;
            dv[3 * i + 1] -= s * d1;
            dv[3 * i + 2] -= s * d2;
            dv[3 * j + 0] += s * d0;
            dv[3 * j + 1] += s * d1;
            dv[3 * j + 2] += s * d2;
        }
    }
    for (std::size_t i = 0; i < 3 * n; ++i) dv[i] *= inv_m;
}

std::vector<double> initial_state(std::size_t n_agent, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(1.0, 1.0);
    std::vector<double> state(6 * n_agent);
    for (std::size_t i = 0; i < 3 * n_agent; ++i) state[i] = unit(rng);
    for (std::size_t i = 0; i < 3 * n_agent; ++i) state[3 * n_agent + i] = gauss(rng);
    return state;
}

namespace {

std::vector<double> uniform_grid(double t_end, std::size_t n_steps) {
    std::vector<double> t(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k)
        t[k] = t_end * static_cast<double>(k) / static_cast<double>(n_steps - 1);
    t.back() = t_end;
    return t;
}

Cloud unpack(std::span<const double> y, std::size_t offset, std::size_t n) {
    Cloud c(n);
    for (std::size_t i = 0; i < n; ++i)
        c[i] = {y[offset + 3 * i], y[offset + 3 * i + 1], y[offset + 3 * i + 2]};
    return c;
}

}  // namespace

SwarmTrajectory simulate_from(const SwarmParams& params, std::vector<double> state, double t_end,
                              std::size_t n_steps, const SimulateOptions& opts) {
    params.validate();
    if (state.empty() || state.size() % 6 != 0)
        throw ArgumentError("swarm: packed state must hold 6 values per agent");
    if (!(t_end > 0)) throw ArgumentError("swarm: t_end must be positive");
    if (n_steps < 2) throw ArgumentError("swarm: n_steps must be at least 2");
    const std::size_t n = state.size() / 6;

    SwarmTrajectory traj;
    traj.params = params;
    const std::vector<double> grid = uniform_grid(t_end, n_steps);
    traj.times.reserve(n_steps);
    traj.positions.reserve(n_steps);
    traj.velocities.reserve(n_steps);

    const Cloud start = unpack(state, 0, n);
    const bool watch = opts.abort_displacement > 0;

    ode::DormandPrince54 solver(
        [&params, soft = opts.softening](double, std::span<const double> y, std::span<double> dy) {
            swarm_rhs(params, y, dy, soft);
        },
        state.size(), opts.tolerances);
    solver.integrate(0.0, std::move(state), grid,
                     [&](std::size_t, double t, std::span<const double> y) {
                         traj.times.push_back(t);
                         traj.positions.push_back(unpack(y, 0, n));
                         traj.velocities.push_back(unpack(y, 3 * n, n));
                         if (watch && t <= opts.abort_cutoff) {
                             const Cloud& now = traj.positions.back();
                             for (std::size_t i = 0; i < n; ++i)
                                 for (int k = 0; k < 3; ++k)
                                     if (std::abs(now[i][k] - start[i][k]) > opts.abort_displacement)
                                         return false;
                         }
                         return true;
                     });
    return traj;
}

SwarmTrajectory simulate(const SwarmParams& params, std::size_t n_agent, double t_end,
                         std::size_t n_steps, std::uint64_t seed, const SimulateOptions& opts) {
    if (n_agent < 1) throw ArgumentError("swarm: n_agent must be at least 1");
    SwarmTrajectory traj = simulate_from(params, initial_state(n_agent, seed), t_end, n_steps, opts);
    traj.seed = seed;
    return traj;
}

bool is_unbounded(const SwarmTrajectory& traj, double displacement_limit, double t_cutoff) {
    if (traj.positions.empty()) return false;
    const Cloud& start = traj.positions.front();
    for (std::size_t s = 0; s < traj.times.size() && traj.times[s] <= t_cutoff; ++s) {
        const Cloud& now = traj.positions[s];
        for (std::size_t i = 0; i < now.size(); ++i)
            for (int k = 0; k < 3; ++k)
                if (std::abs(now[i][k] - start[i][k]) > displacement_limit) return true;
    }
    return false;
}

PointCloudSeries full_series(const SwarmTrajectory& traj) {
    return PointCloudSeries{traj.times, traj.positions, traj.params, traj.seed};
}

PointCloudSeries subsample(const SwarmTrajectory& traj, const SubsampleScheme& scheme,
                           std::uint64_t seed) {
    const std::size_t n_agent = traj.n_agents();
    Rng rng = make_rng(seed, 1);
    std::size_t count = 0;
    if (scheme.kind == SubsampleScheme::Kind::kFixed) {
        count = scheme.n;
    } else {
        if (scheme.lo < 1 || scheme.lo > scheme.hi || scheme.hi > n_agent)
            throw ArgumentError("subsample: random range must satisfy 1 <= lo <= hi <= n_agent");
        count = std::uniform_int_distribution<std::size_t>(scheme.lo, scheme.hi)(rng);
    }
    if (count < 1 || count > n_agent)
        throw ArgumentError("subsample: sample size must lie in [1, n_agent]");

    PointCloudSeries out;
    out.times = traj.times;
    out.params = traj.params;
    out.seed = traj.seed;
    out.clouds.reserve(traj.positions.size());
    std::vector<std::size_t> idx(n_agent);
    for (const Cloud& frame : traj.positions) {
        std::iota(idx.begin(), idx.end(), 0);
        // Partial Fisher-Yates: the first `count` slots form the sample.
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n_agent - 1)(rng);
            std::swap(idx[i], idx[j]);
        }
        Cloud c(count);
        for (std::size_t i = 0; i < count; ++i) c[i] = frame[idx[i]];
        out.clouds.push_back(std::move(c));
    }
    return out;
}

std::pair<Scaling, SwarmParams> nondimensionalize(const SwarmParams& p) {
    p.validate();
    Scaling s;
    s.length = p.attraction_length;
    s.time = p.attraction_length / std::sqrt(p.attraction_strength);
    SwarmParams q;
    q.mass = p.mass;
    q.alpha = p.alpha * s.time;
    q.beta = p.beta * s.length * s.length / s.time;
    q.repulsion_strength = p.strength_ratio();
    q.attraction_strength = 1.0;
    q.repulsion_length = p.length_ratio();
    q.attraction_length = 1.0;
    return {s, q};
}

}  // namespace diagpath::swarm

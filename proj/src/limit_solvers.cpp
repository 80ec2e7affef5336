#include "hetero_rd/limit_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hetero_rd/error.hpp"

namespace hetero_rd {

Field restrict_field(const Field& field, CellRange range) {
    if (range.last > field.values.size() || range.first > range.last) {
        throw Error(ErrorCode::DimensionMismatch, "cell range exceeds the field");
    }
    return {field.time, {field.values.begin() + static_cast<std::ptrdiff_t>(range.first),
                         field.values.begin() + static_cast<std::ptrdiff_t>(range.last)}};
}

Trajectory solve_neumann_limit(const Grid1D& grid, const BistableReaction& r, const Field& u0,
                               const TimeStepConfig& cfg, const SolveOptions& options) {
    if (!grid.has_inner_region()) {
        throw Error(ErrorCode::InvalidArgument, "the Neumann limit needs an inner region");
    }
    const auto inner = grid.inner_cells();
    const Grid1D sub = grid.subgrid(inner);
    const auto unit = DiffusivityProfile::sharp(sub, 1.0);
    return solve(sub, unit, r, restrict_field(u0, inner), cfg, options);
}

namespace {

double rk4_step(const BistableReaction& f, double u, double h) {
    const double k1 = f(u);
    const double k2 = f(u + 0.5 * h * k1);
    const double k3 = f(u + 0.5 * h * k2);
    const double k4 = f(u + h * k3);
    return u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double advance(const BistableReaction& f, double u, double t0, double t1, double dt) {
    const double span = t1 - t0;
    if (span <= 0.0) return u;
    const auto steps = static_cast<long>(std::ceil(span / dt - 1e-9));
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) u = rk4_step(f, u, h);
    return u;
}

}  // namespace

double integrate_reaction_ode(const BistableReaction& r, double u0, double t_end, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "ODE dt must be > 0");
    return advance(r, u0, 0.0, t_end, dt);
}

Trajectory solve_ode_limit(const Grid1D& grid, const Field& u0, const BistableReaction& r,
                           std::span<const double> times, const OdeOptions& options) {
    if (!(options.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "ODE dt must be > 0");
    if (u0.values.size() != grid.n_cells()) {
        throw Error(ErrorCode::DimensionMismatch, "initial field size does not match the grid");
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > (k == 0 ? 0.0 : times[k - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "ODE output times must be positive and increasing");
        }
    }

    Trajectory traj{grid, {}, {}};
    traj.meta.alpha = r.alpha();
    traj.meta.reaction_scale = r.scale();
    traj.meta.upper_bound = r.upper_bound();
    traj.meta.epsilon = 0.0;
    traj.meta.config.dt = options.dt;
    traj.meta.config.t_end = times.empty() ? 0.0 : times.back();
    traj.meta.config.snapshot_times.assign(times.begin(), times.end());
    traj.snapshots.push_back({0.0, u0.values});
    for (double t : times) traj.snapshots.push_back({t, std::vector<double>(u0.values.size())});

    // Each cell is integrated from t = 0 through every output time, so the
    // result for a cell does not depend on how cells are batched.
    auto run_cells = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            double u = u0.values[i];
            double t = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                u = advance(r, u, t, times[k], options.dt);
                t = times[k];
                traj.snapshots[k + 1].values[i] = u;
            }
        }
    };

    const std::size_t n = u0.values.size();
    const auto workers = static_cast<std::size_t>(std::clamp(options.workers, 1, 256));
    if (workers == 1 || n < 2 * workers) {
        run_cells(0, n);
        return traj;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t first = 0; first < n; first += chunk) {
        pool.emplace_back(run_cells, first, std::min(n, first + chunk));
    }
    pool.clear();
    return traj;
}

Field asymptotic_profile(const Field& u0, const BistableReaction& r) {
    constexpr double kEquilibriumTol = 1e-12;
    Field out{u0.time, std::vector<double>(u0.values.size())};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double v = u0.values[i];
        if (std::abs(v - r.alpha()) <= kEquilibriumTol) {
            out.values[i] = r.alpha();
        } else {
            out.values[i] = v < r.alpha() ? 0.0 : 1.0;
        }
    }
    return out;
}

}  // namespace hetero_rd

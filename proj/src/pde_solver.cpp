#include "hetero_rd/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hetero_rd/error.hpp"

namespace hetero_rd {

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

void TimeStepConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
    if (!(theta >= 0.5 && theta <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "theta must lie in [0.5, 1]");
    }
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw Error(ErrorCode::InvalidArgument, "t_end must be finite and >= 0");
    }
    if (!(newton.tol > 0.0) || newton.max_iter < 1) {
        throw Error(ErrorCode::InvalidArgument, "Newton tolerance and iteration cap must be positive");
    }
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        const double s = snapshot_times[i];
        if (!(s >= 0.0 && s <= t_end * (1.0 + 1e-12))) {
            std::ostringstream msg;
            msg << "snapshot time " << s << " outside [0, t_end = " << t_end << "]";
            throw Error(ErrorCode::InvalidArgument, msg.str());
        }
        if (i > 0 && !(s > snapshot_times[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "snapshot times must be strictly increasing");
        }
    }
    for (std::size_t i = 0; i < dt_changes.size(); ++i) {
        if (!(dt_changes[i].dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt change needs dt > 0");
        if (i > 0 && !(dt_changes[i].from_time > dt_changes[i - 1].from_time)) {
            throw Error(ErrorCode::InvalidArgument, "dt changes must be sorted by time");
        }
    }
}

double TimeStepConfig::dt_at(double t) const {
    double out = dt;
    for (const auto& change : dt_changes) {
        if (t >= change.from_time - 1e-12 * std::max(1.0, std::abs(change.from_time))) out = change.dt;
    }
    return out;
}

const Field& Trajectory::at(double t) const {
    for (const auto& s : snapshots) {
        if (same_time(s.time, t)) return s;
    }
    std::ostringstream msg;
    msg << "no snapshot recorded at t = " << t;
    throw Error(ErrorCode::InvalidArgument, msg.str());
}

ThetaStepper::ThetaStepper(const TridiagonalOperator& op, const BistableReaction& r, double theta,
                           NewtonOptions newton)
    : op_(op), reaction_(r), theta_(theta), newton_(newton) {
    const std::size_t n = op.size();
    for (auto* v : {&old_, &explicit_part_, &lu_, &residual_, &delta_, &jac_diag_, &scratch_}) {
        v->resize(n);
    }
    jac_off_lo_.resize(n > 0 ? n - 1 : 0);
    jac_off_up_.resize(n > 0 ? n - 1 : 0);
}

int ThetaStepper::step(std::vector<double>& u, double dt) {
    const std::size_t n = op_.size();
    if (u.size() != n) throw Error(ErrorCode::DimensionMismatch, "field size does not match operator");
    std::copy(u.begin(), u.end(), old_.begin());

    const double explicit_weight = 1.0 - theta_;
    if (explicit_weight > 0.0) {
        op_.apply(old_, explicit_part_);
        for (std::size_t i = 0; i < n; ++i) {
            explicit_part_[i] = explicit_weight * (explicit_part_[i] + reaction_(old_[i]));
        }
    } else {
        std::fill(explicit_part_.begin(), explicit_part_.end(), 0.0);
    }

    const double implicit_dt = theta_ * dt;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        jac_off_lo_[i] = -implicit_dt * op_.lower[i];
        jac_off_up_[i] = -implicit_dt * op_.upper[i];
    }

    for (int iter = 0;; ++iter) {
        op_.apply(u, lu_);
        double res_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            residual_[i] = u[i] - old_[i] - dt * (theta_ * (lu_[i] + reaction_(u[i])) + explicit_part_[i]);
            res_max = std::max(res_max, std::abs(residual_[i]));
        }
        if (!std::isfinite(res_max)) {
            throw Error(ErrorCode::NewtonDiverged, "non-finite residual; dt too large?");
        }
        if (res_max < newton_.tol) return iter;
        if (iter >= newton_.max_iter) {
            std::ostringstream msg;
            msg << "no convergence after " << iter << " iterations (residual " << res_max
                << ", dt = " << dt << ")";
            throw Error(ErrorCode::NewtonDiverged, msg.str());
        }
        for (std::size_t i = 0; i < n; ++i) {
            jac_diag_[i] = 1.0 - implicit_dt * (op_.diag[i] + reaction_.derivative(u[i]));
        }
        thomas_solve(jac_off_lo_, jac_diag_, jac_off_up_, residual_, delta_, scratch_);
        for (std::size_t i = 0; i < n; ++i) u[i] -= delta_[i];
    }
}

Field step_theta(const Field& state, const TridiagonalOperator& op, const BistableReaction& r,
                 double dt, double theta, const NewtonOptions& newton) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
    for (double v : state.values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInitialData, "state is not finite");
    }
    ThetaStepper stepper(op, r, theta, newton);
    Field next{state.time + dt, state.values};
    stepper.step(next.values, dt);
    return next;
}

Trajectory solve(const Grid1D& grid, const DiffusivityProfile& profile,
                 const BistableReaction& r, const Field& u0, const TimeStepConfig& cfg,
                 const SolveOptions& options) {
    cfg.validate();
    const std::size_t n = grid.n_cells();
    if (u0.values.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "initial field size does not match the grid");
    }
    const double upper = r.upper_bound();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = u0.values[i];
        if (!std::isfinite(v) || v < 0.0 || v > upper) {
            std::ostringstream msg;
            msg << "u0[" << i << "] = " << v << " outside [0, " << upper << "]";
            throw Error(ErrorCode::InvalidInitialData, msg.str());
        }
    }

    const auto face_d = face_diffusivity(profile, grid, options.averaging);
    const auto op = assemble_diffusion(grid, face_d);
    ThetaStepper stepper(op, r, cfg.theta, cfg.newton);

    Trajectory traj{grid, {}, {}};
    traj.meta.epsilon = profile.epsilon();
    traj.meta.delta = profile.delta();
    traj.meta.alpha = r.alpha();
    traj.meta.reaction_scale = r.scale();
    traj.meta.upper_bound = upper;
    traj.meta.averaging = options.averaging;
    traj.meta.config = cfg;

    // Every time the integration must land on exactly.
    std::vector<double> stops;
    for (double s : cfg.snapshot_times) {
        if (s > 0.0) stops.push_back(s);
    }
    for (const auto& c : cfg.dt_changes) {
        if (c.from_time > 0.0 && c.from_time < cfg.t_end) stops.push_back(c.from_time);
    }
    stops.push_back(cfg.t_end);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end(), same_time), stops.end());

    Field state{0.0, u0.values};
    traj.snapshots.push_back(state);
    if (options.observer) options.observer(state);

    auto is_snapshot = [&](double t) {
        return std::any_of(cfg.snapshot_times.begin(), cfg.snapshot_times.end(),
                           [&](double s) { return s > 0.0 && same_time(s, t); });
    };

    const double lo = -options.bound_tolerance;
    const double hi = upper + options.bound_tolerance;
    double t = 0.0;
    for (double stop : stops) {
        if (stop <= 0.0) continue;
        while (!same_time(t, stop) && t < stop) {
            double h = cfg.dt_at(t);
            const double remaining = stop - t;
            const bool landing = remaining <= h * (1.0 + 1e-6);
            if (landing) h = remaining;
            const int iters = stepper.step(state.values, h);
            traj.meta.max_newton_iterations = std::max(traj.meta.max_newton_iterations, iters);
            ++traj.meta.steps;
            t = landing ? stop : t + h;
            state.time = t;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = state.values[i];
                if (!(v >= lo && v <= hi)) {
                    std::ostringstream msg;
                    msg.precision(17);
                    msg << "u[" << i << "] = " << v << " at t = " << t << " leaves [0, " << upper
                        << "]";
                    throw Error(ErrorCode::BoundViolation, msg.str());
                }
            }
            if (options.observer) options.observer(state);
        }
        if (is_snapshot(stop)) traj.snapshots.push_back(state);
    }
    return traj;
}

double evaluate_datum(const InitialDatum& datum, double x) {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SinQuarter>) {
                return std::sin(std::numbers::pi * x / 4.0);
            } else if constexpr (std::is_same_v<T, ConstantDatum>) {
                return d.value;
            } else {
                if (d.x.empty() || d.x.size() != d.u.size()) {
                    throw Error(ErrorCode::InvalidArgument, "table datum needs matching x/u nodes");
                }
                if (x <= d.x.front()) return d.u.front();
                if (x >= d.x.back()) return d.u.back();
                const auto it = std::upper_bound(d.x.begin(), d.x.end(), x);
                const auto k = static_cast<std::size_t>(it - d.x.begin());
                const double w = (x - d.x[k - 1]) / (d.x[k] - d.x[k - 1]);
                return (1.0 - w) * d.u[k - 1] + w * d.u[k];
            }
        },
        datum);
}

InitialDatum parse_datum(const std::string& name) {
    if (name == "sin_quarter") return SinQuarter{};
    const std::string prefix = "constant:";
    if (name.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            const double c = std::stod(name.substr(prefix.size()), &used);
            if (used == name.size() - prefix.size()) return ConstantDatum{c};
        } catch (const std::exception&) {
        }
    }
    throw Error(ErrorCode::UnknownDatum, "unknown initial datum '" + name + "'");
}

std::string datum_name(const InitialDatum& datum) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SinQuarter>) {
                return "sin_quarter";
            } else if constexpr (std::is_same_v<T, ConstantDatum>) {
                std::ostringstream s;
                s.precision(17);
                s << "constant:" << d.value;
                return s.str();
            } else {
                return "table";
            }
        },
        datum);
}

Field initial_field(const Grid1D& grid, const InitialDatum& datum) {
    Field out{0.0, std::vector<double>(grid.n_cells())};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = evaluate_datum(datum, grid.center(i));
    }
    return out;
}

}  // namespace hetero_rd

#include "hetero_rd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hetero_rd/error.hpp"

namespace hetero_rd {

std::vector<std::size_t> cells_in(const Grid1D& grid, RegionSelector region) {
    std::vector<std::size_t> out;
    const auto inner = grid.inner_cells();
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const bool is_inner = inner.contains(i);
        if (region == RegionSelector::All || (region == RegionSelector::Inner) == is_inner) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

void require_size(const Grid1D& grid, const Field& f) {
    if (f.values.size() != grid.n_cells()) {
        throw Error(ErrorCode::GridMismatch, "field does not live on this grid");
    }
}

std::vector<double> trapezoid_weights(const std::vector<Field>& snaps) {
    std::vector<double> w(snaps.size(), 0.0);
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        const double h = snaps[k].time - snaps[k - 1].time;
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    return w;
}

double squared_l2(const Grid1D& grid, const Field& u, const Field& v,
                  const std::vector<std::size_t>& cells) {
    double s = 0.0;
    for (auto i : cells) {
        const double d = u.values[i] - v.values[i];
        s += d * d;
    }
    return s * grid.dx();
}

}  // namespace

double l2_space(const Grid1D& grid, const Field& u, const Field& v, RegionSelector region) {
    require_size(grid, u);
    require_size(grid, v);
    return std::sqrt(squared_l2(grid, u, v, cells_in(grid, region)));
}

double sup_distance(const Grid1D& grid, const Field& u, const Field& v, RegionSelector region) {
    require_size(grid, u);
    require_size(grid, v);
    double m = 0.0;
    for (auto i : cells_in(grid, region)) m = std::max(m, std::abs(u.values[i] - v.values[i]));
    return m;
}

double l2_space_time(const Trajectory& a, const Trajectory& b, RegionSelector region) {
    if (!a.grid.same_geometry(b.grid)) {
        throw Error(ErrorCode::GridMismatch, "trajectories live on different grids");
    }
    if (a.snapshots.size() != b.snapshots.size()) {
        throw Error(ErrorCode::GridMismatch, "trajectories have different snapshot counts");
    }
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const double ta = a.snapshots[k].time;
        const double tb = b.snapshots[k].time;
        if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(ta))) {
            throw Error(ErrorCode::GridMismatch, "trajectories have different snapshot times");
        }
    }
    const auto cells = cells_in(a.grid, region);
    const auto w = trapezoid_weights(a.snapshots);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        s += w[k] * squared_l2(a.grid, a.snapshots[k], b.snapshots[k], cells);
    }
    return std::sqrt(s);
}

double interface_gradient(const Field& state, const Grid1D& grid, InterfaceSelector which,
                          InterfaceSide side) {
    require_size(grid, state);
    if (!grid.has_inner_region()) {
        throw Error(ErrorCode::InvalidArgument, "interface gradients need two interfaces");
    }
    const auto faces = grid.interface_faces();
    const std::size_t face = which == InterfaceSelector::Left ? faces[0] : faces[1];
    // +1: the side lies to the right of the face.
    const bool rightwards = (which == InterfaceSelector::Left) == (side == InterfaceSide::InnerSide);

    std::size_t available = 0;
    if (which == InterfaceSelector::Left) {
        available = side == InterfaceSide::InnerSide ? faces[1] - faces[0] : faces[0];
    } else {
        available = side == InterfaceSide::InnerSide ? faces[1] - faces[0] : grid.n_cells() - faces[1];
    }
    if (available < 3) {
        throw Error(ErrorCode::TooFewCells,
                    "need 3 cells on the requested side, have " + std::to_string(available));
    }

    std::size_t cell[3];
    for (std::size_t k = 0; k < 3; ++k) cell[k] = rightwards ? face + k : face - 1 - k;
    const double xf = grid.face(face);
    double s[3];
    for (int k = 0; k < 3; ++k) s[k] = grid.center(cell[k]) - xf;
    // Derivative at s = 0 of the Lagrange basis through s[0..2].
    double grad = 0.0;
    for (int j = 0; j < 3; ++j) {
        const int p = (j + 1) % 3;
        const int q = (j + 2) % 3;
        const double weight = -(s[p] + s[q]) / ((s[j] - s[p]) * (s[j] - s[q]));
        grad += weight * state.values[cell[j]];
    }
    return grad;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> values) {
    if (x.size() != values.size()) {
        throw Error(ErrorCode::DimensionMismatch, "fit inputs differ in length");
    }
    if (x.size() < 3) throw Error(ErrorCode::InvalidArgument, "fit needs at least 3 points");
    const auto n = static_cast<double>(x.size());
    std::vector<double> lx(x.size()), ly(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(values[i] > 0.0)) {
            throw Error(ErrorCode::NonPositiveInput, "power-law fit needs positive inputs");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(values[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "fit needs distinct abscissae");
    PowerLawFit fit;
    fit.a = sxy / sxx;
    fit.b = my - fit.a * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.a * lx[i] + fit.b);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

double EnergyReport::relative_residual() const {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0.0 ? identity_residual / scale : identity_residual;
}

EnergyAccumulator::EnergyAccumulator(const Grid1D& grid, const DiffusivityProfile& profile,
                                     const BistableReaction& r, const BistableBounds& bounds,
                                     FaceAveraging averaging)
    : grid_(grid),
      face_d_(face_diffusivity(profile, grid, averaging)),
      reaction_(r),
      bounds_(bounds),
      inner_(grid.inner_cells()) {}

EnergyAccumulator::Rates EnergyAccumulator::rates(std::span<const double> u) const {
    const double dx = grid_.dx();
    Rates out{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < u.size(); ++i) out.reaction += reaction_(u[i]) * u[i] * dx;
    for (std::size_t f = 1; f < u.size(); ++f) {
        const double g2 = (u[f] - u[f - 1]) * (u[f] - u[f - 1]) / dx;
        out.dissipation += face_d_[f] * g2;
        if (f > inner_.first && f < inner_.last) out.inner_gradient += g2;
    }
    return out;
}

void EnergyAccumulator::add(const Field& state) {
    if (state.values.size() != grid_.n_cells()) {
        throw Error(ErrorCode::GridMismatch, "state does not live on the accumulator grid");
    }
    double half_norm = 0.0;
    for (double v : state.values) half_norm += v * v;
    half_norm *= 0.5 * grid_.dx();
    const Rates now = rates(state.values);
    if (samples_ == 0) {
        t0_ = state.time;
        half_norm0_ = half_norm;
    } else {
        const double h = state.time - t_prev_;
        if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy samples must advance in time");
        dissipation_ += 0.5 * h * (prev_.dissipation + now.dissipation);
        reaction_work_ += 0.5 * h * (prev_.reaction + now.reaction);
        inner_gradient_ += 0.5 * h * (prev_.inner_gradient + now.inner_gradient);
    }
    half_norm_last_ = half_norm;
    prev_ = now;
    t_prev_ = state.time;
    ++samples_;
}

EnergyReport EnergyAccumulator::report() const {
    if (samples_ < 2) {
        throw Error(ErrorCode::InsufficientSnapshots, "energy report needs at least 2 states");
    }
    EnergyReport rep;
    rep.lhs = half_norm_last_ + dissipation_;
    rep.rhs = half_norm0_ + reaction_work_;
    rep.bound_inner = inner_gradient_;
    rep.final_time = t_prev_;
    const double m = reaction_.upper_bound();
    const double omega = grid_.length();
    rep.c1_bound = 0.5 * omega * m * m + m * bounds_.max_abs_f * omega * (t_prev_ - t0_);
    rep.identity_residual = std::abs(rep.lhs - rep.rhs);
    rep.samples = samples_;
    return rep;
}

EnergyReport energy_report(const Trajectory& traj, const DiffusivityProfile& profile,
                           const BistableReaction& r, const BistableBounds& bounds) {
    if (traj.snapshots.size() < 2) {
        throw Error(ErrorCode::InsufficientSnapshots, "energy report needs at least 2 snapshots");
    }
    EnergyAccumulator acc(traj.grid, profile, r, bounds, traj.meta.averaging);
    for (const auto& s : traj.snapshots) acc.add(s);
    return acc.report();
}

std::vector<TestFunction> standard_test_bank(const Grid1D& grid, double t_end) {
    if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "test bank needs t_end > 0");
    using F = std::function<double(double)>;
    struct Factor {
        std::string name;
        F value;
        F deriv;
    };
    const double x0 = grid.origin();
    const double len = grid.length();
    const double pi = std::numbers::pi;

    std::vector<Factor> space = {
        {"1", [](double) { return 1.0; }, [](double) { return 0.0; }},
        {"x", [x0](double x) { return x - x0; }, [](double) { return 1.0; }},
        {"x^2", [x0](double x) { return (x - x0) * (x - x0); }, [x0](double x) { return 2.0 * (x - x0); }},
    };
    for (int k = 1; k <= 3; ++k) {
        const double w = k * pi / len;
        space.push_back({"cos" + std::to_string(k) + "x", [=](double x) { return std::cos(w * (x - x0)); },
                         [=](double x) { return -w * std::sin(w * (x - x0)); }});
    }
    std::vector<Factor> time = {
        {"1", [](double) { return 1.0; }, [](double) { return 0.0; }},
        {"t", [](double t) { return t; }, [](double) { return 1.0; }},
    };
    for (int k = 1; k <= 3; ++k) {
        const double w = k * pi / t_end;
        time.push_back({"cos" + std::to_string(k) + "t", [=](double t) { return std::cos(w * t); },
                        [=](double t) { return -w * std::sin(w * t); }});
    }

    std::vector<TestFunction> bank;
    for (const auto& sx : space) {
        for (const auto& st : time) {
            TestFunction tf;
            tf.name = sx.name + "*" + st.name;
            tf.phi = [a = sx.value, b = st.value](double t, double x) { return a(x) * b(t); };
            tf.phi_t = [a = sx.value, b = st.deriv](double t, double x) { return a(x) * b(t); };
            tf.phi_x = [a = sx.deriv, b = st.value](double t, double x) { return a(x) * b(t); };
            bank.push_back(std::move(tf));
        }
    }
    return bank;
}

std::vector<double> weak_residuals(const Trajectory& traj, const DiffusivityProfile& profile,
                                   const BistableReaction& r, std::span<const TestFunction> bank) {
    if (traj.snapshots.size() < 2) {
        throw Error(ErrorCode::InsufficientSnapshots, "weak residual needs at least 2 snapshots");
    }
    const Grid1D& grid = traj.grid;
    const auto face_d = face_diffusivity(profile, grid, traj.meta.averaging);
    const auto w = trapezoid_weights(traj.snapshots);
    const double dx = grid.dx();
    const std::size_t n = grid.n_cells();

    std::vector<double> out;
    out.reserve(bank.size());
    for (const auto& tf : bank) {
        double total = 0.0;
        for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
            const auto& snap = traj.snapshots[k];
            const double t = snap.time;
            const auto& u = snap.values;
            double space = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = grid.center(i);
                space -= (u[i] * tf.phi_t(t, x) + r(u[i]) * tf.phi(t, x)) * dx;
            }
            for (std::size_t f = 1; f < n; ++f) {
                space += face_d[f] * (u[f] - u[f - 1]) * tf.phi_x(t, grid.face(f));
            }
            total += w[k] * space;
        }
        const auto& first = traj.snapshots.front();
        const auto& last = traj.snapshots.back();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.center(i);
            total += (last.values[i] * tf.phi(last.time, x) - first.values[i] * tf.phi(first.time, x)) * dx;
        }
        out.push_back(std::abs(total));
    }
    return out;
}

double weak_residual(const Trajectory& traj, const DiffusivityProfile& profile,
                     const BistableReaction& r, std::span<const TestFunction> bank) {
    const auto all = weak_residuals(traj, profile, r, bank);
    return all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
}

std::vector<Jump> detect_jump(const Field& state, const Grid1D& grid, double threshold) {
    require_size(grid, state);
    if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "jump threshold must be > 0");
    const auto& u = state.values;
    std::vector<Jump> jumps;
    bool open = false;
    double best = 0.0;
    for (std::size_t f = 1; f < u.size(); ++f) {
        const double d = u[f] - u[f - 1];
        if (std::abs(d) > threshold) {
            if (!open) {
                jumps.push_back({grid.face(f), 0.0});
                best = 0.0;
                open = true;
            }
            jumps.back().height += d;
            if (std::abs(d) > best) {
                best = std::abs(d);
                jumps.back().x = grid.face(f);
            }
        } else {
            open = false;
        }
    }
    return jumps;
}

double threshold_crossing(const std::function<double(double)>& datum, double level, double a,
                          double b) {
    double ga = datum(a) - level;
    const double gb = datum(b) - level;
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if ((ga > 0.0) == (gb > 0.0)) {
        std::ostringstream msg;
        msg << "datum - level has the same sign at " << a << " and " << b;
        throw Error(ErrorCode::NoBracket, msg.str());
    }
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double gm = datum(m) - level;
        if (gm == 0.0) return m;
        if ((gm > 0.0) == (ga > 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

BoundsAudit audit_bounds(const Trajectory& traj) {
    BoundsAudit audit{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : traj.snapshots) {
        for (double v : s.values) {
            audit.min_value = std::min(audit.min_value, v);
            audit.max_value = std::max(audit.max_value, v);
        }
    }
    return audit;
}

}  // namespace hetero_rd

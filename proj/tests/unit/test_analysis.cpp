#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hetero_rd/analysis.hpp"
#include "hetero_rd/error.hpp"

using namespace hetero_rd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::vector<double> kInner = {1.0, 3.0};

TimeStepConfig config(double dt, double t_end, std::vector<double> snaps, double theta = 1.0) {
    TimeStepConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.theta = theta;
    cfg.snapshot_times = std::move(snaps);
    return cfg;
}

std::vector<double> every_step(double dt, double t_end) {
    const auto steps = std::lround(t_end / dt);
    std::vector<double> out;
    for (long k = 1; k <= steps; ++k) out.push_back(t_end * static_cast<double>(k) / static_cast<double>(steps));
    return out;
}

Field sample(const Grid1D& g, double t, const std::function<double(double)>& fn) {
    Field f{t, std::vector<double>(g.n_cells())};
    for (std::size_t i = 0; i < g.n_cells(); ++i) f.values[i] = fn(g.center(i));
    return f;
}

Trajectory constant_trajectory(const Grid1D& g, double value, const std::vector<double>& times) {
    Trajectory traj{g, {}, {}};
    for (double t : times) traj.snapshots.push_back(Field{t, std::vector<double>(g.n_cells(), value)});
    return traj;
}

const TableDatum kAsymmetric{{0.0, 0.7, 1.6, 2.5, 4.0}, {0.1, 0.9, 0.3, 0.8, 0.05}};

}  // namespace

TEST_CASE("region selection") {
    const auto g = build_grid(4.0, 8, kInner);
    CHECK(cells_in(g, RegionSelector::All).size() == 8);
    CHECK(cells_in(g, RegionSelector::Inner) == std::vector<std::size_t>{2, 3, 4, 5});
    CHECK(cells_in(g, RegionSelector::Outer) == std::vector<std::size_t>{0, 1, 6, 7});
}

TEST_CASE("space and space-time norms") {
    const auto g = build_grid(4.0, 400, kInner);
    const auto u = sample(g, 0.0, [](double x) { return std::sin(x); });
    CHECK(l2_space(g, u, u) == 0.0);
    CHECK(sup_distance(g, u, u) == 0.0);
    const auto shifted = sample(g, 0.0, [](double x) { return std::sin(x) + 0.25; });
    CHECK_THAT(l2_space(g, u, shifted), WithinRel(0.25 * 2.0, 1e-12));
    CHECK_THAT(l2_space(g, u, shifted, RegionSelector::Inner), WithinRel(0.25 * std::sqrt(2.0), 1e-12));
    CHECK_THAT(sup_distance(g, u, shifted, RegionSelector::Outer), WithinRel(0.25, 1e-12));

    // Constant offset c over Q_T: c·sqrt(|region|·T).
    const std::vector<double> times = {0.0, 0.02, 0.05, 0.1};
    const auto a = constant_trajectory(g, 0.2, times);
    const auto b = constant_trajectory(g, 0.5, times);
    CHECK_THAT(l2_space_time(a, b), WithinRel(0.3 * std::sqrt(4.0 * 0.1), 1e-12));
    CHECK_THAT(l2_space_time(a, b, RegionSelector::Inner), WithinRel(0.3 * std::sqrt(2.0 * 0.1), 1e-12));

    const auto coarse = constant_trajectory(build_grid(4.0, 200, kInner), 0.5, times);
    CHECK_THROWS_AS(l2_space_time(a, coarse), Error);
}

TEST_CASE("space-time norm matches a fine quadrature oracle") {
    const auto g = build_grid(2.0, 2000, {});
    const double pi = std::numbers::pi;
    auto w = [&](double t, double x) { return std::cos(pi * x) * std::exp(-t); };
    Trajectory a{g, {}, {}}, zero{g, {}, {}};
    for (int k = 0; k <= 1000; ++k) {
        const double t = k * 1e-3;
        a.snapshots.push_back(sample(g, t, [&](double x) { return w(t, x); }));
        zero.snapshots.push_back(Field{t, std::vector<double>(g.n_cells(), 0.0)});
    }
    // ∫₀¹∫₀² cos²(πx) e^{-2t} dx dt = (1 − e^{-2}) / 2.
    const double exact = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
    CHECK_THAT(l2_space_time(a, zero), WithinRel(exact, 1e-6));
}

TEST_CASE("interface gradients of polynomial fields") {
    const auto g = build_grid(4.0, 400, kInner);
    const auto linear = sample(g, 0.0, [](double x) { return 0.1 + 0.2 * x; });
    const auto flat = sample(g, 0.0, [](double) { return 0.7; });
    const auto quad = sample(g, 0.0, [](double x) { return x * x; });
    for (auto which : {InterfaceSelector::Left, InterfaceSelector::Right}) {
        for (auto side : {InterfaceSide::InnerSide, InterfaceSide::OuterSide}) {
            CHECK_THAT(interface_gradient(linear, g, which, side), WithinAbs(0.2, 1e-10));
            CHECK_THAT(interface_gradient(flat, g, which, side), WithinAbs(0.0, 1e-12));
        }
    }
    CHECK_THAT(interface_gradient(quad, g, InterfaceSelector::Left, InterfaceSide::InnerSide), WithinAbs(2.0, 1e-9));
    CHECK_THAT(interface_gradient(quad, g, InterfaceSelector::Left, InterfaceSide::OuterSide), WithinAbs(2.0, 1e-9));
    CHECK_THAT(interface_gradient(quad, g, InterfaceSelector::Right, InterfaceSide::InnerSide), WithinAbs(6.0, 1e-9));

    const auto tiny = build_grid(4.0, 8, kInner);
    CHECK_THROWS_AS(interface_gradient(sample(tiny, 0.0, [](double x) { return x; }), tiny, InterfaceSelector::Left,
                                       InterfaceSide::OuterSide),
                    Error);
    const auto plain = build_grid(4.0, 40, {});
    CHECK_THROWS_AS(interface_gradient(sample(plain, 0.0, [](double x) { return x; }), plain,
                                       InterfaceSelector::Left, InterfaceSide::InnerSide),
                    Error);
}

TEST_CASE("power-law fits") {
    std::vector<double> eps, root;
    for (int j = 0; j <= 8; ++j) {
        eps.push_back(std::exp(-j));
        root.push_back(std::sqrt(std::exp(-j)));
    }
    const auto fit = fit_power_law(eps, root);
    CHECK_THAT(fit.a, WithinAbs(0.5, 1e-12));
    CHECK_THAT(fit.b, WithinAbs(0.0, 1e-12));
    CHECK(fit.residual < 1e-12);

    // Normal-equations oracle on scattered data.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.1, 2.0);
    std::vector<double> x(12), y(12);
    for (std::size_t i = 0; i < 12; ++i) {
        x[i] = unit(rng);
        y[i] = unit(rng);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < 12; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double a = (12 * sxy - sx * sy) / (12 * sxx - sx * sx);
    const double b = (sy - a * sx) / 12;
    const auto scattered = fit_power_law(x, y);
    CHECK_THAT(scattered.a, WithinAbs(a, 1e-12));
    CHECK_THAT(scattered.b, WithinAbs(b, 1e-12));
    CHECK(scattered.residual > 0.0);

    // Scaling the values by c shifts b by ln c only.
    std::vector<double> y3 = y;
    for (auto& v : y3) v *= 3.0;
    const auto shifted = fit_power_law(x, y3);
    CHECK_THAT(shifted.a, WithinAbs(scattered.a, 1e-12));
    CHECK_THAT(shifted.b, WithinAbs(scattered.b + std::log(3.0), 1e-12));
    CHECK_THAT(shifted.residual, WithinAbs(scattered.residual, 1e-12));

    const std::vector<double> two = {1.0, 2.0}, neg = {1.0, -2.0, 3.0}, three = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(fit_power_law(two, two), Error);
    CHECK_THROWS_AS(fit_power_law(three, neg), Error);
}

TEST_CASE("energy identity for pure diffusion and steady states") {
    const auto g = build_grid(4.0, 400, kInner);
    const auto d = DiffusivityProfile::sharp(g, std::exp(-2.0));
    const BistableReaction none(1.0 / 3.0, 0.0);
    const auto bounds = BistableBounds{0.0, 0.0};
    const double dt = 1e-3;
    const auto traj = solve(g, d, none, initial_field(g, kAsymmetric), config(dt, 0.2, every_step(dt, 0.2), 0.5));
    const auto rep = energy_report(traj, d, none, bounds);
    CHECK(rep.relative_residual() < 1e-3);
    CHECK(rep.lhs > 0.0);
    CHECK(rep.samples == traj.snapshots.size());
    CHECK(rep.final_time == 0.2);

    const BistableReaction r(1.0 / 3.0);
    const auto rb = validate_bistable(r);
    const auto steady = solve(g, d, r, initial_field(g, ConstantDatum{1.0}), config(1e-2, 1.0, {0.5, 1.0}));
    const auto srep = energy_report(steady, d, r, rb);
    CHECK(srep.identity_residual < 1e-10);
    CHECK(srep.bound_inner == 0.0);
    CHECK_THAT(srep.c1_bound, WithinRel(2.0 + 4.0 * rb.max_abs_f * 1.0, 1e-14));

    Trajectory single{g, {traj.initial()}, {}};
    CHECK_THROWS_AS(energy_report(single, d, none, bounds), Error);
}

TEST_CASE("energy accumulator streams the same report") {
    const auto g = build_grid(4.0, 200, kInner);
    const auto d = DiffusivityProfile::sharp(g, 0.1);
    const BistableReaction r(1.0 / 3.0);
    const auto rb = validate_bistable(r);
    EnergyAccumulator acc(g, d, r, rb);
    SolveOptions opts;
    opts.observer = [&](const Field& f) { acc.add(f); };
    const double dt = 1e-3;
    const auto traj = solve(g, d, r, initial_field(g, SinQuarter{}), config(dt, 0.1, every_step(dt, 0.1)), opts);
    const auto streamed = acc.report();
    const auto batch = energy_report(traj, d, r, rb);
    CHECK(streamed.lhs == batch.lhs);
    CHECK(streamed.rhs == batch.rhs);
    CHECK(streamed.bound_inner == batch.bound_inner);
    CHECK(streamed.relative_residual() < 1e-3);
    CHECK(streamed.bound_inner <= streamed.c1_bound);
}

TEST_CASE("weak residual vanishes for constant steady states") {
    const auto g = build_grid(4.0, 200, kInner);
    const auto d = DiffusivityProfile::sharp(g, 0.05);
    const BistableReaction r(1.0 / 3.0);
    const auto traj = constant_trajectory(g, 1.0, every_step(1e-3, 0.1));
    Trajectory with_initial = traj;
    with_initial.snapshots.insert(with_initial.snapshots.begin(), Field{0.0, std::vector<double>(200, 1.0)});
    const auto bank = standard_test_bank(g, 0.1);
    REQUIRE(bank.size() == 30);
    const auto res = weak_residuals(with_initial, d, r, bank);
    // For u ≡ 1 only the time derivative terms survive; the defect is the
    // trapezoid error of ∫φ_t dt times the cell sum of the space factor.
    const auto& snaps = with_initial.snapshots;
    for (std::size_t k = 0; k < bank.size(); ++k) {
        double defect = 0.0;
        for (std::size_t i = 0; i < g.n_cells(); ++i) {
            const double x = g.center(i);
            double trap = 0.0;
            for (std::size_t m = 1; m < snaps.size(); ++m) {
                const double t0 = snaps[m - 1].time, t1 = snaps[m].time;
                trap += 0.5 * (t1 - t0) * (bank[k].phi_t(t0, x) + bank[k].phi_t(t1, x));
            }
            defect += (bank[k].phi(0.1, x) - bank[k].phi(0.0, x) - trap) * g.dx();
        }
        CHECK_THAT(res[k], WithinAbs(std::abs(defect), 1e-12));
        const bool polynomial_in_t = bank[k].name.ends_with("*1") || bank[k].name.ends_with("*t");
        if (polynomial_in_t) CHECK(res[k] < 1e-12);
    }
}

TEST_CASE("weak residual of the total mass balance is tiny for Crank-Nicolson") {
    const auto g = build_grid(4.0, 200, kInner);
    const auto d = DiffusivityProfile::sharp(g, std::exp(-2.0));
    const BistableReaction r(1.0 / 3.0);
    const double dt = 1e-3;
    auto cfg = config(dt, 0.1, every_step(dt, 0.1), 0.5);
    cfg.newton.tol = 1e-13;
    const auto traj = solve(g, d, r, initial_field(g, kAsymmetric), cfg);
    const auto bank = standard_test_bank(g, 0.1);
    CHECK(bank.front().name == "1*1");
    CHECK(weak_residuals(traj, d, r, bank).front() < 1e-6);
}

TEST_CASE("weak residual decreases under (dt, dx) halving") {
    const BistableReaction r(1.0 / 3.0);
    std::vector<std::vector<double>> levels;
    for (int lvl = 0; lvl < 3; ++lvl) {
        const std::size_t n = 100u << lvl;
        const double dt = 2e-3 / (1 << lvl);
        const auto g = build_grid(4.0, n, kInner);
        const auto d = DiffusivityProfile::sharp(g, std::exp(-2.0));
        auto cfg = config(dt, 0.1, every_step(dt, 0.1), 0.5);
        cfg.newton.tol = 1e-13;
        const auto traj = solve(g, d, r, initial_field(g, kAsymmetric), cfg);
        levels.push_back(weak_residuals(traj, d, r, standard_test_bank(g, 0.1)));
    }
    for (std::size_t k = 0; k < levels[0].size(); ++k) {
        const bool exact = levels[0][k] < 1e-12 && levels[1][k] < 1e-12 && levels[2][k] < 1e-12;
        CHECK((exact || (levels[1][k] < levels[0][k] && levels[2][k] < levels[1][k])));
    }
}

TEST_CASE("jump detection") {
    const auto g = build_grid(4.0, 400, kInner);
    const auto heaviside = sample(g, 0.0, [](double x) { return x > 2.0 ? 1.0 : 0.0; });
    auto jumps = detect_jump(heaviside, g);
    REQUIRE(jumps.size() == 1);
    CHECK_THAT(jumps[0].x, WithinAbs(2.0, 1e-12));
    CHECK(jumps[0].height == 1.0);

    CHECK(detect_jump(sample(g, 0.0, [](double x) { return std::sin(x); }), g).empty());

    // Two-step staircase: each step's faces merge into one jump.
    const auto stairs = sample(g, 0.0, [](double x) {
        if (x < 1.0) return 0.0;
        if (x < 1.01) return 0.4;
        if (x < 3.0) return 1.0;
        return 0.0;
    });
    jumps = detect_jump(stairs, g);
    REQUIRE(jumps.size() == 2);
    CHECK_THAT(jumps[0].x, WithinAbs(1.01, 1e-12));
    CHECK_THAT(jumps[0].height, WithinAbs(1.0, 1e-12));
    CHECK_THAT(jumps[1].x, WithinAbs(3.0, 1e-12));
    CHECK_THAT(jumps[1].height, WithinAbs(-1.0, 1e-12));
}

TEST_CASE("threshold crossing by bisection") {
    const double pi = std::numbers::pi;
    auto datum = [&](double x) { return std::sin(pi * x / 4.0); };
    const double left = threshold_crossing(datum, 1.0 / 3.0, 0.0, 2.0);
    const double right = threshold_crossing(datum, 1.0 / 3.0, 2.0, 4.0);
    CHECK_THAT(left, WithinAbs(4.0 / pi * std::asin(1.0 / 3.0), 1e-12));
    CHECK_THAT(right, WithinAbs(4.0 - left, 1e-12));
    CHECK_THAT(left, WithinAbs(0.432693791878, 1e-11));
    try {
        threshold_crossing(datum, 2.0, 0.0, 4.0);
        FAIL("expected NoBracket");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoBracket);
    }
}

TEST_CASE("harmonic averaging keeps the discrete flux continuous across interfaces") {
    const auto g = build_grid(4.0, 400, kInner);
    const auto d = DiffusivityProfile::sharp(g, 0.01);
    const auto face = face_diffusivity(d, g);
    const auto cell = d.cell_values(g);
    // For the interface face, the harmonic mean equals the series
    // conductance of two half cells.
    for (std::size_t f : g.interface_faces()) {
        const double series = g.dx() / (0.5 * g.dx() / cell[f - 1] + 0.5 * g.dx() / cell[f]);
        CHECK_THAT(face[f], WithinRel(series, 1e-14));
    }
}

TEST_CASE("bounds audit") {
    const auto g = build_grid(4.0, 4, kInner);
    Trajectory traj{g, {Field{0.0, {0.1, 0.5, 0.2, 0.3}}, Field{1.0, {-0.1, 0.9, 1.0, 0.0}}}, {}};
    const auto a = audit_bounds(traj);
    CHECK(a.min_value == -0.1);
    CHECK(a.max_value == 1.0);
}

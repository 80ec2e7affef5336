#include "hetero_rd/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "hetero_rd/error.hpp"

namespace hetero_rd {

double smoothstep5(double theta) {
    const double t = std::clamp(theta, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

DiffusivityProfile::DiffusivityProfile(const Grid1D& grid, double epsilon, double delta)
    : origin_(grid.origin()),
      length_(grid.length()),
      interfaces_(grid.interface_positions()),
      epsilon_(epsilon),
      delta_(delta) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "epsilon must be in (0,1]");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw Error(ErrorCode::InvalidArgument, "delta must be finite and >= 0");
    }
}

DiffusivityProfile DiffusivityProfile::sharp(const Grid1D& grid, double epsilon) {
    return DiffusivityProfile(grid, epsilon, 0.0);
}

DiffusivityProfile DiffusivityProfile::smoothed(const Grid1D& grid, double epsilon, double delta) {
    if (!(delta > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "smoothed profile needs delta > 0");
    }
    return DiffusivityProfile(grid, epsilon, delta);
}

double DiffusivityProfile::at(double x) const {
    const double tol = 1e-9 * length_;
    if (!(x >= origin_ - tol && x <= origin_ + length_ + tol)) {
        std::ostringstream msg;
        msg << "x = " << x << " outside the profile domain";
        throw Error(ErrorCode::OutOfDomain, msg.str());
    }
    if (interfaces_.empty()) return epsilon_;
    double dist = std::numeric_limits<double>::infinity();
    for (double p : interfaces_) dist = std::min(dist, std::abs(x - p));
    if (dist <= tol) return 1.0;
    if (interfaces_.size() == 2 && x > interfaces_[0] && x < interfaces_[1]) return 1.0;
    if (delta_ <= 0.0) return epsilon_;
    if (dist > delta_) return epsilon_;
    return epsilon_ + (1.0 - epsilon_) * smoothstep5(1.0 - dist / delta_);
}

std::vector<double> DiffusivityProfile::cell_values(const Grid1D& grid) const {
    if (!matches(grid)) {
        throw Error(ErrorCode::GridMismatch, "profile and grid describe different domains");
    }
    std::vector<double> out(grid.n_cells());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(grid.center(i));
    return out;
}

bool DiffusivityProfile::matches(const Grid1D& grid) const {
    return origin_ == grid.origin() && length_ == grid.length() &&
           interfaces_ == grid.interface_positions();
}

std::vector<double> face_diffusivity(const DiffusivityProfile& profile, const Grid1D& grid,
                                     FaceAveraging method) {
    const auto cells = profile.cell_values(grid);
    const std::size_t n = cells.size();
    std::vector<double> faces(n + 1);
    faces[0] = cells[0];
    faces[n] = cells[n - 1];
    for (std::size_t i = 1; i < n; ++i) {
        const double a = cells[i - 1];
        const double b = cells[i];
        if (a == b) faces[i] = a;
        else faces[i] = method == FaceAveraging::Harmonic ? 2.0 * a * b / (a + b) : 0.5 * (a + b);
    }
    return faces;
}

BistableReaction::BistableReaction(double alpha, double scale, double upper_bound)
    : alpha_(alpha), scale_(scale), upper_bound_(upper_bound) {
    if (!std::isfinite(alpha) || !std::isfinite(scale) || !std::isfinite(upper_bound)) {
        throw Error(ErrorCode::InvalidArgument, "reaction parameters must be finite");
    }
    if (scale < 0.0) throw Error(ErrorCode::InvalidArgument, "reaction scale must be >= 0");
    if (upper_bound < 1.0) throw Error(ErrorCode::InvalidArgument, "upper bound M must be >= 1");
}

namespace {

[[noreturn]] void not_bistable(const std::string& what) {
    throw Error(ErrorCode::NotBistable, what);
}

// Golden-section maximization of g on [lo, hi].
double refine_max(const std::function<double(double)>& g, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    return std::max({gc, gd, g(lo), g(hi)});
}

// Dense scan followed by golden-section refinement around the best sample.
double sup_on(const std::function<double(double)>& g, double upper, int samples) {
    const double h = upper / samples;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        const double v = g(k * h);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    const double lo = std::max(0.0, (best - 1) * h);
    const double hi = std::min(upper, (best + 1) * h);
    return std::max(best_val, refine_max(g, lo, hi));
}

}  // namespace

BistableBounds validate_bistable(const BistableReaction& r, int samples) {
    if (samples < 1000) {
        throw Error(ErrorCode::InvalidArgument, "validate_bistable needs at least 1000 samples");
    }
    const double alpha = r.alpha();
    const double upper = r.upper_bound();
    if (!(alpha > 0.0 && alpha < 1.0)) not_bistable("alpha must lie in (0,1)");

    const double zero_tol = 1e-14 * std::max(1.0, r.scale());
    if (std::abs(r(0.0)) > zero_tol) not_bistable("f(0) = 0 violated");
    if (std::abs(r(alpha)) > zero_tol) not_bistable("f(alpha) = 0 violated");
    if (std::abs(r(1.0)) > zero_tol) not_bistable("f(1) = 0 violated");
    if (!(r.derivative(0.0) < 0.0)) not_bistable("f'(0) < 0 violated");
    if (!(r.derivative(1.0) < 0.0)) not_bistable("f'(1) < 0 violated");
    if (!(r.derivative(alpha) > 0.0)) not_bistable("f'(alpha) > 0 violated");

    const double h = upper / samples;
    for (int k = 1; k < samples; ++k) {
        const double u = k * h;
        // Sign tests skip points numerically indistinguishable from a root.
        if (std::abs(u - alpha) < 1e-12 || std::abs(u - 1.0) < 1e-12) continue;
        const double v = r(u);
        if (u < alpha && !(v < 0.0)) not_bistable("f < 0 on (0, alpha) violated");
        if (u > alpha && u < 1.0 && !(v > 0.0)) not_bistable("f > 0 on (alpha, 1) violated");
        if (u > 1.0 && !(v < 0.0)) not_bistable("f < 0 on (1, M] violated");
    }

    BistableBounds out{};
    out.max_abs_f = sup_on([&](double u) { return std::abs(r(u)); }, upper, samples);
    out.max_fprime = sup_on([&](double u) { return r.derivative(u); }, upper, samples);
    return out;
}

}  // namespace hetero_rd

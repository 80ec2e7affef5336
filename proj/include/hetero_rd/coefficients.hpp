#pragma once

#include <vector>

#include "hetero_rd/grid.hpp"

namespace hetero_rd {

enum class DiffusivityMode { Sharp, Smoothed };
enum class FaceAveraging { Harmonic, Arithmetic };

/// Quintic smoothstep 6θ⁵ − 15θ⁴ + 10θ³, clamped to [0, 1].
double smoothstep5(double theta);

/**
 * Piecewise diffusivity: 1 on the inner region and its boundary, ε outside.
 *
 * In Smoothed mode the outer side of each interface carries a collar of
 * width δ in which the value rises monotonically from ε to 1 following
 * smoothstep5. The profile keeps only the geometry it needs (domain and
 * interface positions), so it can outlive the grid it was built from.
 */
class DiffusivityProfile {
public:
    static DiffusivityProfile sharp(const Grid1D& grid, double epsilon);
    static DiffusivityProfile smoothed(const Grid1D& grid, double epsilon, double delta);

    DiffusivityMode mode() const { return delta_ > 0.0 ? DiffusivityMode::Smoothed : DiffusivityMode::Sharp; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }

    double at(double x) const;

    /// Values at the cell centers of `grid`.
    std::vector<double> cell_values(const Grid1D& grid) const;

    bool matches(const Grid1D& grid) const;

private:
    DiffusivityProfile(const Grid1D& grid, double epsilon, double delta);

    double origin_;
    double length_;
    std::vector<double> interfaces_;
    double epsilon_;
    double delta_;
};

inline double diffusivity_at(const DiffusivityProfile& profile, double x) { return profile.at(x); }

/// n_cells + 1 face values. Interior faces combine the two adjacent cell
/// values; boundary faces copy the adjacent cell value.
std::vector<double> face_diffusivity(const DiffusivityProfile& profile, const Grid1D& grid,
                                     FaceAveraging method = FaceAveraging::Harmonic);

/// Sup-norm bounds of a bistable reaction on [0, M].
struct BistableBounds {
    double max_abs_f;    ///< sup |f| on [0, M]
    double max_fprime;   ///< sup f' on [0, M]
};

/**
 * Cubic reaction s·u(u − α)(1 − u).
 *
 * Construction only checks that the parameters are finite; s = 0 is allowed
 * and gives pure diffusion. Use validate_bistable() to check the bistability
 * hypotheses on [0, M].
 */
class BistableReaction {
public:
    BistableReaction(double alpha, double scale = 1.0, double upper_bound = 1.0);

    double alpha() const { return alpha_; }
    double scale() const { return scale_; }
    double upper_bound() const { return upper_bound_; }

    double operator()(double u) const { return scale_ * u * (u - alpha_) * (1.0 - u); }
    double derivative(double u) const {
        return scale_ * (-3.0 * u * u + 2.0 * (1.0 + alpha_) * u - alpha_);
    }

private:
    double alpha_;
    double scale_;
    double upper_bound_;
};

inline double reaction_eval(const BistableReaction& r, double u) { return r(u); }
inline double reaction_deriv(const BistableReaction& r, double u) { return r.derivative(u); }

/// Checks the bistable sign structure on a `samples`-point grid of [0, M]
/// and returns the sup bounds. Throws NotBistable naming the failed condition.
BistableBounds validate_bistable(const BistableReaction& r, int samples = 100000);

}  // namespace hetero_rd

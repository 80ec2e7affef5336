#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetero_rd/coefficients.hpp"
#include "hetero_rd/pde_solver.hpp"

namespace hetero_rd {

enum class RegionSelector { All, Inner, Outer };

/// Cells of `grid` selected by `region`, in increasing order.
std::vector<std::size_t> cells_in(const Grid1D& grid, RegionSelector region);

// Norms ---------------------------------------------------------------------

/// Discrete L²(region) distance, midpoint rule on cells.
double l2_space(const Grid1D& grid, const Field& u, const Field& v,
                RegionSelector region = RegionSelector::All);

/// Max-norm distance over `region`.
double sup_distance(const Grid1D& grid, const Field& u, const Field& v,
                    RegionSelector region = RegionSelector::All);

/// L²((0,T) × region): midpoint in x, trapezoid in t over the shared snapshots.
double l2_space_time(const Trajectory& a, const Trajectory& b,
                     RegionSelector region = RegionSelector::All);

// Interface gradients -------------------------------------------------------

enum class InterfaceSelector { Left, Right };
enum class InterfaceSide { InnerSide, OuterSide };

/// One-sided du/dx at an interface face from the quadratic through the three
/// nearest cell centers on the requested side. Signed.
double interface_gradient(const Field& state, const Grid1D& grid, InterfaceSelector which,
                          InterfaceSide side);

// Power-law fit -------------------------------------------------------------

/// ln(value) = a·ln(x) + b by least squares; `residual` is the RMS misfit in
/// log space.
struct PowerLawFit {
    double a = 0.0;
    double b = 0.0;
    double residual = 0.0;
};

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> values);

// Energy --------------------------------------------------------------------

/**
 * Terms of the energy identity
 *   ½‖u(T)‖² + ∫∫ D |u_x|²  =  ½‖u₀‖² + ∫∫ f(u) u
 * together with the inner-region gradient integral and its a-priori bound
 * C₁ = ½|Ω|M² + M·M_f·|Ω|·T.
 */
struct EnergyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double bound_inner = 0.0;
    double c1_bound = 0.0;
    double identity_residual = 0.0;
    double final_time = 0.0;
    std::size_t samples = 0;

    double relative_residual() const;
};

/// Streaming form of energy_report: feed every state (initial first), in
/// time order. Integrals use the trapezoid rule between consecutive states.
class EnergyAccumulator {
public:
    EnergyAccumulator(const Grid1D& grid, const DiffusivityProfile& profile,
                      const BistableReaction& r, const BistableBounds& bounds,
                      FaceAveraging averaging = FaceAveraging::Harmonic);

    void add(const Field& state);
    EnergyReport report() const;

private:
    struct Rates {
        double dissipation;
        double reaction;
        double inner_gradient;
    };
    Rates rates(std::span<const double> u) const;

    Grid1D grid_;
    std::vector<double> face_d_;
    BistableReaction reaction_;
    BistableBounds bounds_;
    CellRange inner_;
    std::size_t samples_ = 0;
    double t0_ = 0.0;
    double t_prev_ = 0.0;
    Rates prev_{};
    double half_norm0_ = 0.0;
    double half_norm_last_ = 0.0;
    double dissipation_ = 0.0;
    double reaction_work_ = 0.0;
    double inner_gradient_ = 0.0;
};

/// Throws InsufficientSnapshots for fewer than 2 snapshots.
EnergyReport energy_report(const Trajectory& traj, const DiffusivityProfile& profile,
                           const BistableReaction& r, const BistableBounds& bounds);

// Weak form -----------------------------------------------------------------

/// Space-time test function with analytic partial derivatives.
struct TestFunction {
    std::string name;
    std::function<double(double, double)> phi;
    std::function<double(double, double)> phi_t;
    std::function<double(double, double)> phi_x;
};

/// Tensor products of {1, x, x², cos(kπx/L)} × {1, t, cos(kπt/T)}, k ≤ 3,
/// with x measured from the grid origin.
std::vector<TestFunction> standard_test_bank(const Grid1D& grid, double t_end);

/// Discrete weak-form defect
///   ∫∫(−u φ_t + D u_x φ_x − f(u) φ) − ∫u₀ φ(0) + ∫u(T) φ(T)
/// for each test function (absolute values).
std::vector<double> weak_residuals(const Trajectory& traj, const DiffusivityProfile& profile,
                                   const BistableReaction& r, std::span<const TestFunction> bank);

double weak_residual(const Trajectory& traj, const DiffusivityProfile& profile,
                     const BistableReaction& r, std::span<const TestFunction> bank);

// Jumps and thresholds ------------------------------------------------------

struct Jump {
    double x;       ///< face position of the largest single difference
    double height;  ///< signed total difference across the merged faces
};

/// Faces where |u_{i+1} − u_i| > threshold; adjacent faces are merged.
std::vector<Jump> detect_jump(const Field& state, const Grid1D& grid, double threshold = 0.25);

/// Bisection root of datum(x) = level on [a, b]; throws NoBracket.
double threshold_crossing(const std::function<double(double)>& datum, double level, double a,
                          double b);

struct BoundsAudit {
    double min_value;
    double max_value;
};

BoundsAudit audit_bounds(const Trajectory& traj);

}  // namespace hetero_rd

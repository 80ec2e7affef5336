#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hetero_rd/coefficients.hpp"
#include "hetero_rd/grid.hpp"
#include "hetero_rd/tridiagonal.hpp"

namespace hetero_rd {

/// Cell averages at one instant.
struct Field {
    double time = 0.0;
    std::vector<double> values;
};

/// From `from_time` on, steps use `dt` (until the next change).
struct DtChange {
    double from_time;
    double dt;
};

struct NewtonOptions {
    double tol = 1e-10;   ///< max-norm of the residual
    int max_iter = 25;
};

struct TimeStepConfig {
    double dt = 1e-4;
    double theta = 1.0;
    NewtonOptions newton;
    std::vector<double> snapshot_times;
    double t_end = 0.0;
    std::vector<DtChange> dt_changes;

    /// Throws InvalidArgument on a malformed configuration.
    void validate() const;
    double dt_at(double t) const;
};

struct RunMetadata {
    double epsilon = 1.0;
    double delta = 0.0;
    double alpha = 0.0;
    double reaction_scale = 1.0;
    double upper_bound = 1.0;
    FaceAveraging averaging = FaceAveraging::Harmonic;
    TimeStepConfig config;
    std::size_t steps = 0;
    int max_newton_iterations = 0;
};

/// Snapshots of one run; the first snapshot is the initial datum.
struct Trajectory {
    Grid1D grid;
    std::vector<Field> snapshots;
    RunMetadata meta;

    const Field& initial() const { return snapshots.front(); }
    const Field& final() const { return snapshots.back(); }
    /// Snapshot recorded at time t (within 1e-12 relative); throws if absent.
    const Field& at(double t) const;
};

/// Invoked with the initial state and after every accepted step.
using StepObserver = std::function<void(const Field&)>;

/// One θ-step from `state` with step size `dt`; Newton with the tridiagonal
/// Jacobian I − θ·dt·(L + diag f'(u)). Throws NewtonDiverged at the iteration cap.
Field step_theta(const Field& state, const TridiagonalOperator& op, const BistableReaction& r,
                 double dt, double theta, const NewtonOptions& newton = {});

/// Reusable stepper: owns the scratch buffers of the Newton loop.
class ThetaStepper {
public:
    ThetaStepper(const TridiagonalOperator& op, const BistableReaction& r, double theta,
                 NewtonOptions newton);

    /// Advances `u` in place by dt; returns the Newton iterations used.
    int step(std::vector<double>& u, double dt);

private:
    const TridiagonalOperator& op_;
    BistableReaction reaction_;
    double theta_;
    NewtonOptions newton_;
    std::vector<double> old_, explicit_part_, lu_, residual_, delta_, jac_diag_, jac_off_lo_,
        jac_off_up_, scratch_;
};

struct SolveOptions {
    FaceAveraging averaging = FaceAveraging::Harmonic;
    /// Bound check applied after every step: −tol ≤ u ≤ M + tol.
    double bound_tolerance = 1e-8;
    StepObserver observer;
};

Trajectory solve(const Grid1D& grid, const DiffusivityProfile& profile,
                 const BistableReaction& r, const Field& u0, const TimeStepConfig& cfg,
                 const SolveOptions& options = {});

// Initial data ---------------------------------------------------------------

struct SinQuarter {};                 ///< sin(πx/4)
struct ConstantDatum { double value; };
/// Piecewise-linear interpolation through (x, u) nodes, constant extension.
struct TableDatum {
    std::vector<double> x;
    std::vector<double> u;
};
using InitialDatum = std::variant<SinQuarter, ConstantDatum, TableDatum>;

double evaluate_datum(const InitialDatum& datum, double x);

/// Parses "sin_quarter" or "constant:<c>"; throws UnknownDatum otherwise.
InitialDatum parse_datum(const std::string& name);
std::string datum_name(const InitialDatum& datum);

Field initial_field(const Grid1D& grid, const InitialDatum& datum);

}  // namespace hetero_rd

#pragma once

#include <span>
#include <vector>

#include "hetero_rd/pde_solver.hpp"

namespace hetero_rd {

/// Restriction of a full-grid field to a cell range.
Field restrict_field(const Field& field, CellRange range);

/**
 * Homogeneous-Neumann problem on the inner region: D ≡ 1 on the subgrid
 * spanned by the two interfaces, zero flux through both interface faces.
 * `u0` lives on the full grid; the trajectory lives on the inner subgrid.
 */
Trajectory solve_neumann_limit(const Grid1D& grid, const BistableReaction& r, const Field& u0,
                               const TimeStepConfig& cfg, const SolveOptions& options = {});

struct OdeOptions {
    double dt = 1e-4;
    /// Cells are split into this many contiguous batches, one thread each.
    int workers = 1;
};

/// Classical RK4 for du/dt = f(u) from u0 to t_end, landing exactly on t_end.
double integrate_reaction_ode(const BistableReaction& r, double u0, double t_end, double dt);

/**
 * Pointwise reaction ODE applied to every cell of `u0` independently; the
 * spatial coupling is dropped entirely. The returned trajectory has the
 * initial datum followed by one snapshot per entry of `times`.
 */
Trajectory solve_ode_limit(const Grid1D& grid, const Field& u0, const BistableReaction& r,
                           std::span<const double> times, const OdeOptions& options = {});

/// t → ∞ limit of the pointwise ODE: 0 below α, 1 above, α at α (±1e-12).
Field asymptotic_profile(const Field& u0, const BistableReaction& r);

}  // namespace hetero_rd

#pragma once

#include <span>
#include <vector>

#include "hetero_rd/grid.hpp"

namespace hetero_rd {

/**
 * Discrete divergence-form operator (D u_x)_x with zero-flux boundaries.
 *
 * Row i is (F_{i+1/2} − F_{i−1/2}) / dx with F = D_face (u_{i+1} − u_i) / dx.
 * `lower[i]` couples row i+1 to column i and `upper[i]` couples row i to
 * column i+1; the operator is symmetric and every row sums to zero.
 */
struct TridiagonalOperator {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    double dx = 0.0;

    std::size_t size() const { return diag.size(); }

    /// out = A·u
    void apply(std::span<const double> u, std::span<double> out) const;
    std::vector<double> apply(std::span<const double> u) const;
};

TridiagonalOperator assemble_diffusion(const Grid1D& grid, std::span<const double> face_d);

/// Square tridiagonal system; `lower` and `upper` have size()-1 entries.
struct TridiagonalSystem {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm. Throws SingularSystem when a pivot drops below 1e-30.
std::vector<double> thomas_solve(const TridiagonalSystem& system, std::span<const double> rhs);

/// In-place variant reusing caller-owned scratch (size n) to avoid allocation
/// inside time loops; `x` receives the solution.
void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<const double> rhs,
                  std::span<double> x, std::span<double> scratch);

}  // namespace hetero_rd

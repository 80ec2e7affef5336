#include "hetero_rd/tridiagonal.hpp"

#include <cmath>
#include <string>

#include "hetero_rd/error.hpp"

namespace hetero_rd {

void TridiagonalOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = diag.size();
    if (u.size() != n || out.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "operator size does not match field size");
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * u[i];
        if (i > 0) v += lower[i - 1] * u[i - 1];
        if (i + 1 < n) v += upper[i] * u[i + 1];
        out[i] = v;
    }
}

std::vector<double> TridiagonalOperator::apply(std::span<const double> u) const {
    std::vector<double> out(diag.size());
    apply(u, out);
    return out;
}

TridiagonalOperator assemble_diffusion(const Grid1D& grid, std::span<const double> face_d) {
    const std::size_t n = grid.n_cells();
    if (face_d.size() != n + 1) {
        throw Error(ErrorCode::DimensionMismatch,
                    "face diffusivity needs " + std::to_string(n + 1) + " entries, got " +
                        std::to_string(face_d.size()));
    }
    TridiagonalOperator op;
    op.dx = grid.dx();
    const double inv_dx2 = 1.0 / (op.dx * op.dx);
    op.lower.resize(n - 1);
    op.upper.resize(n - 1);
    op.diag.assign(n, 0.0);
    // Faces 0 and n are the outer boundary and carry no flux.
    for (std::size_t f = 1; f < n; ++f) {
        const double c = face_d[f] * inv_dx2;
        op.upper[f - 1] = c;
        op.lower[f - 1] = c;
        op.diag[f - 1] -= c;
        op.diag[f] -= c;
    }
    return op;
}

void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<const double> rhs,
                  std::span<double> x, std::span<double> scratch) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() + 1 != n || upper.size() + 1 != n || rhs.size() != n ||
        x.size() != n || scratch.size() < n) {
        throw Error(ErrorCode::DimensionMismatch, "inconsistent tridiagonal system sizes");
    }
    constexpr double kMinPivot = 1e-30;
    auto& c = scratch;
    double pivot = diag[0];
    if (std::abs(pivot) < kMinPivot) {
        throw Error(ErrorCode::SingularSystem, "zero pivot in row 0");
    }
    c[0] = n > 1 ? upper[0] / pivot : 0.0;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if (std::abs(pivot) < kMinPivot) {
            throw Error(ErrorCode::SingularSystem, "zero pivot in row " + std::to_string(i));
        }
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c[i] * x[i + 1];
    }
}

std::vector<double> thomas_solve(const TridiagonalSystem& system, std::span<const double> rhs) {
    std::vector<double> x(system.size());
    std::vector<double> scratch(system.size());
    thomas_solve(system.lower, system.diag, system.upper, rhs, x, scratch);
    return x;
}

}  // namespace hetero_rd

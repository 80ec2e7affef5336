#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hetero_rd {

/// Where a coordinate sits relative to the inner region. Interface points
/// are reported separately even though they carry the inner diffusivity.
enum class Region { Inner, Outer, Interface };

/// Half-open range of cell indices [first, last).
struct CellRange {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const { return last - first; }
    bool contains(std::size_t i) const { return i >= first && i < last; }
};

/**
 * Uniform cell-centered mesh of (origin, origin + length).
 *
 * Interfaces are stored as face indices, so every interface point is a cell
 * face. The inner region exists only with exactly two interfaces (the cells
 * between them); with none the problem is homogeneous, and a lone interface
 * is a marked point without an inner region.
 *
 * Immutable after construction.
 */
class Grid1D {
public:
    Grid1D(double length, std::size_t n_cells, std::span<const double> interfaces,
           double origin = 0.0);

    double origin() const { return origin_; }
    double length() const { return length_; }
    double end() const { return origin_ + length_; }
    std::size_t n_cells() const { return n_cells_; }
    double dx() const { return dx_; }

    std::span<const std::size_t> interface_faces() const { return interface_faces_; }
    bool has_interfaces() const { return !interface_faces_.empty(); }
    bool has_inner_region() const { return interface_faces_.size() == 2; }
    std::vector<double> interface_positions() const;

    std::span<const double> face_positions() const { return faces_; }
    std::span<const double> cell_centers() const { return centers_; }
    double face(std::size_t i) const { return faces_[i]; }
    double center(std::size_t i) const { return centers_[i]; }

    /// Cells of the inner region; empty when the grid has no interfaces.
    CellRange inner_cells() const;

    Region region_of(double x) const;
    Region region_of_cell(std::size_t i) const;

    /// Distance from x to the nearest interface (infinity without interfaces).
    double distance_to_interface(double x) const;

    /// Interface-free grid covering cells [range.first, range.last).
    Grid1D subgrid(CellRange range) const;

    /// Absolute snapping tolerance for interface/face coincidence.
    double snap_tolerance() const { return 1e-9 * length_; }

    bool same_geometry(const Grid1D& other) const;

private:
    double origin_;
    double length_;
    std::size_t n_cells_;
    double dx_;
    std::vector<std::size_t> interface_faces_;
    std::vector<double> faces_;
    std::vector<double> centers_;
};

/// Builds the mesh of (0, length) and snaps each interface onto its face.
Grid1D build_grid(double length, std::size_t n_cells, std::span<const double> interfaces);

inline Region region_of(const Grid1D& grid, double x) { return grid.region_of(x); }

}  // namespace hetero_rd

#include "hetero_rd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hetero_rd/error.hpp"

namespace hetero_rd {

Grid1D::Grid1D(double length, std::size_t n_cells, std::span<const double> interfaces,
               double origin)
    : origin_(origin), length_(length), n_cells_(n_cells) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw Error(ErrorCode::InvalidArgument, "grid length must be positive and finite");
    }
    if (n_cells < 2) {
        throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 cells");
    }
    if (interfaces.size() > 2) {
        throw Error(ErrorCode::InvalidArgument,
                    "a grid carries at most 2 interfaces, got " +
                        std::to_string(interfaces.size()));
    }

    dx_ = length_ / static_cast<double>(n_cells_);
    faces_.resize(n_cells_ + 1);
    const auto n = static_cast<double>(n_cells_);
    for (std::size_t i = 0; i <= n_cells_; ++i) {
        faces_[i] = origin_ + length_ * (static_cast<double>(i) / n);
    }
    faces_.back() = origin_ + length_;
    centers_.resize(n_cells_);
    for (std::size_t i = 0; i < n_cells_; ++i) {
        centers_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
    }

    std::vector<double> sorted(interfaces.begin(), interfaces.end());
    std::sort(sorted.begin(), sorted.end());
    const double tol = snap_tolerance();
    for (double p : sorted) {
        if (!(p > origin_ && p < origin_ + length_)) {
            std::ostringstream msg;
            msg << "interface " << p << " is not strictly inside (" << origin_ << ", "
                << origin_ + length_ << ")";
            throw Error(ErrorCode::OutOfDomain, msg.str());
        }
        const double k = std::round((p - origin_) / dx_);
        const auto face = static_cast<std::size_t>(k);
        if (face == 0 || face >= n_cells_ || std::abs(faces_[face] - p) > tol) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "interface " << p << " is not within " << tol << " of a face (dx = " << dx_
                << ")";
            throw Error(ErrorCode::InterfaceNotOnFace, msg.str());
        }
        if (!interface_faces_.empty() && interface_faces_.back() == face) {
            throw Error(ErrorCode::DuplicateInterface,
                        "two interfaces snap to face " + std::to_string(face));
        }
        interface_faces_.push_back(face);
    }
}

Grid1D build_grid(double length, std::size_t n_cells, std::span<const double> interfaces) {
    return Grid1D(length, n_cells, interfaces, 0.0);
}

std::vector<double> Grid1D::interface_positions() const {
    std::vector<double> out;
    out.reserve(interface_faces_.size());
    for (auto f : interface_faces_) out.push_back(faces_[f]);
    return out;
}

CellRange Grid1D::inner_cells() const {
    if (!has_inner_region()) return {};
    return {interface_faces_[0], interface_faces_[1]};
}

Region Grid1D::region_of(double x) const {
    const double tol = snap_tolerance();
    if (!(x >= origin_ - tol && x <= origin_ + length_ + tol)) {
        std::ostringstream msg;
        msg << "x = " << x << " outside [" << origin_ << ", " << origin_ + length_ << "]";
        throw Error(ErrorCode::OutOfDomain, msg.str());
    }
    for (auto f : interface_faces_) {
        if (std::abs(x - faces_[f]) <= tol) return Region::Interface;
    }
    if (has_inner_region() && x > faces_[interface_faces_[0]] && x < faces_[interface_faces_[1]]) {
        return Region::Inner;
    }
    return Region::Outer;
}

Region Grid1D::region_of_cell(std::size_t i) const {
    return inner_cells().contains(i) ? Region::Inner : Region::Outer;
}

double Grid1D::distance_to_interface(double x) const {
    double d = std::numeric_limits<double>::infinity();
    for (auto f : interface_faces_) d = std::min(d, std::abs(x - faces_[f]));
    return d;
}

Grid1D Grid1D::subgrid(CellRange range) const {
    if (range.last > n_cells_ || range.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "subgrid range must hold at least 2 cells");
    }
    const double lo = faces_[range.first];
    const double hi = faces_[range.last];
    return Grid1D(hi - lo, range.size(), {}, lo);
}

bool Grid1D::same_geometry(const Grid1D& other) const {
    return n_cells_ == other.n_cells_ && origin_ == other.origin_ &&
           length_ == other.length_ && interface_faces_ == other.interface_faces_;
}

}  // namespace hetero_rd

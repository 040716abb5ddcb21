#pragma once

#include <carnot/group.hpp>
#include <carnot/scalar_field.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace carnot {

/// Uniform Cartesian grid over a box. Node index is row-major: axis 0 varies slowest.
class GridGeometry {
public:
    GridGeometry() = default;
    GridGeometry(Box box, std::vector<int> shape);
    static GridGeometry cube(int dim, double half_width, int nodes_per_axis);

    const Box& box() const noexcept { return box_; }
    const std::vector<int>& shape() const noexcept { return shape_; }
    int dim() const noexcept { return static_cast<int>(shape_.size()); }
    std::size_t size() const noexcept { return size_; }
    double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    std::vector<int> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& idx) const;
    int axis_index(std::size_t flat, int axis) const {
        return static_cast<int>((flat / strides_[static_cast<std::size_t>(axis)]) %
                                static_cast<std::size_t>(shape_[static_cast<std::size_t>(axis)]));
    }
    Point node(std::size_t flat) const;
    double coordinate(int axis, int i) const { return box_.lo[axis] + i * spacing(axis); }
    /// Nodes with some index equal to 0 or shape-1 (band width 1).
    bool is_boundary(std::size_t flat) const;
    std::vector<std::uint8_t> boundary_mask() const;

    bool operator==(const GridGeometry& o) const;

private:
    Box box_;
    std::vector<int> shape_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridGeometry geom, double fill = 0.0);
    GridFunction(GridGeometry geom, std::vector<double> values);
    static GridFunction sample(const GridGeometry& geom, const ScalarField& f);

    const GridGeometry& geometry() const noexcept { return geom_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<std::uint8_t>& boundary_mask() const noexcept { return boundary_; }

    /// Multilinear interpolation; throws DomainExit outside the box.
    double interpolate(const Point& x) const;
    double max() const;
    double min() const;
    double max_abs() const;
    bool all_finite() const;

private:
    GridGeometry geom_;
    std::vector<double> values_;
    std::vector<std::uint8_t> boundary_;
};

/// Text form: a "carnot-grid 1" header with dim/shape/lo/hi lines, then one value per line.
void write_text(std::ostream& os, const GridFunction& g);
GridFunction read_text(std::istream& is);
/// Binary form, little-endian: "CGRD", u32 version, u32 dim, u64 shape[dim], f64 lo[dim], f64 hi[dim],
/// f64 values[prod(shape)].
void write_binary(std::ostream& os, const GridFunction& g);
GridFunction read_binary(std::istream& is);
void save(const std::string& path, const GridFunction& g, bool binary = true);
GridFunction load(const std::string& path);

/// max |a - b| over nodes; geometries must agree.
double max_abs_diff(const GridFunction& a, const GridFunction& b);

}  // namespace carnot

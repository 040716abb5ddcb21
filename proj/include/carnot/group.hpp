#pragma once

#include <carnot/errors.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace carnot {

/// Group elements in exponential coordinates, laid out layer by layer.
using Point = Eigen::VectorXd;

/// Dimension cap for the stack-allocated kernels.
inline constexpr int kMaxDim = 16;

/// One nonzero bracket coefficient: [e_i, e_j] has coefficient `value` on e_k (0-based).
struct StructureConstant {
    int k = 0;
    int i = 0;
    int j = 0;
    double value = 0.0;
};

/// A stratified nilpotent Lie algebra in a graded basis.
///
/// Immutable after construction. Construction only checks that indices are in range and
/// that the shape is sane; the algebraic invariants (antisymmetry, grading, Jacobi,
/// generation) are checked by validate_spec() and reported as data.
class GroupSpec {
public:
    GroupSpec(std::string name, std::vector<int> layer_dims,
              std::vector<StructureConstant> constants);

    const std::string& name() const noexcept { return name_; }
    int step() const noexcept { return static_cast<int>(layer_dims_.size()); }
    const std::vector<int>& layer_dims() const noexcept { return layer_dims_; }
    int dim() const noexcept { return dim_; }
    int generators() const noexcept { return layer_dims_.front(); }
    /// Q = sum_j j * m_j.
    int homogeneous_dimension() const noexcept { return hom_dim_; }
    /// r! for the homogeneous norm exponents.
    int step_factorial() const noexcept { return step_factorial_; }

    /// 1-based layer of coordinate `coord`.
    int layer_of(int coord) const { return layer_of_.at(static_cast<std::size_t>(coord)); }
    /// First coordinate of 1-based layer `layer`.
    int layer_offset(int layer) const { return offsets_.at(static_cast<std::size_t>(layer - 1)); }

    /// Dense lookup c[k][i][j] (0-based).
    double constant(int k, int i, int j) const {
        return dense_[static_cast<std::size_t>((k * dim_ + i) * dim_ + j)];
    }
    /// All nonzero entries of the dense table.
    std::span<const StructureConstant> brackets() const noexcept { return nonzero_; }
    /// The entries exactly as supplied at construction (duplicates accumulate in the table).
    std::span<const StructureConstant> supplied() const noexcept { return supplied_; }

    bool is_abelian() const noexcept { return nonzero_.empty(); }

private:
    std::string name_;
    std::vector<int> layer_dims_;
    std::vector<int> layer_of_;
    std::vector<int> offsets_;
    std::vector<double> dense_;
    std::vector<StructureConstant> nonzero_;
    std::vector<StructureConstant> supplied_;
    int dim_ = 0;
    int hom_dim_ = 0;
    int step_factorial_ = 1;
};

struct Violation {
    std::string invariant;  ///< "antisymmetry", "grading", "jacobi", "generation", ...
    std::string detail;
    std::vector<int> indices;
};

/// Every violated invariant; empty iff the spec describes a Carnot algebra of its step.
std::vector<Violation> validate_spec(const GroupSpec& spec);

// Built-in groups. Heisenberg H^n has layers (2n, 1) with [e_i, e_{n+i}] = e_{2n+1}.
GroupSpec abelian(int n);
GroupSpec heisenberg(int n = 1);
/// Engel group: layers (2,1,1), [e1,e2] = e3, [e1,e3] = e4.
GroupSpec engel();
/// Free step-2 nilpotent group on m generators, layers (m, m(m-1)/2).
GroupSpec free_step2(int generators = 2);
/// Lookup by name: "abelian<n>", "heisenberg" / "heisenberg<n>", "engel", "free_step2" / "free_step2_<m>".
GroupSpec builtin_group(const std::string& name);
std::vector<std::string> builtin_group_names();

/// Lie bracket of coordinate vectors by bilinear extension of the structure constants.
template <class T>
void bracket_into(const GroupSpec& g, const T* a, const T* b, T* out) {
    const int n = g.dim();
    for (int k = 0; k < n; ++k) out[k] = T(0.0);
    for (const auto& c : g.brackets()) out[c.k] += c.value * (a[c.i] * b[c.j]);
}

/// Group law via the Baker-Campbell-Hausdorff polynomial truncated at the step.
///
/// Generic in the scalar type so the same code serves doubles, dual numbers and
/// symbolic polynomials. `out` must not alias `x` or `y`.
template <class T>
void multiply_into(const GroupSpec& g, const T* x, const T* y, T* out) {
    const int n = g.dim();
    const int r = g.step();
    if (r > 3) throw UnsupportedStep("group law implemented for step <= 3, got step " + std::to_string(r));
    for (int k = 0; k < n; ++k) out[k] = x[k] + y[k];
    if (r == 1) return;
    T xy[kMaxDim];
    bracket_into(g, x, y, xy);
    for (int k = 0; k < n; ++k) out[k] += 0.5 * xy[k];
    if (r == 2) return;
    // Z = X + Y + [X,Y]/2 + [X,[X,Y]]/12 - [Y,[X,Y]]/12
    T xxy[kMaxDim];
    T yxy[kMaxDim];
    bracket_into(g, x, xy, xxy);
    bracket_into(g, y, xy, yxy);
    for (int k = 0; k < n; ++k) out[k] += (xxy[k] - yxy[k]) / 12.0;
}

Point multiply(const GroupSpec& spec, const Point& x, const Point& y);
Point inverse(const Point& x);
Point identity(const GroupSpec& spec);
/// Layer-wise (lambda x_1, lambda^2 x_2, ..., lambda^r x_r).
Point dilate(const GroupSpec& spec, double lambda, const Point& x);
/// ||x|| = (sum_j |x_j|^{2 r!/j})^{1/(2 r!)}.
double hom_norm(const GroupSpec& spec, const Point& x);
/// ||x||^{2 r!}, a polynomial in the coordinates.
double hom_norm_power(const GroupSpec& spec, const double* x);
/// d(x, y) = ||y^{-1} * x||.
double metric(const GroupSpec& spec, const Point& x, const Point& y);
/// C_h(x) = h^{-1} * x * h.
Point conjugate(const GroupSpec& spec, const Point& h, const Point& x);
/// Projection onto 1-based layer j.
Eigen::VectorXd project_layer(const GroupSpec& spec, const Point& x, int layer);
Point from_layers(const GroupSpec& spec, const std::vector<Eigen::VectorXd>& layers);

/// Lebesgue volume of delta_lambda(E) for a coordinate box E of volume `volume`:
/// the layered scaling gives lambda^Q * vol(E) with Q read off layer_dims.
double dilated_box_volume(const GroupSpec& spec, double lambda, double volume);

struct ConjugationEstimate {
    double conjugation = 0.0;       ///< sup ||x^{-1} y x|| / ||y||^{1/r}
    double pseudo_triangle = 0.0;   ///< sup ||x y|| / (||x|| + ||y||)
    int samples = 0;
};

/// Monte-Carlo estimate of the constants in the inner-automorphism and pseudo-triangle
/// estimates over ||x||, ||y|| < nu. An empirical sup, not a certified bound.
ConjugationEstimate estimate_conjugation_constant(const GroupSpec& spec, double nu, int samples,
                                                  std::uint64_t seed = 1);

/// Uniform coordinates in the cube, rescaled by a dilation so that ||x|| = nu * U, U ~ U(0,1).
std::vector<Point> sample_ball(const GroupSpec& spec, double nu, int count, std::uint64_t seed);

}  // namespace carnot

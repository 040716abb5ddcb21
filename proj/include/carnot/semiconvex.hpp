#pragma once

#include <carnot/grid.hpp>
#include <carnot/operators.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace carnot {

inline constexpr double kSemiconvexCap = 1e6;

/// Smallest Lambda >= 0 making every pure and diagonal second difference of u + Lambda|x|^2/2
/// at least -tol; +inf once Lambda exceeds kSemiconvexCap. tol < 0 selects 1e-10 * max(1, |u|_inf).
double semiconvexity_constant(const GridFunction& u, double tol = -1.0);
double semiconcavity_constant(const GridFunction& v, double tol = -1.0);

/// max_y { w(y) - d(x^{-1}, y^{-1})^{2 r!} / (2 eps) } over grid nodes y.
GridFunction sup_convolution(const GroupSpec& spec, const GridFunction& w, double eps);
/// min_y { w(y) + d(x^{-1}, y^{-1})^{2 r!} / (2 eps) } over grid nodes y.
GridFunction inf_convolution(const GroupSpec& spec, const GridFunction& w, double eps);

/// u + lambda (u - min u)^2.
GridFunction strict_subsolution_perturb(const GridFunction& u, double lambda);

/// Scalar map h with h' >= 1 and h'' >= 0 on the range of interest.
struct ScalarMap {
    std::string name;
    std::function<double(double)> h;
    std::function<double(double)> dh;
    std::function<double(double)> d2h;
};

/// h(s) = s + lambda (s - s0)^2 (valid for s >= s0).
ScalarMap quadratic_map(double lambda, double s0);
/// h(s) = s + exp(s - s0) - 1 (valid for s >= s0).
ScalarMap exponential_map(double s0);

struct ChainRuleReport {
    int points = 0;
    int skipped = 0;  ///< singular gradient or h' < 1
    int violations = 0;
    double worst_slack = std::numeric_limits<double>::infinity();  ///< min(rhs - lhs)
    double max_gap = 0.0;                                          ///< max(rhs - lhs)
    std::vector<double> lhs;
    std::vector<double> rhs;
    bool passed() const { return violations == 0; }
};

ChainRuleReport chain_rule_inequality_check(const GroupSpec& spec, const OperatorSpec& op, const ScalarField& w,
                                            const ScalarMap& h, const std::vector<Point>& points,
                                            double tol = 1e-9);

struct LinearShiftReport {
    std::vector<double> p_norms;      ///< dyadic |p|
    std::vector<double> max_diff;     ///< max over points of |L w_p - L w|
    std::vector<double> bound_terms;  ///< max over points of the bracketed bound
    double fitted_constant = 0.0;
    double decay_slope = 0.0;  ///< log-log slope of max_diff against |p| (NaN when all zero)
    bool vanishes = false;     ///< difference at the smallest |p| below the one at the largest, or identically 0
};

/// Dyadic p = 2^{-k} * direction for k = 0..levels-1, |direction| = 1.
LinearShiftReport linear_perturbation_shift(const GroupSpec& spec, const OperatorSpec& op, const ScalarField& w,
                                            const Eigen::VectorXd& direction, const std::vector<Point>& points,
                                            int levels = 8);
/// |L w_p - L w| at one point for one p.
double linear_shift_difference(const GroupSpec& spec, const OperatorSpec& op, const ScalarField& w,
                               const Eigen::VectorXd& p, const Point& x);

struct JensenResult {
    double fraction = 0.0;
    int trials = 0;
    int interior = 0;
};

/// Fraction of tilts |p| < delta whose argmax of u + p.x over the Euclidean ball B_r(x_hat) is interior.
JensenResult jensen_probe(const GridFunction& u, std::size_t x_hat, double r, double delta, int trials,
                          std::uint64_t seed = 1);

struct DomainMasks {
    std::vector<std::uint8_t> lower;  ///< Omega_delta: right translates by ||h|| <= delta stay in the box
    std::vector<std::uint8_t> upper;  ///< Omega^delta: distance > c delta^{1/r}
    std::vector<std::uint8_t> both;   ///< Omega(delta)
    double conjugation_constant = 0.0;  ///< c after the safety factor
    double upper_radius = 0.0;          ///< c delta^{1/r}
    std::size_t count_lower = 0;
    std::size_t count_upper = 0;
    std::size_t count_both = 0;
};

/// Nodes x with x*h in the box for all ||h|| <= radius (dense sphere sampling with a small inflation).
std::vector<std::uint8_t> metric_interior_mask(const GroupSpec& spec, const GridGeometry& grid, double radius);

DomainMasks domain_shrink(const GroupSpec& spec, const GridGeometry& grid, double delta, int conj_samples = 4000,
                          std::uint64_t seed = 1);

struct TranslationMaxRecord {
    Point h;
    Point l;
    double delta = 0.0;
    double M = 0.0;
    std::vector<std::size_t> argmax_nodes;
};

/// max over the Omega_delta mask of u(x*h) - v(x*l) with multilinear interpolation.
TranslationMaxRecord translation_max(const GroupSpec& spec, const GridFunction& u, const GridFunction& v,
                                     const Point& h, const Point& l, double delta,
                                     const std::vector<std::uint8_t>& mask);
TranslationMaxRecord translation_max(const GroupSpec& spec, const GridFunction& u, const GridFunction& v,
                                     const Point& h, const Point& l, double delta);

/// sum_k max_nodes |Y_k u| over the full left-invariant frame (central differences).
double grid_lipschitz_constant(const GroupSpec& spec, const GridFunction& u);
/// sum_a h_a^2 max |d_aa u| / 8, the multilinear interpolation error bound.
double interpolation_error(const GridFunction& u);

}  // namespace carnot

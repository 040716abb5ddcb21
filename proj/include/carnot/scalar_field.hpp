#pragma once

#include <carnot/group.hpp>

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>

namespace carnot {

/// Axis-aligned coordinate box [lo, hi].
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Point& x, double slack = 1e-12) const;
    static Box cube(int dim, double half_width);
};

/// Value, Euclidean gradient and Euclidean Hessian of a scalar function at a point.
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

/// Second-order forward-mode scalar: arithmetic on (value, gradient, Hessian) triples.
///
/// Composition rules are exact, so evaluating a formula on JetScalar inputs yields the
/// exact jet of the formula.
class JetScalar {
public:
    JetScalar() = default;
    JetScalar(double c);  // NOLINT(google-explicit-constructor)
    JetScalar(double v, Eigen::VectorXd g, Eigen::MatrixXd h);

    static JetScalar variable(int dim, int index, double value);
    static JetScalar constant(int dim, double value);

    double value() const noexcept { return v_; }
    const Eigen::VectorXd& grad() const noexcept { return g_; }
    const Eigen::MatrixXd& hess() const noexcept { return h_; }
    Jet2 to_jet(int dim) const;

    JetScalar& operator+=(const JetScalar& o);
    JetScalar& operator-=(const JetScalar& o);
    friend JetScalar operator+(JetScalar a, const JetScalar& b) { return a += b; }
    friend JetScalar operator-(JetScalar a, const JetScalar& b) { return a -= b; }
    friend JetScalar operator-(const JetScalar& a);
    friend JetScalar operator*(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator*(double c, const JetScalar& a);
    friend JetScalar operator/(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator/(const JetScalar& a, double c) { return (1.0 / c) * a; }

    /// f(a) given f(a0), f'(a0), f''(a0).
    JetScalar compose(double f, double df, double d2f) const;

private:
    // Lazily sized: a constant built from a double has empty derivative parts.
    double v_ = 0.0;
    Eigen::VectorXd g_;
    Eigen::MatrixXd h_;
};

JetScalar sin(const JetScalar& a);
JetScalar cos(const JetScalar& a);
JetScalar exp(const JetScalar& a);
JetScalar log(const JetScalar& a);
JetScalar sqrt(const JetScalar& a);
JetScalar abs(const JetScalar& a);
JetScalar pow(const JetScalar& a, const JetScalar& b);
JetScalar min(const JetScalar& a, const JetScalar& b);
JetScalar max(const JetScalar& a, const JetScalar& b);

/// A scalar field on exponential coordinates with an optional exact jet and domain.
struct ScalarField {
    std::string name;
    std::function<double(const Point&)> value;
    std::function<Jet2(const Point&)> jet;  ///< empty when no analytic jet is available
    std::optional<Box> domain;

    double operator()(const Point& x) const { return value(x); }
    bool has_jet() const { return static_cast<bool>(jet); }
};

}  // namespace carnot

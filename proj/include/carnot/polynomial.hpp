#pragma once

#include <carnot/group.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace carnot {

/// Exponent vector of a monomial in at most kMaxDim variables.
using Monomial = std::array<std::uint8_t, kMaxDim>;

/// Sparse real polynomial in the exponential coordinates.
///
/// Zero coefficients are never stored, so the empty map is the zero polynomial.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(double c);  // NOLINT(google-explicit-constructor)

    static Polynomial variable(int index);

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(const Polynomial& a) { return -1.0 * a; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double c, const Polynomial& a);
    friend Polynomial operator/(const Polynomial& a, double c) { return (1.0 / c) * a; }

    Polynomial derivative(int index) const;
    double evaluate(const double* x) const;
    bool is_zero() const noexcept { return terms_.empty(); }
    int degree() const;
    const std::map<Monomial, double>& terms() const noexcept { return terms_; }

private:
    void add_term(const Monomial& m, double c);
    std::map<Monomial, double> terms_;
};

/// Polynomial vector field V = sum_k V_k d/dx_k.
using VectorField = std::vector<Polynomial>;

/// [V, W]_k = sum_l V_l d_l W_k - W_l d_l V_k.
VectorField lie_bracket(const VectorField& v, const VectorField& w);
Eigen::VectorXd evaluate(const VectorField& v, const Point& x);

/// Left-invariant horizontal fields X_1..X_m as exact polynomial vector fields.
std::vector<VectorField> horizontal_fields(const GroupSpec& spec);

}  // namespace carnot

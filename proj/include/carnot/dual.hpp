#pragma once

#include <utility>

namespace carnot {

/// Forward-mode dual number over an arbitrary ring T.
///
/// Nesting (Dual<Dual<double>>) gives exact mixed second derivatives; Dual<Polynomial>
/// differentiates symbolic polynomials. Only the ring operations used by the group
/// law are provided.
template <class T>
struct Dual {
    T re{};
    T eps{};

    Dual() = default;
    Dual(double v) : re(v), eps(0.0) {}  // NOLINT(google-explicit-constructor)
    Dual(T r, T e) : re(std::move(r)), eps(std::move(e)) {}

    Dual& operator+=(const Dual& o) {
        re += o.re;
        eps += o.eps;
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        re -= o.re;
        eps -= o.eps;
        return *this;
    }
    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator-(const Dual& a) { return Dual(-1.0 * a.re, -1.0 * a.eps); }
    friend Dual operator*(const Dual& a, const Dual& b) {
        return Dual(a.re * b.re, a.re * b.eps + a.eps * b.re);
    }
    friend Dual operator*(double c, const Dual& a) { return Dual(c * a.re, c * a.eps); }
    friend Dual operator/(const Dual& a, double c) { return Dual(a.re / c, a.eps / c); }
};

}  // namespace carnot

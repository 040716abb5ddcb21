#include <carnot/dual.hpp>
#include <carnot/polynomial.hpp>

#include <algorithm>

namespace carnot {

Polynomial::Polynomial(double c) {
    if (c != 0.0) terms_.emplace(Monomial{}, c);
}

Polynomial Polynomial::variable(int index) {
    Polynomial p;
    Monomial m{};
    m[static_cast<std::size_t>(index)] = 1;
    p.terms_.emplace(m, 1.0);
    return p;
}

void Polynomial::add_term(const Monomial& m, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            Monomial m{};
            for (std::size_t k = 0; k < m.size(); ++k) m[k] = static_cast<std::uint8_t>(ma[k] + mb[k]);
            out.add_term(m, ca * cb);
        }
    }
    return out;
}

Polynomial operator*(double c, const Polynomial& a) {
    Polynomial out;
    if (c == 0.0) return out;
    for (const auto& [m, v] : a.terms_) out.add_term(m, c * v);
    return out;
}

Polynomial Polynomial::derivative(int index) const {
    Polynomial out;
    const auto k = static_cast<std::size_t>(index);
    for (const auto& [m, c] : terms_) {
        if (m[k] == 0) continue;
        Monomial d = m;
        d[k] = static_cast<std::uint8_t>(d[k] - 1);
        out.add_term(d, c * m[k]);
    }
    return out;
}

double Polynomial::evaluate(const double* x) const {
    double total = 0.0;
    for (const auto& [m, c] : terms_) {
        double term = c;
        for (std::size_t k = 0; k < m.size(); ++k)
            for (int e = 0; e < m[k]; ++e) term *= x[k];
        total += term;
    }
    return total;
}

int Polynomial::degree() const {
    int deg = 0;
    for (const auto& [m, c] : terms_) {
        int d = 0;
        for (auto e : m) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

VectorField lie_bracket(const VectorField& v, const VectorField& w) {
    if (v.size() != w.size()) throw DimensionMismatch("lie_bracket: fields live in different dimensions");
    const int n = static_cast<int>(v.size());
    VectorField out(v.size());
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            out[k] += v[l] * w[k].derivative(l);
            out[k] -= w[l] * v[k].derivative(l);
        }
    }
    return out;
}

Eigen::VectorXd evaluate(const VectorField& v, const Point& x) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[k].evaluate(x.data());
    return out;
}

std::vector<VectorField> horizontal_fields(const GroupSpec& spec) {
    using D = Dual<Polynomial>;
    const int n = spec.dim();
    std::vector<VectorField> out;
    D x[kMaxDim];
    D y[kMaxDim];
    D prod[kMaxDim];
    for (int k = 0; k < n; ++k) x[k] = D(Polynomial::variable(k), Polynomial());
    for (int j = 0; j < spec.generators(); ++j) {
        for (int k = 0; k < n; ++k) y[k] = D(0.0);
        y[j] = D(Polynomial(), Polynomial(1.0));
        multiply_into(spec, x, y, prod);
        VectorField field(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) field[static_cast<std::size_t>(k)] = prod[k].eps;
        out.push_back(std::move(field));
    }
    return out;
}

}  // namespace carnot

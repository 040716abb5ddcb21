#include <carnot/scalar_field.hpp>

#include <cmath>
#include <limits>

namespace carnot {

bool Box::contains(const Point& x, double slack) const {
    if (x.size() != lo.size()) return false;
    for (int k = 0; k < lo.size(); ++k)
        if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
    return true;
}

Box Box::cube(int dim, double half_width) {
    return {Eigen::VectorXd::Constant(dim, -half_width), Eigen::VectorXd::Constant(dim, half_width)};
}

JetScalar::JetScalar(double c) : v_(c) {}

JetScalar::JetScalar(double v, Eigen::VectorXd g, Eigen::MatrixXd h) : v_(v), g_(std::move(g)), h_(std::move(h)) {}

JetScalar JetScalar::variable(int dim, int index, double value) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    g[index] = 1.0;
    return {value, std::move(g), Eigen::MatrixXd::Zero(dim, dim)};
}

JetScalar JetScalar::constant(int dim, double value) {
    return {value, Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
}

Jet2 JetScalar::to_jet(int dim) const {
    Jet2 j;
    j.value = v_;
    j.grad = g_.size() ? g_ : Eigen::VectorXd::Zero(dim);
    j.hess = h_.size() ? h_ : Eigen::MatrixXd::Zero(dim, dim);
    return j;
}

JetScalar& JetScalar::operator+=(const JetScalar& o) {
    v_ += o.v_;
    if (o.g_.size()) {
        if (g_.size()) {
            g_ += o.g_;
            h_ += o.h_;
        } else {
            g_ = o.g_;
            h_ = o.h_;
        }
    }
    return *this;
}

JetScalar& JetScalar::operator-=(const JetScalar& o) {
    v_ -= o.v_;
    if (o.g_.size()) {
        if (g_.size()) {
            g_ -= o.g_;
            h_ -= o.h_;
        } else {
            g_ = -o.g_;
            h_ = -o.h_;
        }
    }
    return *this;
}

JetScalar operator-(const JetScalar& a) { return -1.0 * a; }

JetScalar operator*(double c, const JetScalar& a) {
    JetScalar out(c * a.v_);
    if (a.g_.size()) {
        out.g_ = c * a.g_;
        out.h_ = c * a.h_;
    }
    return out;
}

JetScalar operator*(const JetScalar& a, const JetScalar& b) {
    if (!a.g_.size()) return a.v_ * b;
    if (!b.g_.size()) return b.v_ * a;
    Eigen::MatrixXd cross = a.g_ * b.g_.transpose();
    return {a.v_ * b.v_, a.v_ * b.g_ + b.v_ * a.g_, a.v_ * b.h_ + b.v_ * a.h_ + cross + cross.transpose()};
}

JetScalar JetScalar::compose(double f, double df, double d2f) const {
    if (!g_.size()) return JetScalar(f);
    // Avoid 0 * inf at points where the argument is locally constant.
    const double d2 = g_.isZero(0.0) ? 0.0 : d2f;
    return {f, df * g_, df * h_ + d2 * (g_ * g_.transpose())};
}

JetScalar operator/(const JetScalar& a, const JetScalar& b) {
    const double v = b.value();
    return a * b.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

JetScalar sin(const JetScalar& a) {
    const double s = std::sin(a.value());
    return a.compose(s, std::cos(a.value()), -s);
}

JetScalar cos(const JetScalar& a) {
    const double c = std::cos(a.value());
    return a.compose(c, -std::sin(a.value()), -c);
}

JetScalar exp(const JetScalar& a) {
    const double e = std::exp(a.value());
    return a.compose(e, e, e);
}

JetScalar log(const JetScalar& a) {
    const double v = a.value();
    return a.compose(std::log(v), 1.0 / v, -1.0 / (v * v));
}

JetScalar sqrt(const JetScalar& a) {
    const double s = std::sqrt(a.value());
    return a.compose(s, 0.5 / s, -0.25 / (s * a.value()));
}

JetScalar abs(const JetScalar& a) {
    const double v = a.value();
    const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return a.compose(std::abs(v), sign, 0.0);
}

JetScalar pow(const JetScalar& a, const JetScalar& b) {
    const double base = a.value();
    const double e = b.value();
    if (!b.grad().size() || b.grad().isZero(0.0)) {
        const double f = std::pow(base, e);
        const double df = e == 0.0 ? 0.0 : e * std::pow(base, e - 1.0);
        const double d2f = (e == 0.0 || e == 1.0) ? 0.0 : e * (e - 1.0) * std::pow(base, e - 2.0);
        return a.compose(f, df, d2f);
    }
    return exp(b * log(a));
}

JetScalar min(const JetScalar& a, const JetScalar& b) { return a.value() <= b.value() ? a : b; }

JetScalar max(const JetScalar& a, const JetScalar& b) { return a.value() >= b.value() ? a : b; }

}  // namespace carnot

#include <carnot/dual.hpp>
#include <carnot/horizontal.hpp>
#include <carnot/polynomial.hpp>

#include <Eigen/QR>

#include <cmath>

namespace carnot {

FrameMatrix frame_at(const GroupSpec& spec, const Point& x) {
    if (x.size() != spec.dim()) throw DimensionMismatch("frame_at: point has the wrong dimension");
    using D1 = Dual<double>;
    using D2 = Dual<D1>;
    const int n = spec.dim();
    const int m = spec.generators();
    FrameMatrix f;
    f.sigma.resize(n, m);
    f.dsigma.assign(static_cast<std::size_t>(m), Eigen::MatrixXd(n, n));
    D2 xd[kMaxDim];
    D2 yd[kMaxDim];
    D2 prod[kMaxDim];
    // Outer eps: the generator direction s; inner eps: the coordinate x_l.
    for (int j = 0; j < m; ++j) {
        for (int l = 0; l < n; ++l) {
            for (int k = 0; k < n; ++k) {
                xd[k] = D2(D1(x[k], k == l ? 1.0 : 0.0), D1(0.0));
                yd[k] = D2(0.0);
            }
            yd[j] = D2(D1(0.0), D1(1.0, 0.0));
            multiply_into(spec, xd, yd, prod);
            for (int k = 0; k < n; ++k) {
                f.sigma(k, j) = prod[k].eps.re;
                f.dsigma[static_cast<std::size_t>(j)](k, l) = prod[k].eps.eps;
            }
        }
    }
    return f;
}

Eigen::MatrixXd full_frame_at(const GroupSpec& spec, const Point& x) {
    if (x.size() != spec.dim()) throw DimensionMismatch("full_frame_at: point has the wrong dimension");
    using D = Dual<double>;
    const int n = spec.dim();
    Eigen::MatrixXd out(n, n);
    D xd[kMaxDim];
    D yd[kMaxDim];
    D prod[kMaxDim];
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            xd[k] = D(x[k]);
            yd[k] = D(0.0);
        }
        yd[j] = D(0.0, 1.0);
        multiply_into(spec, xd, yd, prod);
        for (int k = 0; k < n; ++k) out(k, j) = prod[k].eps;
    }
    return out;
}

Eigen::MatrixXd frame_correction(const FrameMatrix& frame, const Eigen::VectorXd& zeta) {
    const auto m = frame.sigma.cols();
    if (zeta.size() != frame.sigma.rows()) throw DimensionMismatch("frame_correction: covector has the wrong size");
    Eigen::MatrixXd raw(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            raw(i, j) = zeta.dot(frame.dsigma[static_cast<std::size_t>(j)] * frame.sigma.col(i));
    return 0.5 * (raw + raw.transpose());
}

HorizontalJet horizontal_jet(const FrameMatrix& frame, const Jet2& jet) {
    const auto n = frame.sigma.rows();
    const auto m = frame.sigma.cols();
    if (jet.grad.size() != n || jet.hess.rows() != n || jet.hess.cols() != n)
        throw DimensionMismatch("horizontal_jet: jet and frame dimensions differ");
    HorizontalJet h;
    h.hgrad = frame.sigma.transpose() * jet.grad;
    h.hhess_raw = frame.sigma.transpose() * jet.hess * frame.sigma;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            h.hhess_raw(i, j) += jet.grad.dot(frame.dsigma[static_cast<std::size_t>(j)] * frame.sigma.col(i));
    h.hhess_sym = 0.5 * (h.hhess_raw + h.hhess_raw.transpose());
    return h;
}

RankReport hormander_rank(const GroupSpec& spec, const Point& x, int max_depth) {
    if (max_depth < 1) throw InvalidParameter("max_depth must be >= 1");
    if (x.size() != spec.dim()) throw DimensionMismatch("hormander_rank: point has the wrong dimension");
    const auto generators = horizontal_fields(spec);
    std::vector<Eigen::VectorXd> columns;
    auto rank_of = [&]() {
        Eigen::MatrixXd span(spec.dim(), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c) span.col(static_cast<Eigen::Index>(c)) = columns[c];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
        qr.setThreshold(1e-9);
        return static_cast<int>(qr.rank());
    };
    RankReport report;
    std::vector<VectorField> level = generators;
    for (int depth = 1; depth <= max_depth; ++depth) {
        for (const auto& field : level) columns.push_back(evaluate(field, x));
        const int rank = rank_of();
        if (rank > report.achieved_rank) {
            report.achieved_rank = rank;
            report.depth_used = depth;
        }
        if (rank == spec.dim() || depth == max_depth) break;
        std::vector<VectorField> next;
        for (const auto& g : generators) {
            for (const auto& field : level) {
                auto b = lie_bracket(g, field);
                bool zero = true;
                for (const auto& p : b) zero = zero && p.is_zero();
                if (!zero) next.push_back(std::move(b));
            }
        }
        if (next.empty()) break;
        level = std::move(next);
    }
    return report;
}

Point exp_coordinate(const GroupSpec& spec, int layer, int index, double s) {
    if (layer < 1 || layer > spec.step()) throw InvalidParameter("layer out of range");
    if (index < 1 || index > spec.layer_dims()[static_cast<std::size_t>(layer - 1)])
        throw InvalidParameter("index out of range for its layer");
    Point e = Point::Zero(spec.dim());
    e[spec.layer_offset(layer) + index - 1] = s;
    return e;
}

namespace {

double eval_checked(const ScalarField& u, const Point& p) {
    if (u.domain && !u.domain->contains(p)) throw DomainExit("translated point leaves the field's domain");
    return u(p);
}

Eigen::VectorXd euclidean_gradient(const ScalarField& u, const Point& x) {
    if (u.has_jet()) return u.jet(x).grad;
    Eigen::VectorXd g(x.size());
    const double h = 1e-6;
    for (int k = 0; k < x.size(); ++k) {
        Point a = x;
        Point b = x;
        a[k] += h;
        b[k] -= h;
        g[k] = (eval_checked(u, a) - eval_checked(u, b)) / (2.0 * h);
    }
    return g;
}

}  // namespace

double group_directional_derivative(const GroupSpec& spec, const ScalarField& u, const Point& x, int layer,
                                    int index, double t) {
    if (t == 0.0) throw InvalidParameter("t must be nonzero");
    const double s = std::pow(t, layer);
    const Point moved = multiply(spec, x, exp_coordinate(spec, layer, index, s));
    return (eval_checked(u, moved) - eval_checked(u, x)) / s;
}

double taylor_residual(const GroupSpec& spec, const ScalarField& u, const Point& x, const Point& h) {
    const Eigen::VectorXd hgrad = frame_at(spec, x).sigma.transpose() * euclidean_gradient(u, x);
    const Eigen::VectorXd h1 = project_layer(spec, h, 1);
    return std::abs(eval_checked(u, multiply(spec, x, h)) - eval_checked(u, x) - hgrad.dot(h1));
}

}  // namespace carnot

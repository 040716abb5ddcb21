#include <carnot/solver.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>

namespace carnot {

DirichletProblem make_problem(GroupSpec spec, OperatorSpec op, GridGeometry grid, ScalarField boundary,
                              double eps_reg) {
    if (grid.dim() != spec.dim()) throw DimensionMismatch("grid dimension differs from the group dimension");
    return {std::move(spec), std::move(op), std::move(grid), std::move(boundary), eps_reg};
}

namespace {

double min_spacing_sq(const GridGeometry& g) {
    double h = std::numeric_limits<double>::infinity();
    for (int a = 0; a < g.dim(); ++a) h = std::min(h, g.spacing(a));
    return h * h;
}

}  // namespace

double regularization(const DirichletProblem& problem) {
    return problem.eps_reg >= 0.0 ? problem.eps_reg : min_spacing_sq(problem.grid);
}

GridFunction boundary_values(const DirichletProblem& problem) {
    GridFunction f(problem.grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = problem.boundary.value(problem.grid.node(i));
        if (!std::isfinite(f[i])) throw InvalidParameter("boundary data is not finite at node " + std::to_string(i));
    }
    return f;
}

namespace {

/// Central-difference jet at an interior node: second-order gradient, 3-point and 4-point Hessian stencils.
Jet2 local_jet(const GridGeometry& geo, const GridFunction& u, std::size_t i) {
    const int n = geo.dim();
    Jet2 j;
    j.value = u[i];
    j.grad.resize(n);
    j.hess.resize(n, n);
    for (int a = 0; a < n; ++a) {
        const std::size_t sa = geo.stride(a);
        const double ha = geo.spacing(a);
        j.grad[a] = (u[i + sa] - u[i - sa]) / (2.0 * ha);
        j.hess(a, a) = (u[i + sa] - 2.0 * u[i] + u[i - sa]) / (ha * ha);
        for (int b = a + 1; b < n; ++b) {
            const std::size_t sb = geo.stride(b);
            const double v = (u[i + sa + sb] - u[i + sa - sb] - u[i - sa + sb] + u[i - sa - sb]) /
                             (4.0 * ha * geo.spacing(b));
            j.hess(a, b) = v;
            j.hess(b, a) = v;
        }
    }
    return j;
}

struct Workspace {
    std::vector<std::size_t> interior;
    std::vector<FrameMatrix> frames;  ///< parallel to interior
    GridFunction f;
    double eps = 0.0;
};

Workspace make_workspace(const DirichletProblem& p) {
    Workspace w;
    w.f = boundary_values(p);
    w.eps = regularization(p);
    for (std::size_t i = 0; i < p.grid.size(); ++i)
        if (!p.grid.is_boundary(i)) w.interior.push_back(i);
    w.frames.resize(w.interior.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(w.interior.size()); ++k)
        w.frames[static_cast<std::size_t>(k)] = frame_at(p.spec, p.grid.node(w.interior[static_cast<std::size_t>(k)]));
    return w;
}

double node_residual(const OperatorSpec& op, const FrameMatrix& frame, const Jet2& jet, double eps) {
    return apply(op, horizontal_jet(frame, jet), eps);
}

GridFunction residual_with(const DirichletProblem& p, const Workspace& w, const GridFunction& u) {
    if (!(u.geometry() == p.grid)) throw DimensionMismatch("u does not live on the problem grid");
    GridFunction r(p.grid);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (p.grid.is_boundary(i)) r[i] = u[i] - w.f[i];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(w.interior.size()); ++k) {
        const std::size_t i = w.interior[static_cast<std::size_t>(k)];
        r[i] = node_residual(p.op, w.frames[static_cast<std::size_t>(k)], local_jet(p.grid, u, i), w.eps);
    }
    return r;
}

double interior_max(const Workspace& w, const GridFunction& r) {
    double m = 0.0;
    for (std::size_t i : w.interior) m = std::max(m, std::abs(r[i]));
    return m;
}

double interior_l2(const Workspace& w, const GridFunction& r) {
    double s = 0.0;
    for (std::size_t i : w.interior) s += r[i] * r[i];
    return std::sqrt(s);
}

/// D = sigma A sigma^T, the Euclidean second-order coefficient at a node.
Eigen::MatrixXd euclidean_coefficient(const OperatorSpec& op, const FrameMatrix& frame, const Jet2& jet, double eps) {
    const Eigen::VectorXd xi = frame.sigma.transpose() * jet.grad;
    return frame.sigma * op.coefficient(xi, eps) * frame.sigma.transpose();
}

void check_divergence(const GridFunction& u, double limit) {
    for (double v : u.values())
        if (!std::isfinite(v) || std::abs(v) > limit)
            throw Diverged("iterate left the admissible range (|u| > " + std::to_string(limit) + ")");
}

using Triplet = Eigen::Triplet<double>;

/// Jacobian of the discrete residual plus shift on the interior diagonal; newton = false keeps only the
/// frozen-coefficient second-order part (Picard).
Eigen::SparseMatrix<double> assemble(const DirichletProblem& p, const Workspace& w, const GridFunction& u, double shift,
                                     bool newton) {
    const auto& geo = p.grid;
    const int n = geo.dim();
    const std::size_t per_row = 1 + 2 * static_cast<std::size_t>(n) + 2 * static_cast<std::size_t>(n * (n - 1));
    std::vector<std::vector<Triplet>> local(w.interior.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(w.interior.size()); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        const std::size_t i = w.interior[k];
        const auto row = static_cast<int>(i);
        auto& t = local[k];
        t.reserve(per_row * 2);
        Jet2 jet = local_jet(geo, u, i);
        const Eigen::MatrixXd d = euclidean_coefficient(p.op, w.frames[k], jet, w.eps);
        const double scale = 1e-7 * (1.0 + jet.grad.cwiseAbs().maxCoeff());
        double centre = 0.0;
        for (int a = 0; a < n; ++a) {
            const double ha = geo.spacing(a);
            double dg = 0.0;
            if (newton) {
                const double g0 = jet.grad[a];
                jet.grad[a] = g0 + scale;
                const double rp = node_residual(p.op, w.frames[k], jet, w.eps);
                jet.grad[a] = g0 - scale;
                const double rm = node_residual(p.op, w.frames[k], jet, w.eps);
                jet.grad[a] = g0;
                dg = (rp - rm) / (2.0 * scale);
            }
            const double second = -d(a, a) / (ha * ha);
            const auto sa = static_cast<int>(geo.stride(a));
            t.emplace_back(row, row + sa, second + dg / (2.0 * ha));
            t.emplace_back(row, row - sa, second - dg / (2.0 * ha));
            centre += 2.0 * d(a, a) / (ha * ha);
            for (int b = a + 1; b < n; ++b) {
                const auto sb = static_cast<int>(geo.stride(b));
                const double c = -2.0 * d(a, b) / (4.0 * ha * geo.spacing(b));
                t.emplace_back(row, row + sa + sb, c);
                t.emplace_back(row, row - sa - sb, c);
                t.emplace_back(row, row + sa - sb, -c);
                t.emplace_back(row, row - sa + sb, -c);
            }
        }
        t.emplace_back(row, row, centre + shift);
    }
    std::vector<Triplet> all;
    all.reserve(w.interior.size() * per_row + geo.size());
    for (auto& t : local) all.insert(all.end(), t.begin(), t.end());
    for (std::size_t i = 0; i < geo.size(); ++i)
        if (geo.is_boundary(i)) all.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    Eigen::SparseMatrix<double> j(static_cast<Eigen::Index>(geo.size()), static_cast<Eigen::Index>(geo.size()));
    j.setFromTriplets(all.begin(), all.end());
    j.makeCompressed();
    return j;
}

/// The discrete system seen by the nonlinear iteration: a residual and its (approximate) Jacobian.
struct Discretization {
    std::function<GridFunction(const GridFunction&)> residual;
    std::function<Eigen::SparseMatrix<double>(const GridFunction&, double, bool)> jacobian;
};

Discretization central(const DirichletProblem& p, const Workspace& w) {
    return {[&p, &w](const GridFunction& u) { return residual_with(p, w, u); },
            [&p, &w](const GridFunction& u, double shift, bool newton) { return assemble(p, w, u, shift, newton); }};
}

std::vector<Eigen::VectorXd> horizontal_directions(int m, int count) {
    std::vector<Eigen::VectorXd> dirs;
    if (m == 1) {
        dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else if (m == 2) {
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * M_PI * k / count;
            Eigen::VectorXd v(2);
            v << std::cos(a), std::sin(a);
            dirs.push_back(v);
        }
    } else {
        for (int a = 0; a < m; ++a)
            for (double sa : {1.0, -1.0}) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
                v[a] = sa;
                dirs.push_back(v);
                for (int b = a + 1; b < m; ++b)
                    for (double sb : {1.0, -1.0}) {
                        Eigen::VectorXd u = v;
                        u[b] = sb;
                        dirs.push_back(u / std::sqrt(2.0));
                    }
            }
    }
    return dirs;
}

/// Off-grid stencil points x * (s v) per interior node and direction, as interpolation cells or exterior values.
struct Midrange {
    static constexpr std::uint32_t kExterior = std::numeric_limits<std::uint32_t>::max();
    double s = 0.0;
    std::size_t dirs = 0;
    int dim = 0;
    std::vector<std::uint32_t> base;  ///< lowest corner of the cell, or kExterior
    std::vector<double> frac;         ///< dim per point; the exterior value in slot 0 when exterior
};

Midrange make_midrange(const DirichletProblem& p, const Workspace& w, const SolveOptions& o) {
    if (p.op.name != "infinity") throw InvalidParameter("the midrange scheme discretizes the infinity instance only");
    if (o.directions < 2) throw InvalidParameter("midrange needs at least two directions");
    if (p.grid.size() >= Midrange::kExterior) throw InvalidParameter("grid too large for the midrange stencil");
    const auto& geo = p.grid;
    Midrange mr;
    mr.dim = geo.dim();
    mr.s = o.stencil_radius > 0.0 ? o.stencil_radius : std::pow(min_spacing_sq(geo), 0.25);
    const int m = p.spec.generators();
    const auto dirs = horizontal_directions(m, o.directions);
    mr.dirs = dirs.size();
    const std::size_t points = w.interior.size() * mr.dirs;
    mr.base.assign(points, 0);
    mr.frac.assign(points * static_cast<std::size_t>(mr.dim), 0.0);
    const int d = mr.dim;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(w.interior.size()); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        const Point x = geo.node(w.interior[k]);
        for (std::size_t q = 0; q < mr.dirs; ++q) {
            Point h = Point::Zero(d);
            h.head(m) = mr.s * dirs[q];
            const Point y = multiply(p.spec, x, h);
            const std::size_t pt = k * mr.dirs + q;
            double* fr = &mr.frac[pt * static_cast<std::size_t>(d)];
            if (!geo.box().contains(y, 0.0)) {
                mr.base[pt] = Midrange::kExterior;
                fr[0] = p.boundary.value(y);
                if (!std::isfinite(fr[0])) throw InvalidParameter("boundary data is not finite outside the box");
                continue;
            }
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) {
                const int n = geo.shape()[static_cast<std::size_t>(a)];
                const double t = std::clamp((y[a] - geo.box().lo[a]) / geo.spacing(a), 0.0, n - 1.0);
                const int i = std::min(static_cast<int>(std::floor(t)), n - 2);
                flat += geo.stride(a) * static_cast<std::size_t>(i);
                fr[a] = t - i;
            }
            mr.base[pt] = static_cast<std::uint32_t>(flat);
        }
    }
    return mr;
}

/// Calls emit(flat, weight) for each multilinear corner of stencil point pt.
template <class Emit>
void corners(const Midrange& mr, const GridGeometry& geo, std::size_t pt, Emit&& emit) {
    const double* fr = &mr.frac[pt * static_cast<std::size_t>(mr.dim)];
    for (unsigned c = 0; c < (1u << mr.dim); ++c) {
        double wgt = 1.0;
        std::size_t flat = mr.base[pt];
        for (int a = 0; a < mr.dim; ++a) {
            const bool up = (c >> a) & 1u;
            wgt *= up ? fr[a] : 1.0 - fr[a];
            if (up) flat += geo.stride(a);
        }
        if (wgt != 0.0) emit(flat, wgt);
    }
}

double point_value(const Midrange& mr, const GridGeometry& geo, const GridFunction& u, std::size_t pt) {
    if (mr.base[pt] == Midrange::kExterior) return mr.frac[pt * static_cast<std::size_t>(mr.dim)];
    double v = 0.0;
    corners(mr, geo, pt, [&](std::size_t flat, double wgt) { v += wgt * u[flat]; });
    return v;
}

/// Stencil points reaching the max and the min at node k; ties go to the lowest direction index.
std::pair<std::size_t, std::size_t> extremes(const Midrange& mr, const GridGeometry& geo, const GridFunction& u,
                                             std::size_t k, double& vmax, double& vmin) {
    std::size_t amax = k * mr.dirs, amin = amax;
    vmax = vmin = point_value(mr, geo, u, amax);
    for (std::size_t q = 1; q < mr.dirs; ++q) {
        const std::size_t pt = k * mr.dirs + q;
        const double v = point_value(mr, geo, u, pt);
        if (v > vmax) vmax = v, amax = pt;
        if (v < vmin) vmin = v, amin = pt;
    }
    return {amax, amin};
}

Discretization midrange(const DirichletProblem& p, const Workspace& w, std::shared_ptr<const Midrange> mr) {
    auto res = [&p, &w, mr](const GridFunction& u) {
        if (!(u.geometry() == p.grid)) throw DimensionMismatch("u does not live on the problem grid");
        GridFunction r(p.grid);
        for (std::size_t i = 0; i < u.size(); ++i)
            if (p.grid.is_boundary(i)) r[i] = u[i] - w.f[i];
        const double inv = 1.0 / (mr->s * mr->s);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(w.interior.size()); ++kk) {
            const auto k = static_cast<std::size_t>(kk);
            double vmax = 0.0, vmin = 0.0;
            extremes(*mr, p.grid, u, k, vmax, vmin);
            r[w.interior[k]] = (2.0 * u[w.interior[k]] - vmax - vmin) * inv;
        }
        return r;
    };
    auto jac = [&p, &w, mr](const GridFunction& u, double shift, bool) {
        const auto& geo = p.grid;
        const double inv = 1.0 / (mr->s * mr->s);
        std::vector<std::vector<Triplet>> local(w.interior.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(w.interior.size()); ++kk) {
            const auto k = static_cast<std::size_t>(kk);
            const auto row = static_cast<int>(w.interior[k]);
            auto& t = local[k];
            double vmax = 0.0, vmin = 0.0;
            const auto [amax, amin] = extremes(*mr, geo, u, k, vmax, vmin);
            t.emplace_back(row, row, 2.0 * inv + shift);
            for (std::size_t pt : {amax, amin})
                if (mr->base[pt] != Midrange::kExterior)
                    corners(*mr, geo, pt, [&](std::size_t flat, double wgt) {
                        t.emplace_back(row, static_cast<int>(flat), -wgt * inv);
                    });
        }
        std::vector<Triplet> all;
        for (auto& t : local) all.insert(all.end(), t.begin(), t.end());
        for (std::size_t i = 0; i < geo.size(); ++i)
            if (geo.is_boundary(i)) all.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
        Eigen::SparseMatrix<double> j(static_cast<Eigen::Index>(geo.size()), static_cast<Eigen::Index>(geo.size()));
        j.setFromTriplets(all.begin(), all.end());
        j.makeCompressed();
        return j;
    };
    return {res, jac};
}

/// BiCGSTAB with an ILUT preconditioner; small systems fall back to sparse LU when the Krylov solve stalls.
bool linear_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b, Eigen::VectorXd& x, SolveReport& rep) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> krylov;
    krylov.preconditioner().setFillfactor(2);
    krylov.preconditioner().setDroptol(1e-3);
    krylov.setTolerance(1e-7);
    krylov.setMaxIterations(2000);
    krylov.compute(a);
    if (krylov.info() == Eigen::Success) {
        x = krylov.solve(b);
        if (krylov.info() == Eigen::Success && x.allFinite()) return true;
    }
    ++rep.linear_failures;
    if (a.rows() > 6000) return false;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) return false;
    x = lu.solve(b);
    return lu.info() == Eigen::Success && x.allFinite();
}

/// Pseudo-transient continuation: (J + I / dt) step = -R with the switched-evolution dt update,
/// which turns into Newton once dt is large.
void run_newton(const Discretization& disc, const DirichletProblem& p, const Workspace& w, GridFunction& u,
                const SolveOptions& o, SolveReport& rep, double limit) {
    constexpr double dt_max = 1e14;
    double dt = 0.05;
    GridFunction r = disc.residual(u);
    double rmax = interior_max(w, r);
    double rl2 = interior_l2(w, r);
    int rejects = 0;
    while (rmax > o.tolerance && rep.iterations < o.max_iter) {
        ++rep.iterations;
        Eigen::Map<const Eigen::VectorXd> rv(r.values().data(), static_cast<Eigen::Index>(r.size()));
        bool accepted = false;
        // A Picard step stands in when the Newton system fails or its step is rejected.
        for (bool newton : {true, false}) {
            const auto jac = disc.jacobian(u, dt >= dt_max ? 0.0 : 1.0 / dt, newton);
            Eigen::VectorXd step;
            if (!linear_solve(jac, -rv, step, rep)) continue;
            GridFunction trial = u;
            for (std::size_t i = 0; i < u.size(); ++i)
                trial[i] = p.grid.is_boundary(i) ? w.f[i] : u[i] + step[static_cast<Eigen::Index>(i)];
            check_divergence(trial, limit);
            GridFunction tr = disc.residual(trial);
            const double tl2 = interior_l2(w, tr);
            if (std::isfinite(tl2) && tl2 <= 2.0 * rl2) {
                dt = std::min(dt_max, dt * std::clamp(rl2 / std::max(tl2, 1e-300), 0.5, 10.0));
                u = std::move(trial);
                r = std::move(tr);
                rl2 = tl2;
                rmax = interior_max(w, r);
                accepted = true;
                rejects = 0;
                break;
            }
        }
        if (!accepted) {
            dt *= 0.25;
            if (++rejects > 12) {
                rep.history.push_back(rmax);
                rep.stop_reason = "stagnated";
                break;
            }
        }
        rep.history.push_back(rmax);
    }
    rep.final_residual = rmax;
}

void run_explicit(const DirichletProblem& p, const Workspace& w, GridFunction& u, const SolveOptions& o,
                  SolveReport& rep, double limit) {
    const auto& geo = p.grid;
    const int n = geo.dim();
    GridFunction r = residual_with(p, w, u);
    double rmax = interior_max(w, r);
    std::vector<double> tau(w.interior.size());
    while (rmax > o.tolerance && rep.iterations < o.max_iter) {
        ++rep.iterations;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(w.interior.size()); ++kk) {
            const auto k = static_cast<std::size_t>(kk);
            const Eigen::MatrixXd d = euclidean_coefficient(p.op, w.frames[k], local_jet(geo, u, w.interior[k]), w.eps);
            double denom = 0.0;
            for (int a = 0; a < n; ++a) {
                denom += 2.0 * d(a, a) / (geo.spacing(a) * geo.spacing(a));
                for (int b = 0; b < n; ++b)
                    if (b != a) denom += std::abs(d(a, b)) / (geo.spacing(a) * geo.spacing(b));
            }
            tau[k] = o.cfl / std::max(denom, w.eps + 1e-300);
        }
        for (std::size_t k = 0; k < w.interior.size(); ++k) u[w.interior[k]] -= tau[k] * r[w.interior[k]];
        check_divergence(u, limit);
        r = residual_with(p, w, u);
        rmax = interior_max(w, r);
        rep.history.push_back(rmax);
    }
    rep.final_residual = rmax;
}

OperatorSpec shifted(const OperatorSpec& op, double shift) {
    OperatorSpec out = op;
    const auto base = op.coefficient;
    out.coefficient = [base, shift](const Eigen::VectorXd& xi, double eps) {
        Eigen::MatrixXd a = base(xi, eps);
        a.diagonal().array() += shift;
        return a;
    };
    out.degenerate = false;
    return out;
}

/// A + s I on a decreasing ladder of s above the problem's own shift, then the problem itself, all warm-started.
void run_continuation(const DirichletProblem& problem, const OperatorSpec& base, double floor, const Workspace& w,
                      GridFunction& u, const SolveOptions& options, SolveReport& rep, double limit) {
    DirichletProblem staged = problem;
    SolveOptions stage_opts = options;
    stage_opts.tolerance = std::max(options.tolerance, 1e-5);
    for (double shift : {1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4}) {
        if (shift <= 3.0 * floor) break;
        staged.op = shifted(base, shift);
        SolveReport stage;
        stage_opts.max_iter = std::max(0, std::min(20, options.max_iter - rep.iterations));
        run_newton(central(staged, w), staged, w, u, stage_opts, stage, limit);
        rep.iterations += stage.iterations;
        rep.linear_failures += stage.linear_failures;
        rep.history.insert(rep.history.end(), stage.history.begin(), stage.history.end());
    }
    SolveOptions final_opts = options;
    final_opts.max_iter = std::max(0, options.max_iter - rep.iterations);
    SolveReport last;
    run_newton(central(problem, w), problem, w, u, final_opts, last, limit);
    rep.iterations += last.iterations;
    rep.linear_failures += last.linear_failures;
    rep.history.insert(rep.history.end(), last.history.begin(), last.history.end());
    rep.final_residual = last.final_residual;
    rep.stop_reason = last.stop_reason;
}

}  // namespace

GridFunction residual(const DirichletProblem& problem, const GridFunction& u) {
    return residual_with(problem, make_workspace(problem), u);
}

double interior_residual_norm(const DirichletProblem& problem, const GridFunction& res) {
    double m = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i)
        if (!problem.grid.is_boundary(i)) m = std::max(m, std::abs(res[i]));
    return m;
}

SolveResult solve(const DirichletProblem& problem, const GridFunction& initial, const SolveOptions& options) {
    if (!(options.tolerance > 0.0)) throw InvalidParameter("tolerance must be positive");
    if (options.max_iter < 0) throw InvalidParameter("max_iter must be non-negative");
    if (!(initial.geometry() == problem.grid)) throw DimensionMismatch("initial guess does not match the grid");
    const auto t0 = std::chrono::steady_clock::now();
    const Workspace w = make_workspace(problem);
    const double nu = problem.op.degenerate ? (options.viscosity >= 0.0 ? options.viscosity : min_spacing_sq(problem.grid)) : 0.0;
    DirichletProblem reg = problem;
    if (nu > 0.0) reg.op = shifted(problem.op, nu);
    const double limit = 1e3 * (w.f.max_abs() + 1.0);
    SolveResult out{initial, {}};
    for (std::size_t i = 0; i < out.u.size(); ++i)
        if (problem.grid.is_boundary(i)) out.u[i] = w.f[i];
    check_divergence(out.u, limit);
    auto& rep = out.report;
    rep.method = options.method == SolveMethod::Newton ? "newton" : "explicit";
    rep.metadata["monotonicity"] = "no discrete monotonicity claim";
    rep.metadata["eps_reg"] = std::to_string(w.eps);
    rep.metadata["scheme"] = "central";
    if (problem.op.degenerate && options.scheme == Scheme::Central) rep.metadata["viscosity"] = std::to_string(nu);
    rep.metadata["linear_solver"] = options.method == SolveMethod::Newton ? "BiCGSTAB + ILUT, sparse LU fallback" : "none";
    if (options.scheme == Scheme::Midrange) {
        if (options.method != SolveMethod::Newton) throw InvalidParameter("the midrange scheme is solved by Newton only");
        const auto mr = std::make_shared<const Midrange>(make_midrange(problem, w, options));
        rep.metadata["scheme"] = "midrange";
        rep.metadata["stencil_radius"] = std::to_string(mr->s);
        rep.metadata["directions"] = std::to_string(mr->dirs);
        rep.metadata["monotonicity"] = "monotone: nondecreasing in u(x), nonincreasing in every neighbour";
        run_newton(midrange(problem, w, mr), problem, w, out.u, options, rep, limit);
    } else if (options.method == SolveMethod::Newton && options.continuation && problem.op.degenerate) {
        // Plain Newton first; degenerate instances often converge directly from a good start.
        const GridFunction start = out.u;
        const double r0 = interior_max(w, residual_with(reg, w, out.u));
        SolveOptions direct = options;
        direct.max_iter = std::min(options.max_iter, 8);
        try {
            run_newton(central(reg, w), reg, w, out.u, direct, rep, limit);
            if (rep.final_residual > options.tolerance && rep.final_residual <= 1e-3 * r0) {
                direct.max_iter = std::min(options.max_iter, 30) - rep.iterations;
                SolveReport more;
                run_newton(central(reg, w), reg, w, out.u, direct, more, limit);
                rep.iterations += more.iterations;
                rep.linear_failures += more.linear_failures;
                rep.history.insert(rep.history.end(), more.history.begin(), more.history.end());
                rep.final_residual = more.final_residual;
            }
        } catch (const Diverged&) {
            out.u = start;
            rep.final_residual = std::numeric_limits<double>::infinity();
        }
        if (rep.final_residual > options.tolerance) out.u = start;
        if (rep.final_residual > options.tolerance && rep.iterations < options.max_iter) {
            rep.stop_reason.clear();
            rep.metadata["continuation"] = "A + s I on s = 1, 0.3, 0.1, ... down to the viscosity";
            run_continuation(reg, problem.op, nu, w, out.u, options, rep, limit);
        }
    } else if (options.method == SolveMethod::Newton) {
        run_newton(central(reg, w), reg, w, out.u, options, rep, limit);
    } else {
        run_explicit(reg, w, out.u, options, rep, limit);
    }
    rep.converged = rep.final_residual <= options.tolerance;
    if (rep.stop_reason.empty()) rep.stop_reason = rep.converged ? "tolerance reached" : "max_iter reached";
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

GridFunction scheme_residual(const DirichletProblem& problem, const GridFunction& u, const SolveOptions& options) {
    const Workspace w = make_workspace(problem);
    if (options.scheme == Scheme::Midrange)
        return midrange(problem, w, std::make_shared<const Midrange>(make_midrange(problem, w, options))).residual(u);
    const double nu = problem.op.degenerate ? (options.viscosity >= 0.0 ? options.viscosity : min_spacing_sq(problem.grid)) : 0.0;
    DirichletProblem reg = problem;
    if (nu > 0.0) reg.op = shifted(problem.op, nu);
    return residual_with(reg, w, u);
}

SolveResult solve(const DirichletProblem& problem, const GridFunction& initial, double tolerance, int max_iter) {
    SolveOptions o;
    o.tolerance = tolerance;
    o.max_iter = max_iter;
    return solve(problem, initial, o);
}

PLimitStudy p_limit_study(const GroupSpec& spec, const GridGeometry& grid, const ScalarField& boundary,
                          const std::vector<double>& ps, const SolveOptions& options, double eps_reg) {
    if (ps.empty()) throw InvalidParameter("p_limit_study needs at least one p");
    PLimitStudy study;
    GridFunction start;
    SolveOptions p_opts = options;
    p_opts.scheme = Scheme::Central;
    for (double p : ps) {
        const auto prob = make_problem(spec, builtin_operator("normalized_p", {{"p", p}}), grid, boundary, eps_reg);
        if (start.size() == 0) start = boundary_values(prob);
        auto res = solve(prob, start, p_opts);
        study.rows.push_back({p, res.report.final_residual, res.report.iterations, res.report.converged, 0.0});
        start = res.u;
        study.solutions.push_back(std::move(res.u));
    }
    const auto inf_prob = make_problem(spec, builtin_operator("infinity"), grid, boundary, eps_reg);
    auto ref = solve(inf_prob, start, options);
    study.reference = std::move(ref.u);
    for (std::size_t k = 0; k < ps.size(); ++k) study.rows[k].error_vs_reference = max_abs_diff(study.solutions[k], study.reference);
    study.rows.push_back({std::numeric_limits<double>::infinity(), ref.report.final_residual, ref.report.iterations,
                          ref.report.converged, 0.0});
    return study;
}

void write_p_limit_csv(const std::string& path, const PLimitStudy& study) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os.precision(17);
    os << "p,residual,iterations,error_vs_reference\n";
    for (const auto& r : study.rows) {
        if (std::isinf(r.p)) os << "inf";
        else os << r.p;
        os << ',' << r.residual << ',' << r.iterations << ',' << r.error_vs_reference << '\n';
    }
}

SmpWitness smp_witness(const GridFunction& u, double tie_tol) {
    if (!(tie_tol >= 0.0)) throw InvalidParameter("tie tolerance must be non-negative");
    const auto& geo = u.geometry();
    SmpWitness s;
    s.boundary_max = -std::numeric_limits<double>::infinity();
    s.interior_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        double& slot = geo.is_boundary(i) ? s.boundary_max : s.interior_max;
        slot = std::max(slot, u[i]);
    }
    s.max_value = std::max(s.boundary_max, s.interior_max);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] == s.max_value) {
            s.argmax_node = i;
            break;
        }
    s.gap = s.boundary_max - s.interior_max;
    s.interior_attains = s.interior_max >= s.max_value - tie_tol;
    s.constant_case = u.max() - u.min() <= tie_tol;
    return s;
}

}  // namespace carnot

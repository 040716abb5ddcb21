#include <carnot/semiconvex.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace carnot {

namespace {

double default_tol(const GridFunction& u, double tol) { return tol >= 0.0 ? tol : 1e-10 * std::max(1.0, u.max_abs()); }

}  // namespace

double semiconvexity_constant(const GridFunction& u, double tol) {
    const auto& geo = u.geometry();
    const int d = geo.dim();
    tol = default_tol(u, tol);
    double lambda = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        int idx[kMaxDim];
        for (int a = 0; a < d; ++a) idx[a] = geo.axis_index(i, a);
        auto inside = [&](int a) { return idx[a] > 0 && idx[a] < geo.shape()[static_cast<std::size_t>(a)] - 1; };
        for (int a = 0; a < d; ++a) {
            if (!inside(a)) continue;
            any = true;
            const std::size_t sa = geo.stride(a);
            const double h2 = geo.spacing(a) * geo.spacing(a);
            const double diff = u[i + sa] - 2.0 * u[i] + u[i - sa];
            lambda = std::max(lambda, (-tol - diff) / h2);
            for (int b = a + 1; b < d; ++b) {
                if (!inside(b)) continue;
                const std::size_t sb = geo.stride(b);
                const double hd2 = h2 + geo.spacing(b) * geo.spacing(b);
                const double plus = u[i + sa + sb] - 2.0 * u[i] + u[i - sa - sb];
                const double minus = u[i + sa - sb] - 2.0 * u[i] + u[i - sa + sb];
                lambda = std::max(lambda, (-tol - plus) / hd2);
                lambda = std::max(lambda, (-tol - minus) / hd2);
            }
        }
    }
    if (!any) throw InvalidParameter("semiconvexity_constant needs interior nodes");
    return lambda > kSemiconvexCap ? std::numeric_limits<double>::infinity() : lambda;
}

double semiconcavity_constant(const GridFunction& v, double tol) {
    GridFunction neg = v;
    for (auto& x : neg.values()) x = -x;
    return semiconvexity_constant(neg, tol);
}

namespace {

/// Closed interval for rigorous-enough lower bounds of the convolution penalty over a block.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
    Interval(double a, double b) : lo(a), hi(b) {}

    Interval& operator+=(const Interval& o) {
        lo += o.lo;
        hi += o.hi;
        return *this;
    }
    friend Interval operator+(Interval a, const Interval& b) { return a += b; }
    friend Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
    friend Interval operator*(const Interval& a, const Interval& b) {
        const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
        return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
    }
    friend Interval operator*(double c, const Interval& a) {
        return c >= 0.0 ? Interval(c * a.lo, c * a.hi) : Interval(c * a.hi, c * a.lo);
    }
    friend Interval operator/(const Interval& a, double c) { return (1.0 / c) * a; }

    double mag_lo() const { return (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi)); }
};

struct Block {
    std::vector<std::size_t> nodes;
    Interval range[kMaxDim];
    double wmax = -std::numeric_limits<double>::infinity();
    double wmin = std::numeric_limits<double>::infinity();
};

std::vector<Block> build_blocks(const GridFunction& w, int side) {
    const auto& geo = w.geometry();
    const int d = geo.dim();
    std::vector<int> counts(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        counts[static_cast<std::size_t>(a)] = (geo.shape()[static_cast<std::size_t>(a)] + side - 1) / side;
        total *= static_cast<std::size_t>(counts[static_cast<std::size_t>(a)]);
    }
    std::vector<Block> blocks(total);
    for (auto& b : blocks)
        for (int a = 0; a < d; ++a) b.range[a] = Interval(std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::size_t bi = 0;
        for (int a = 0; a < d; ++a) bi = bi * static_cast<std::size_t>(counts[static_cast<std::size_t>(a)]) +
                                         static_cast<std::size_t>(geo.axis_index(i, a) / side);
        auto& b = blocks[bi];
        b.nodes.push_back(i);
        b.wmax = std::max(b.wmax, w[i]);
        b.wmin = std::min(b.wmin, w[i]);
        for (int a = 0; a < d; ++a) {
            const double c = geo.coordinate(a, geo.axis_index(i, a));
            b.range[a].lo = std::min(b.range[a].lo, c);
            b.range[a].hi = std::max(b.range[a].hi, c);
        }
    }
    return blocks;
}

/// Lower bound of ||z||^{2 r!} over a box of z values.
double penalty_lower_bound(const GroupSpec& spec, const Interval* z) {
    const int rf = spec.step_factorial();
    double total = 0.0;
    int k = 0;
    const auto& dims = spec.layer_dims();
    for (std::size_t j = 0; j < dims.size(); ++j) {
        double sq = 0.0;
        for (int i = 0; i < dims[j]; ++i, ++k) {
            const double m = z[k].mag_lo();
            sq += m * m;
        }
        const int e = rf / static_cast<int>(j + 1);
        double p = 1.0;
        for (int q = 0; q < e; ++q) p *= sq;
        total += p;
    }
    return total;
}

/// Exact discrete envelope by branch and bound over node blocks; Max selects sup, otherwise inf.
template <bool Max>
GridFunction envelope(const GroupSpec& spec, const GridFunction& w, double eps) {
    if (!(eps > 0.0)) throw InvalidParameter("convolution parameter eps must be positive");
    const auto& geo = w.geometry();
    const int n = spec.dim();
    if (geo.dim() != n) throw DimensionMismatch("grid dimension differs from the group dimension");
    const std::vector<Block> blocks = build_blocks(w, 4);
    std::vector<double> coords(w.size() * static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Point p = geo.node(i);
        for (int k = 0; k < n; ++k) coords[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] = p[k];
    }
    const double inv2e = 1.0 / (2.0 * eps);
    GridFunction out(geo);
#pragma omp parallel
    {
        std::vector<double> bound(blocks.size());
        std::vector<std::size_t> order(blocks.size());
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t xi = 0; xi < static_cast<std::ptrdiff_t>(w.size()); ++xi) {
            const auto x = static_cast<std::size_t>(xi);
            double xinv[kMaxDim];
            Interval xinv_i[kMaxDim];
            for (int k = 0; k < n; ++k) {
                xinv[k] = -coords[x * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
                xinv_i[k] = Interval(xinv[k]);
            }
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                Interval z[kMaxDim];
                multiply_into(spec, blocks[b].range, xinv_i, z);
                const double pen = penalty_lower_bound(spec, z) * inv2e;
                bound[b] = Max ? blocks[b].wmax - pen : blocks[b].wmin + pen;
            }
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return Max ? bound[a] > bound[b] : bound[a] < bound[b];
            });
            double best = w[x];
            for (std::size_t b : order) {
                const double margin = 1e-12 * (1.0 + std::abs(best));
                if (Max ? bound[b] < best - margin : bound[b] > best + margin) break;
                for (std::size_t y : blocks[b].nodes) {
                    double z[kMaxDim];
                    multiply_into(spec, &coords[y * static_cast<std::size_t>(n)], xinv, z);
                    const double pen = hom_norm_power(spec, z) * inv2e;
                    if constexpr (Max) best = std::max(best, w[y] - pen);
                    else best = std::min(best, w[y] + pen);
                }
            }
            out[x] = best;
        }
    }
    return out;
}

}  // namespace

GridFunction sup_convolution(const GroupSpec& spec, const GridFunction& w, double eps) {
    return envelope<true>(spec, w, eps);
}

GridFunction inf_convolution(const GroupSpec& spec, const GridFunction& w, double eps) {
    return envelope<false>(spec, w, eps);
}

GridFunction strict_subsolution_perturb(const GridFunction& u, double lambda) {
    if (!(lambda > 0.0)) throw InvalidParameter("lambda must be positive");
    const double u0 = u.min();
    GridFunction out = u;
    for (auto& v : out.values()) v += lambda * (v - u0) * (v - u0);
    return out;
}

ScalarMap quadratic_map(double lambda, double s0) {
    if (!(lambda >= 0.0)) throw InvalidParameter("quadratic_map needs lambda >= 0");
    return {"s + lambda (s - s0)^2", [=](double s) { return s + lambda * (s - s0) * (s - s0); },
            [=](double s) { return 1.0 + 2.0 * lambda * (s - s0); }, [=](double) { return 2.0 * lambda; }};
}

ScalarMap exponential_map(double s0) {
    return {"s + exp(s - s0) - 1", [=](double s) { return s + std::exp(s - s0) - 1.0; },
            [=](double s) { return 1.0 + std::exp(s - s0); }, [=](double s) { return std::exp(s - s0); }};
}

ChainRuleReport chain_rule_inequality_check(const GroupSpec& spec, const OperatorSpec& op, const ScalarField& w,
                                            const ScalarMap& h, const std::vector<Point>& points, double tol) {
    if (!w.has_jet()) throw InvalidParameter("chain_rule_inequality_check needs an analytic jet");
    ChainRuleReport rep;
    for (const auto& x : points) {
        const Jet2 jw = w.jet(x);
        const double s = jw.value;
        const double d1 = h.dh(s);
        const double d2 = h.d2h(s);
        if (d1 < 1.0 || d2 < 0.0) {
            ++rep.skipped;
            continue;
        }
        Jet2 jh;
        jh.value = h.h(s);
        jh.grad = d1 * jw.grad;
        jh.hess = d1 * jw.hess + d2 * (jw.grad * jw.grad.transpose());
        const FrameMatrix frame = frame_at(spec, x);
        const HorizontalJet hw = horizontal_jet(frame, jw);
        const HorizontalJet hh = horizontal_jet(frame, jh);
        double lhs = 0.0;
        double rhs = 0.0;
        try {
            lhs = apply(op, hh);
            rhs = (apply(op, hw) - (d2 / d1) * op.ellipticity(hw.hgrad)) / op.phi(1.0 / d1);
        } catch (const SingularGradient&) {
            ++rep.skipped;
            continue;
        }
        ++rep.points;
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.worst_slack = std::min(rep.worst_slack, rhs - lhs);
        rep.max_gap = std::max(rep.max_gap, rhs - lhs);
        if (rhs - lhs < -tol) ++rep.violations;
    }
    return rep;
}

double linear_shift_difference(const GroupSpec& spec, const OperatorSpec& op, const ScalarField& w,
                               const Eigen::VectorXd& p, const Point& x) {
    const FrameMatrix frame = frame_at(spec, x);
    Jet2 j = w.jet(x);
    const double base = apply(op, horizontal_jet(frame, j));
    j.grad += p;
    return std::abs(apply(op, horizontal_jet(frame, j)) - base);
}

LinearShiftReport linear_perturbation_shift(const GroupSpec& spec, const OperatorSpec& op, const ScalarField& w,
                                            const Eigen::VectorXd& direction, const std::vector<Point>& points,
                                            int levels) {
    if (!w.has_jet()) throw InvalidParameter("linear_perturbation_shift needs an analytic jet");
    if (direction.size() != spec.dim()) throw DimensionMismatch("p must live in the ambient dimension");
    if (levels < 2) throw InvalidParameter("need at least two dyadic levels");
    const Eigen::VectorXd dir = direction.normalized();
    const int m = spec.generators();

    // Gradient box and frame scale for the moduli.
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = -lo;
    double sigma_norm = 0.0;
    std::vector<HorizontalJet> base;
    std::vector<FrameMatrix> frames;
    for (const auto& x : points) {
        frames.push_back(frame_at(spec, x));
        base.push_back(horizontal_jet(frames.back(), w.jet(x)));
        lo = lo.cwiseMin(base.back().hgrad);
        hi = hi.cwiseMax(base.back().hgrad);
        sigma_norm = std::max(sigma_norm, frames.back().sigma.norm());
    }
    const Box kbox{lo.array() - (1.0 + sigma_norm), hi.array() + (1.0 + sigma_norm)};
    LinearShiftReport rep;
    std::vector<double> radii;
    for (int k = 0; k < levels; ++k) {
        rep.p_norms.push_back(std::ldexp(1.0, -k));
        radii.push_back(rep.p_norms.back() * std::max(sigma_norm, 1e-300));
    }
    const ModulusEstimate mod = estimate_moduli(op, kbox, radii, 20000, 7);
    for (int k = 0; k < levels; ++k) {
        const double pn = rep.p_norms[static_cast<std::size_t>(k)];
        // mod.radii is ascending, the dyadic levels descend.
        const std::size_t mi = static_cast<std::size_t>(levels - 1 - k);
        const Eigen::VectorXd p = pn * dir;
        double worst = 0.0;
        double bound_max = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            Jet2 j = w.jet(points[i]);
            j.grad += p;
            const double diff = std::abs(apply(op, horizontal_jet(frames[i], j)) - apply(op, base[i]));
            const double bound = mod.omega_A[mi] * (base[i].hhess_raw.norm() + pn) +
                                 op.A(base[i].hgrad).norm() * pn + mod.omega_H[mi];
            worst = std::max(worst, diff);
            bound_max = std::max(bound_max, bound);
            if (bound > 0.0) rep.fitted_constant = std::max(rep.fitted_constant, diff / bound);
        }
        rep.max_diff.push_back(worst);
        rep.bound_terms.push_back(bound_max);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = 0; k < levels; ++k) {
        const double dv = rep.max_diff[static_cast<std::size_t>(k)];
        if (dv <= 0.0) continue;
        const double lx = std::log(rep.p_norms[static_cast<std::size_t>(k)]);
        const double ly = std::log(dv);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    rep.decay_slope = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : std::nan("");
    const bool all_zero = std::all_of(rep.max_diff.begin(), rep.max_diff.end(), [](double v) { return v == 0.0; });
    rep.vanishes = all_zero || rep.max_diff.back() < rep.max_diff.front();
    return rep;
}

JensenResult jensen_probe(const GridFunction& u, std::size_t x_hat, double r, double delta, int trials,
                          std::uint64_t seed) {
    const auto& geo = u.geometry();
    const int d = geo.dim();
    if (x_hat >= u.size()) throw InvalidParameter("x_hat is not a grid node");
    if (!(r > 0.0) || !(delta > 0.0) || trials < 1) throw InvalidParameter("jensen_probe needs r, delta > 0 and trials >= 1");
    if (!std::isfinite(semiconvexity_constant(u))) throw NotSemiConvex("jensen_probe: u is not semi-convex at grid scale");
    const double range = u.max() - u.min();
    if (u[x_hat] < u.max() - 1e-9 * std::max(1.0, range)) throw InvalidParameter("x_hat is not a discrete maximum");

    const Point centre = geo.node(x_hat);
    std::vector<std::size_t> ball;
    std::vector<Point> pos;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point p = geo.node(i);
        if ((p - centre).norm() <= r) {
            ball.push_back(i);
            pos.push_back(p);
        }
    }
    auto in_ball = [&](std::size_t i) { return std::binary_search(ball.begin(), ball.end(), i); };
    std::vector<std::uint8_t> interior(ball.size(), 1);
    for (std::size_t b = 0; b < ball.size(); ++b) {
        for (int a = 0; a < d && interior[b]; ++a) {
            const int ia = geo.axis_index(ball[b], a);
            if (ia == 0 || ia == geo.shape()[static_cast<std::size_t>(a)] - 1 || !in_ball(ball[b] + geo.stride(a)) ||
                !in_ball(ball[b] - geo.stride(a)))
                interior[b] = 0;
        }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i : ball) {
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
    }
    const double tie = 1e-9 * std::max(1.0, hi - lo);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    JensenResult res;
    res.trials = trials;
    std::vector<double> vals(ball.size());
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd p(d);
        for (int a = 0; a < d; ++a) p[a] = gauss(rng);
        p *= delta * std::pow(unit(rng), 1.0 / d) / p.norm();
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < ball.size(); ++b) {
            vals[b] = u[ball[b]] + p.dot(pos[b]);
            best = std::max(best, vals[b]);
        }
        std::size_t pick = ball.size();
        double pick_dist = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < ball.size(); ++b) {
            if (vals[b] < best - tie) continue;
            const double dist = (pos[b] - centre).norm();
            if (dist < pick_dist) {
                pick = b;
                pick_dist = dist;
            }
        }
        if (interior[pick]) ++res.interior;
    }
    res.fraction = static_cast<double>(res.interior) / trials;
    return res;
}

namespace {

/// Unit-norm sample points: dilation-normalized cube samples plus axis and pair extremes.
std::vector<Point> unit_sphere_samples(const GroupSpec& spec, int random_count) {
    const int n = spec.dim();
    std::vector<Point> out;
    auto push = [&](Point z) {
        const double r = hom_norm(spec, z);
        if (r > 0.0) out.push_back(dilate(spec, 1.0 / r, z));
    };
    for (int a = 0; a < n; ++a) {
        for (double sa : {-1.0, 1.0}) {
            Point z = Point::Zero(n);
            z[a] = sa;
            push(z);
            for (int b = a + 1; b < n; ++b) {
                for (double sb : {-1.0, 1.0}) {
                    for (double w : {0.25, 0.5, 1.0, 2.0, 4.0}) {
                        Point q = z;
                        q[b] = sb * w;
                        push(q);
                    }
                }
            }
        }
    }
    std::mt19937_64 rng(20240229);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < random_count; ++s) {
        Point z(n);
        for (int k = 0; k < n; ++k) z[k] = u(rng);
        push(z);
    }
    return out;
}

}  // namespace

std::vector<std::uint8_t> metric_interior_mask(const GroupSpec& spec, const GridGeometry& grid, double radius) {
    if (!(radius > 0.0)) throw InvalidParameter("radius must be positive");
    if (grid.dim() != spec.dim()) throw DimensionMismatch("grid dimension differs from the group dimension");
    const int n = spec.dim();
    const auto sphere = unit_sphere_samples(spec, 1024);
    std::vector<Point> hs;
    for (const auto& s : sphere) hs.push_back(dilate(spec, 1.02 * radius, s));
    std::vector<std::uint8_t> mask(grid.size(), 0);
    const Box& box = grid.box();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(grid.size()); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        if (grid.is_boundary(i)) continue;
        const Point x = grid.node(i);
        bool ok = true;
        double y[kMaxDim];
        for (const auto& h : hs) {
            multiply_into(spec, x.data(), h.data(), y);
            for (int k = 0; k < n && ok; ++k) ok = y[k] > box.lo[k] && y[k] < box.hi[k];
            if (!ok) break;
        }
        mask[i] = ok ? 1 : 0;
    }
    return mask;
}

DomainMasks domain_shrink(const GroupSpec& spec, const GridGeometry& grid, double delta, int conj_samples,
                          std::uint64_t seed) {
    if (!(delta > 0.0)) throw InvalidParameter("delta must be positive");
    double nu = 0.0;
    const int n = spec.dim();
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
        Point c(n);
        for (int k = 0; k < n; ++k) c[k] = ((corner >> k) & 1u) ? grid.box().hi[k] : grid.box().lo[k];
        nu = std::max(nu, hom_norm(spec, c));
    }
    DomainMasks m;
    m.conjugation_constant = 1.5 * estimate_conjugation_constant(spec, nu, conj_samples, seed).conjugation;
    m.upper_radius = m.conjugation_constant * std::pow(delta, 1.0 / spec.step());
    m.lower = metric_interior_mask(spec, grid, delta);
    m.upper = metric_interior_mask(spec, grid, m.upper_radius);
    m.both.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        m.both[i] = m.lower[i] && m.upper[i];
        m.count_lower += m.lower[i];
        m.count_upper += m.upper[i];
        m.count_both += m.both[i];
    }
    if (m.count_both == 0) throw EmptyDomain("Omega(delta) has no grid nodes for delta = " + std::to_string(delta));
    return m;
}

TranslationMaxRecord translation_max(const GroupSpec& spec, const GridFunction& u, const GridFunction& v,
                                     const Point& h, const Point& l, double delta,
                                     const std::vector<std::uint8_t>& mask) {
    if (!(u.geometry() == v.geometry())) throw DimensionMismatch("u and v live on different grids");
    if (mask.size() != u.size()) throw DimensionMismatch("mask does not match the grid");
    if (!(hom_norm(spec, h) < delta) || !(hom_norm(spec, l) < delta))
        throw InvalidParameter("translation_max needs ||h||, ||l|| < delta");
    const auto& geo = u.geometry();
    std::vector<double> vals(u.size(), -std::numeric_limits<double>::infinity());
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!mask[i]) continue;
        const Point x = geo.node(i);
        vals[i] = u.interpolate(multiply(spec, x, h)) - v.interpolate(multiply(spec, x, l));
        hi = std::max(hi, vals[i]);
        lo = std::min(lo, vals[i]);
    }
    if (!std::isfinite(hi)) throw EmptyDomain("translation_max: empty mask");
    TranslationMaxRecord rec{h, l, delta, hi, {}};
    const double tie = 1e-9 * (hi - lo);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (mask[i] && vals[i] >= hi - tie) rec.argmax_nodes.push_back(i);
    return rec;
}

TranslationMaxRecord translation_max(const GroupSpec& spec, const GridFunction& u, const GridFunction& v,
                                     const Point& h, const Point& l, double delta) {
    return translation_max(spec, u, v, h, l, delta, metric_interior_mask(spec, u.geometry(), delta));
}

double grid_lipschitz_constant(const GroupSpec& spec, const GridFunction& u) {
    const auto& geo = u.geometry();
    const int n = geo.dim();
    if (n != spec.dim()) throw DimensionMismatch("grid dimension differs from the group dimension");
    std::vector<double> best(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        Eigen::VectorXd g(n);
        for (int a = 0; a < n; ++a) {
            const int ia = geo.axis_index(i, a);
            const std::size_t s = geo.stride(a);
            const int last = geo.shape()[static_cast<std::size_t>(a)] - 1;
            if (ia == 0) g[a] = (u[i + s] - u[i]) / geo.spacing(a);
            else if (ia == last) g[a] = (u[i] - u[i - s]) / geo.spacing(a);
            else g[a] = (u[i + s] - u[i - s]) / (2.0 * geo.spacing(a));
        }
        const Eigen::VectorXd y = full_frame_at(spec, geo.node(i)).transpose() * g;
        for (int k = 0; k < n; ++k) best[static_cast<std::size_t>(k)] = std::max(best[static_cast<std::size_t>(k)], std::abs(y[k]));
    }
    return std::accumulate(best.begin(), best.end(), 0.0);
}

double interpolation_error(const GridFunction& u) {
    const auto& geo = u.geometry();
    double total = 0.0;
    for (int a = 0; a < geo.dim(); ++a) {
        const std::size_t s = geo.stride(a);
        double worst = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const int ia = geo.axis_index(i, a);
            if (ia == 0 || ia == geo.shape()[static_cast<std::size_t>(a)] - 1) continue;
            worst = std::max(worst, std::abs(u[i + s] - 2.0 * u[i] + u[i - s]));
        }
        total += worst / 8.0;
    }
    return total;
}

}  // namespace carnot

#include <carnot/operators.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace carnot {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Mat identity_like(const Vec& xi) { return Mat::Identity(xi.size(), xi.size()); }

double reg_norm_sq(const Vec& xi, double eps) { return xi.squaredNorm() + eps * eps; }

void require_nonsingular(const std::string& name, double rho_sq) {
    if (rho_sq == 0.0) throw SingularGradient(name + ": coefficient undefined at zero gradient");
}

double get(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::string get(const std::map<std::string, std::string>& choices, const std::string& key, std::string fallback) {
    const auto it = choices.find(key);
    return it == choices.end() ? fallback : it->second;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

/// Radial profile g of the divergence-form structure equation.
struct Profile {
    std::function<double(double)> g;
    std::function<double(double)> dg;
};

void validate_profile(const std::string& name, const Profile& p) {
    double prev = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double t = 0.05 * k;
        const double v = p.g(t);
        if (!(v > 0.0) || !(p.dg(t) > 0.0) || v <= prev)
            throw InvalidParameter(name + ": g must be positive and increasing on (0, inf)");
        prev = v;
    }
}

OperatorSpec make_sub_laplacian() {
    OperatorSpec op;
    op.name = "sub_laplacian";
    op.coefficient = [](const Vec& xi, double) { return identity_like(xi); };
    op.homogeneity = 0.0;
    set_phi_power(op, 1.0);
    return op;
}

OperatorSpec make_infinity() {
    OperatorSpec op;
    op.name = "infinity";
    op.coefficient = [](const Vec& xi, double) -> Mat { return xi * xi.transpose(); };
    op.degenerate = true;
    op.homogeneity = 2.0;
    set_phi_power(op, 3.0);
    return op;
}

OperatorSpec make_normalized_p(double p) {
    if (!(p > 1.0)) throw InvalidParameter("normalized_p requires p > 1, got " + fmt(p));
    OperatorSpec op;
    op.name = "normalized_p(" + fmt(p) + ")";
    op.singular_at_zero = p != 2.0;
    op.coefficient = [p, name = op.name](const Vec& xi, double eps) -> Mat {
        if (p == 2.0) return identity_like(xi);
        const double rho_sq = reg_norm_sq(xi, eps);
        require_nonsingular(name, rho_sq);
        return identity_like(xi) + ((p - 2.0) / rho_sq) * (xi * xi.transpose());
    };
    op.homogeneity = 0.0;
    set_phi_power(op, 1.0);
    return op;
}

OperatorSpec make_mean_curvature() {
    OperatorSpec op;
    op.name = "mean_curvature";
    op.coefficient = [](const Vec& xi, double) -> Mat {
        return identity_like(xi) - (xi * xi.transpose()) / (1.0 + xi.squaredNorm());
    };
    set_phi_power(op, 1.0);
    return op;
}

OperatorSpec make_uhlenbeck(const std::string& gname, double q, bool normalized) {
    Profile prof;
    std::optional<double> hom;
    double phi_power = 1.0;
    if (gname == "power") {
        if (!(q > 1.0)) throw InvalidParameter("uhlenbeck power profile requires q > 1, got " + fmt(q));
        prof.g = [q](double t) { return std::pow(t, q - 1.0); };
        prof.dg = [q](double t) { return (q - 1.0) * std::pow(t, q - 2.0); };
        hom = normalized ? 0.0 : q - 2.0;
        phi_power = normalized ? 1.0 : q - 1.0;
    } else if (gname == "mean_curvature") {
        prof.g = [](double t) { return t / std::sqrt(1.0 + t * t); };
        prof.dg = [](double t) { return std::pow(1.0 + t * t, -1.5); };
    } else {
        throw UnknownName("uhlenbeck: unknown profile g '" + gname + "'");
    }
    validate_profile("uhlenbeck", prof);
    OperatorSpec op;
    op.name = std::string(normalized ? "uhlenbeck_normalized(" : "uhlenbeck(") + gname +
              (gname == "power" ? "," + fmt(q) : "") + ")";
    const bool power = gname == "power";
    // Value of the bracketed factor's weight g(rho)/rho as rho -> 0 where it has a finite limit.
    op.degenerate = !normalized && power && q > 2.0;
    op.singular_at_zero = power && ((normalized && q != 2.0) || (!normalized && q < 2.0));
    op.coefficient = [prof, normalized, power, q, name = op.name](const Vec& xi, double eps) -> Mat {
        const double rho_sq = reg_norm_sq(xi, eps);
        if (rho_sq == 0.0) {
            if (!power || q == 2.0) return identity_like(xi);
            if (!normalized && q > 2.0) return Mat::Zero(xi.size(), xi.size());
            require_nonsingular(name, rho_sq);
        }
        const double rho = std::sqrt(rho_sq);
        const double ratio = rho * prof.dg(rho) / prof.g(rho);
        Mat a = identity_like(xi) + ((ratio - 1.0) / rho_sq) * (xi * xi.transpose());
        if (!normalized) a *= prof.g(rho) / rho;
        return a;
    };
    op.homogeneity = hom;
    set_phi_power(op, phi_power);
    return op;
}

OperatorSpec make_aronsson(const std::string& fname, double q) {
    OperatorSpec op;
    std::function<Vec(const Vec&)> grad_f;
    if (fname == "half_norm_sq") {
        grad_f = [](const Vec& xi) { return xi; };
        op.homogeneity = 2.0;
    } else if (fname == "power") {
        if (!(q > 1.0)) throw InvalidParameter("aronsson power requires q > 1, got " + fmt(q));
        grad_f = [q](const Vec& xi) -> Vec {
            const double r = xi.norm();
            return r == 0.0 ? Vec::Zero(xi.size()) : Vec(std::pow(r, q - 2.0) * xi);
        };
        op.homogeneity = 2.0 * q - 2.0;
    } else if (fname == "quartic") {
        grad_f = [](const Vec& xi) -> Vec { return xi.array().cube().matrix(); };
        op.homogeneity = 6.0;
    } else {
        throw UnknownName("aronsson: unknown f '" + fname + "'");
    }
    op.name = "aronsson(" + fname + (fname == "power" ? "," + fmt(q) : "") + ")";
    op.coefficient = [grad_f](const Vec& xi, double) -> Mat {
        const Vec g = grad_f(xi);
        return g * g.transpose();
    };
    op.degenerate = true;
    set_phi_power(op, *op.homogeneity + 1.0);
    return op;
}

OperatorSpec make_broken() {
    OperatorSpec op;
    op.name = "broken_negative";
    op.coefficient = [](const Vec& xi, double) -> Mat { return -identity_like(xi); };
    op.homogeneity = 0.0;
    set_phi_power(op, 1.0);
    return op;
}

double tol_for(double a, double b) { return 1e-10 * (1.0 + std::abs(a) + std::abs(b)); }

void record(CheckReport& r, double slack, double tol) {
    ++r.samples;
    r.worst_slack = r.samples == 1 ? slack : std::min(r.worst_slack, slack);
    if (slack < -tol) ++r.violations;
}

}  // namespace

void set_phi_power(OperatorSpec& op, double k) {
    op.phi = [k](double s) { return std::pow(s, k); };
    if (k == 0.0) op.phi_label = "1";
    else if (k == 1.0) op.phi_label = "s";
    else op.phi_label = "s^" + fmt(k);
}

std::vector<std::string> builtin_operator_names() {
    return {"sub_laplacian", "infinity",       "normalized_p", "uhlenbeck",
            "mean_curvature", "aronsson", "broken_negative"};
}

OperatorSpec builtin_operator(const std::string& name, const std::map<std::string, double>& params,
                              const std::map<std::string, std::string>& choices) {
    OperatorSpec op;
    if (name == "sub_laplacian") op = make_sub_laplacian();
    else if (name == "infinity") op = make_infinity();
    else if (name == "normalized_p") op = make_normalized_p(get(params, "p", 4.0));
    else if (name == "mean_curvature") op = make_mean_curvature();
    else if (name == "uhlenbeck")
        op = make_uhlenbeck(get(choices, "g", "power"), get(params, "q", 4.0), get(params, "normalized", 0.0) != 0.0);
    else if (name == "aronsson") op = make_aronsson(get(choices, "f", "half_norm_sq"), get(params, "q", 3.0));
    else if (name == "broken_negative") op = make_broken();
    else throw UnknownName("unknown operator '" + name + "'");
    if (const auto it = params.find("phi_power"); it != params.end()) set_phi_power(op, it->second);
    return op;
}

double apply(const OperatorSpec& op, const Eigen::VectorXd& xi, const Eigen::MatrixXd& sym_hessian, double eps) {
    if (sym_hessian.rows() != xi.size() || sym_hessian.cols() != xi.size())
        throw DimensionMismatch("apply: Hessian and gradient sizes differ");
    const Mat a = op.coefficient(xi, eps);
    return -a.cwiseProduct(sym_hessian.transpose()).sum() + op.H(xi);
}

double apply(const OperatorSpec& op, const HorizontalJet& hjet, double eps) {
    return apply(op, hjet.hgrad, hjet.hhess_sym, eps);
}

CheckReport check_ellipticity(const OperatorSpec& op, const std::vector<Eigen::VectorXd>& xi_samples) {
    CheckReport r;
    r.check = "ellipticity";
    r.min_value = std::numeric_limits<double>::infinity();
    for (const auto& xi : xi_samples) {
        if (xi.squaredNorm() == 0.0) {
            r.notes.push_back("zero gradient sample skipped");
            continue;
        }
        const double e = op.ellipticity(xi);
        r.min_value = std::min(r.min_value, e);
        ++r.samples;
        r.worst_slack = r.samples == 1 ? e : std::min(r.worst_slack, e);
        if (!(e > 0.0)) ++r.violations;
    }
    return r;
}

CheckReport check_scaling(const OperatorSpec& op, const std::vector<ScalingSample>& samples) {
    CheckReport r;
    r.check = "scaling";
    int h_violations = 0;
    int sc2_violations = 0;
    bool homogeneity_exact = op.homogeneity.has_value();
    for (const auto& s : samples) {
        if (s.t < 1.0) throw InvalidParameter("check_scaling: samples need t >= 1");
        if (s.xi.squaredNorm() == 0.0) throw InvalidParameter("check_scaling: samples need xi != 0");
        const double factor = 1.0 / (s.t * op.phi(1.0 / s.t));
        const Mat a_t = op.A(s.t * s.xi);
        const Mat a_1 = op.A(s.xi);
        const double lhs = -a_t.cwiseProduct(s.X).sum();
        const double rhs = -a_1.cwiseProduct(s.X).sum() * factor;
        const int before = r.violations;
        record(r, rhs - lhs, tol_for(lhs, rhs));

        const double h_lhs = op.H(s.t * s.xi);
        const double h_rhs = op.H(s.xi) / op.phi(1.0 / s.t);
        if (h_rhs - h_lhs < -tol_for(h_lhs, h_rhs)) {
            ++h_violations;
            if (r.violations == before) ++r.violations;
        }
        const double e_lhs = -s.xi.dot(a_t * s.xi);
        const double e_rhs = -s.xi.dot(a_1 * s.xi) * factor;
        r.worst_slack = std::min(r.worst_slack, e_rhs - e_lhs);
        if (e_rhs - e_lhs < -tol_for(e_lhs, e_rhs)) {
            ++sc2_violations;
            if (r.violations == before) ++r.violations;
        }
        if (homogeneity_exact) {
            const double k = *op.homogeneity;
            const double tk = std::pow(s.t, k);
            const bool a_ok = (a_t - tk * a_1).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + tk * a_1.cwiseAbs().maxCoeff());
            const bool phi_ok = std::abs(factor - tk) <= 1e-12 * tk;
            homogeneity_exact = a_ok && phi_ok && !op.hamiltonian;
        }
    }
    if (h_violations) r.notes.push_back("H inequality violated at " + std::to_string(h_violations) + " samples");
    if (sc2_violations)
        r.notes.push_back("xi (x) xi consequence violated at " + std::to_string(sc2_violations) + " samples");
    if (op.homogeneity)
        r.notes.push_back(homogeneity_exact ? "homogeneity certificate: A(t xi) = t^k A(xi) and 1/(t phi(1/t)) = t^k"
                                            : "homogeneity certificate failed");
    return r;
}

double estimate_a_theta(const OperatorSpec& op, int m, double theta, int points, int rounds) {
    if (!(theta > 0.0)) throw InvalidParameter("theta must be positive");
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    auto on_sphere = [&](Vec v) {
        const double n = v.norm();
        return Vec(theta * v / n);
    };
    Vec best;
    double best_val = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& z) {
        const double e = op.ellipticity(z);
        if (e < best_val) {
            best_val = e;
            best = z;
        }
    };
    for (int k = 0; k < points; ++k) {
        Vec v(m);
        if (m == 2) {
            const double a = 2.0 * M_PI * k / points;
            v << std::cos(a), std::sin(a);
        } else {
            for (int i = 0; i < m; ++i) v[i] = gauss(rng);
        }
        consider(on_sphere(v));
    }
    // Coordinate axes and diagonals are common extremizers.
    for (int i = 0; i < m; ++i) {
        Vec v = Vec::Zero(m);
        v[i] = 1.0;
        consider(on_sphere(v));
    }
    consider(on_sphere(Vec::Ones(m)));
    double radius = 2.0 * std::sqrt(static_cast<double>(m)) / std::pow(points, 1.0 / std::max(1, m - 1));
    for (int round = 0; round < rounds; ++round) {
        const Vec centre = best;
        for (int k = 0; k < points / 10; ++k) {
            Vec v(m);
            for (int i = 0; i < m; ++i) v[i] = gauss(rng);
            consider(on_sphere(centre / theta + radius * v / std::sqrt(static_cast<double>(m))));
        }
        radius *= 0.1;
    }
    return best_val;
}

EllipticityBound ellipticity_lower_bound(const OperatorSpec& op, double theta, const Eigen::VectorXd& xi) {
    const double r = xi.norm();
    if (!(theta > 0.0) || r < theta) throw InvalidParameter("ellipticity_lower_bound needs |xi| >= theta > 0");
    EllipticityBound b;
    b.a_theta = estimate_a_theta(op, static_cast<int>(xi.size()), theta);
    b.lhs = op.ellipticity(xi);
    const double ph = op.phi(theta / r);
    b.rhs = b.a_theta / ph;
    b.rhs_strong = r * b.a_theta / (theta * ph);
    b.holds = b.lhs >= b.rhs * (1.0 - 1e-9);
    b.holds_strong = b.lhs >= b.rhs_strong * (1.0 - 1e-9);
    return b;
}

SmpReport check_smp_hypotheses(const OperatorSpec& op, const std::vector<SmpSample>& samples) {
    SmpReport rep;
    rep.monotonicity.check = "smp_monotonicity";
    rep.scaling.check = "smp_scaling";
    rep.positivity.check = "smp_positivity";
    for (const auto& s : samples) {
        const Mat a = op.A(s.xi);
        const double h = op.H(s.xi);
        const double g_x = -a.cwiseProduct(s.X).sum() + h;
        const double g_y = -a.cwiseProduct(s.Y).sum() + h;
        record(rep.monotonicity, g_y - g_x, tol_for(g_x, g_y));

        if (!(s.lambda > 0.0) || s.lambda > 1.0) throw InvalidParameter("smp samples need lambda in (0,1]");
        const Mat a_l = op.A(s.lambda * s.xi);
        const double lhs = -s.lambda * a_l.cwiseProduct(s.X).sum() + op.H(s.lambda * s.xi);
        const double rhs = op.phi(s.lambda) * g_x;
        record(rep.scaling, lhs - rhs, tol_for(lhs, rhs));

        const double e = s.xi.dot(a * s.xi);
        const double tr = a.cwiseProduct(s.X).sum();
        const double threshold = (tr - h) / e;
        const double gamma = threshold > 0.0 ? 2.0 * threshold : 1.0;
        const double g = gamma * e - tr + h;
        ++rep.positivity.samples;
        rep.positivity.worst_slack =
            rep.positivity.samples == 1 ? g : std::min(rep.positivity.worst_slack, g);
        if (!(g > 0.0)) ++rep.positivity.violations;
    }
    return rep;
}

namespace {

Mat random_symmetric(std::mt19937_64& rng, int m, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Mat x(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) x(i, j) = x(j, i) = u(rng);
    return x;
}

Vec random_nonzero(std::mt19937_64& rng, int m, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(m);
    do {
        for (int i = 0; i < m; ++i) v[i] = u(rng);
    } while (v.norm() < 0.05 * scale);
    return v;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_gradients(int m, int count, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) out.push_back(random_nonzero(rng, m, scale));
    return out;
}

std::vector<ScalingSample> sample_scaling(int m, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t(1.0, 8.0);
    std::vector<ScalingSample> out;
    for (int k = 0; k < count; ++k) {
        ScalingSample s;
        s.t = k % 10 == 0 ? 1.0 : t(rng);
        s.xi = random_nonzero(rng, m, 2.0);
        s.X = random_symmetric(rng, m, 2.0);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SmpSample> sample_smp(int m, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lam(0.01, 1.0);
    std::vector<SmpSample> out;
    for (int k = 0; k < count; ++k) {
        SmpSample s;
        s.xi = random_nonzero(rng, m, 2.0);
        s.X = random_symmetric(rng, m, 2.0);
        const Mat p = random_symmetric(rng, m, 1.0);
        s.Y = s.X - p * p.transpose();
        s.lambda = lam(rng);
        out.push_back(std::move(s));
    }
    return out;
}

ModulusEstimate estimate_moduli(const OperatorSpec& op, const Box& gradient_box, const std::vector<double>& radii,
                                int pairs, std::uint64_t seed) {
    if (radii.empty()) throw InvalidParameter("estimate_moduli needs at least one radius");
    for (double r : radii)
        if (!(r > 0.0)) throw InvalidParameter("radii must be positive");
    const int m = gradient_box.dim();
    ModulusEstimate est;
    est.radii = radii;
    std::sort(est.radii.begin(), est.radii.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss;
    for (double t : est.radii) {
        double wa = 0.0;
        double wh = 0.0;
        for (int s = 0; s < pairs; ++s) {
            Vec xi(m);
            for (int i = 0; i < m; ++i)
                xi[i] = gradient_box.lo[i] + unit(rng) * (gradient_box.hi[i] - gradient_box.lo[i]);
            Vec dir(m);
            if (s % 4 == 0 && xi.norm() > 0.0) {
                dir = xi.normalized();
            } else {
                for (int i = 0; i < m; ++i) dir[i] = gauss(rng);
                dir.normalize();
            }
            const double len = s % 2 == 0 ? t : t * unit(rng);
            const Vec zeta = xi + len * dir;
            if (!gradient_box.contains(zeta, 0.0)) continue;
            wa = std::max(wa, (op.A(xi) - op.A(zeta)).norm());
            wh = std::max(wh, std::abs(op.H(xi) - op.H(zeta)));
        }
        est.omega_A.push_back(wa);
        est.omega_H.push_back(wh);
    }
    for (std::size_t k = 1; k < est.radii.size(); ++k) {
        if (est.omega_A[k] < est.omega_A[k - 1] || est.omega_H[k] < est.omega_H[k - 1]) est.monotone = false;
        est.omega_A[k] = std::max(est.omega_A[k], est.omega_A[k - 1]);
        est.omega_H[k] = std::max(est.omega_H[k], est.omega_H[k - 1]);
    }
    return est;
}

}  // namespace carnot

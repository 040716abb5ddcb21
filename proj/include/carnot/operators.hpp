#pragma once

#include <carnot/horizontal.hpp>

#include <Eigen/Core>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

/// L u = -Tr(A(Xu) XX*u) + H(Xu) with the scaling function phi of the structure conditions.
struct OperatorSpec {
    std::string name;
    /// A(xi) with the singular-gradient regularization |xi| -> sqrt(|xi|^2 + eps^2); eps = 0 is the
    /// exact coefficient and throws SingularGradient where the instance is undefined.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)> coefficient;
    std::function<double(const Eigen::VectorXd&)> hamiltonian;  ///< empty means H = 0
    std::function<double(double)> phi;
    std::string phi_label;

    bool degenerate = false;        ///< A(0) = 0
    bool singular_at_zero = false;  ///< A undefined at xi = 0
    /// A(t xi) = t^k A(xi) exactly; enables the exact scaling certificate.
    std::optional<double> homogeneity;

    Eigen::MatrixXd A(const Eigen::VectorXd& xi) const { return coefficient(xi, 0.0); }
    double H(const Eigen::VectorXd& xi) const { return hamiltonian ? hamiltonian(xi) : 0.0; }
    /// <A(xi) xi, xi>.
    double ellipticity(const Eigen::VectorXd& xi) const { return xi.dot(A(xi) * xi); }
};

/// Names accepted by builtin_operator.
std::vector<std::string> builtin_operator_names();

/// Parameters: normalized_p: "p"; uhlenbeck: "g" in {power, mean_curvature}, "q" (power exponent),
/// "normalized" (0/1); aronsson: "f" in {half_norm_sq, power, quartic}, "q". Any instance accepts "phi"
/// overrides through set_phi.
OperatorSpec builtin_operator(const std::string& name, const std::map<std::string, double>& params = {},
                              const std::map<std::string, std::string>& choices = {});

/// phi(s) = s^k.
void set_phi_power(OperatorSpec& op, double k);

/// -Tr(A(hgrad) hhess_sym) + H(hgrad); eps regularizes the singular gradient.
double apply(const OperatorSpec& op, const HorizontalJet& hjet, double eps = 0.0);
double apply(const OperatorSpec& op, const Eigen::VectorXd& xi, const Eigen::MatrixXd& sym_hessian,
             double eps = 0.0);

struct CheckReport {
    std::string check;
    int samples = 0;
    int violations = 0;
    double worst_slack = 0.0;  ///< min over samples of (rhs - lhs); negative means violated
    double min_value = 0.0;    ///< check-specific summary (e.g. min ellipticity)
    std::vector<std::string> notes;
    bool passed() const { return violations == 0; }
};

struct ScalingSample {
    double t = 1.0;
    Eigen::VectorXd xi;
    Eigen::MatrixXd X;
};

CheckReport check_ellipticity(const OperatorSpec& op, const std::vector<Eigen::VectorXd>& xi_samples);

/// Both inequalities of the scaling condition and the X = xi (x) xi consequence.
CheckReport check_scaling(const OperatorSpec& op, const std::vector<ScalingSample>& samples);

struct EllipticityBound {
    double lhs = 0.0;         ///< E(xi)
    double rhs = 0.0;         ///< a_theta / phi(theta/|xi|)
    double rhs_strong = 0.0;  ///< |xi| a_theta / (theta phi(theta/|xi|))
    double a_theta = 0.0;
    bool holds = false;
    bool holds_strong = false;
};

/// a_theta = inf_{|zeta| = theta} E(zeta) by sphere sampling with refinement.
double estimate_a_theta(const OperatorSpec& op, int m, double theta, int points = 10000, int rounds = 3);
EllipticityBound ellipticity_lower_bound(const OperatorSpec& op, double theta, const Eigen::VectorXd& xi);

struct SmpSample {
    Eigen::VectorXd xi;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;  ///< Y <= X for the monotonicity hypothesis
    double lambda = 0.5;
};

struct SmpReport {
    CheckReport monotonicity;  ///< hypothesis (1)
    CheckReport scaling;       ///< hypothesis (2)
    CheckReport positivity;    ///< hypothesis (3)
    bool passed() const { return monotonicity.passed() && scaling.passed() && positivity.passed(); }
};

SmpReport check_smp_hypotheses(const OperatorSpec& op, const std::vector<SmpSample>& samples);

/// Random samples used by the check suites (deterministic in the seed).
std::vector<Eigen::VectorXd> sample_gradients(int m, int count, std::uint64_t seed, double scale = 2.0);
std::vector<ScalingSample> sample_scaling(int m, int count, std::uint64_t seed);
std::vector<SmpSample> sample_smp(int m, int count, std::uint64_t seed);

struct ModulusEstimate {
    std::vector<double> radii;
    std::vector<double> omega_A;
    std::vector<double> omega_H;
    bool monotone = true;  ///< raw estimates were nondecreasing before the running max was applied
};

/// Monte-Carlo sup of |A(xi) - A(zeta)|_F and |H(xi) - H(zeta)| over |xi - zeta| <= t in the box.
ModulusEstimate estimate_moduli(const OperatorSpec& op, const Box& gradient_box, const std::vector<double>& radii,
                                int pairs = 100000, std::uint64_t seed = 1);

}  // namespace carnot

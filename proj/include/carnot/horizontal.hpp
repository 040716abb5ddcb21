#pragma once

#include <carnot/group.hpp>
#include <carnot/scalar_field.hpp>

#include <Eigen/Core>

#include <vector>

namespace carnot {

/// sigma(x) (n x m, columns are the horizontal fields) and its x-derivative.
struct FrameMatrix {
    Eigen::MatrixXd sigma;
    /// dsigma[j](k, l) = d sigma^j_k / d x_l.
    std::vector<Eigen::MatrixXd> dsigma;
};

struct HorizontalJet {
    Eigen::VectorXd hgrad;
    Eigen::MatrixXd hhess_raw;  ///< (X_i X_j u)_{ij}
    Eigen::MatrixXd hhess_sym;
};

/// Pushforward of the generators by left translation, differentiated exactly.
FrameMatrix frame_at(const GroupSpec& spec, const Point& x);

/// All n left-invariant fields (one per basis vector), without derivatives.
Eigen::MatrixXd full_frame_at(const GroupSpec& spec, const Point& x);

HorizontalJet horizontal_jet(const FrameMatrix& frame, const Jet2& jet);

/// M(x, zeta)_{ij} = (<Dsigma^j sigma^i, zeta> + <Dsigma^i sigma^j, zeta>) / 2.
Eigen::MatrixXd frame_correction(const FrameMatrix& frame, const Eigen::VectorXd& zeta);

struct RankReport {
    int achieved_rank = 0;
    int depth_used = 0;
};

/// Rank of the span of iterated brackets of the horizontal fields at x, up to max_depth.
RankReport hormander_rank(const GroupSpec& spec, const Point& x, int max_depth);

/// (u(x * exp(t^j e_{i,j})) - u(x)) / t^j with 1-based layer j and index i.
double group_directional_derivative(const GroupSpec& spec, const ScalarField& u, const Point& x, int layer,
                                    int index, double t);

/// |u(x*h) - u(x) - <Xu(x), pi_1(h)>|.
double taylor_residual(const GroupSpec& spec, const ScalarField& u, const Point& x, const Point& h);

/// Basis element exp(s e_{i,j}) as a Point.
Point exp_coordinate(const GroupSpec& spec, int layer, int index, double s);

}  // namespace carnot

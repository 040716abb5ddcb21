#pragma once

#include <carnot/grid.hpp>
#include <carnot/operators.hpp>

#include <map>
#include <string>
#include <vector>

namespace carnot {

/// L u = 0 in the box, u = f on the one-node boundary band.
struct DirichletProblem {
    GroupSpec spec;
    OperatorSpec op;
    GridGeometry grid;
    ScalarField boundary;
    double eps_reg = -1.0;  ///< negative selects spacing^2 (smallest spacing)
};

DirichletProblem make_problem(GroupSpec spec, OperatorSpec op, GridGeometry grid, ScalarField boundary,
                              double eps_reg = -1.0);

/// Effective gradient regularization of the problem.
double regularization(const DirichletProblem& problem);

/// f at every node.
GridFunction boundary_values(const DirichletProblem& problem);

/// Interior nodes: L u from central-difference jets pushed through the frame; boundary nodes: u - f.
GridFunction residual(const DirichletProblem& problem, const GridFunction& u);

/// max |residual| over interior nodes.
double interior_residual_norm(const DirichletProblem& problem, const GridFunction& res);

enum class SolveMethod { Newton, Explicit };

/// Central: the residual above. Midrange: monotone wide stencil for the infinity instance,
/// (2 u(x) - max_v u(x * s v) - min_v u(x * s v)) / s^2 over unit horizontal v, multilinear
/// interpolation inside the box and f outside it.
enum class Scheme { Central, Midrange };

struct SolveOptions {
    double tolerance = 1e-8;
    int max_iter = 200;
    SolveMethod method = SolveMethod::Newton;
    /// Explicit relaxation only: CFL safety factor on the per-node step.
    double cfl = 0.8;
    /// Newton on degenerate instances (A(0) = 0): first solve A + s I for a decreasing s ladder.
    bool continuation = true;
    /// Degenerate instances solve with A + viscosity I; negative selects min spacing squared.
    double viscosity = -1.0;
    Scheme scheme = Scheme::Central;
    /// Midrange only: number of sampled horizontal directions (used when there are two generators).
    int directions = 32;
    /// Midrange only: horizontal step s; negative selects the square root of the smallest spacing.
    double stencil_radius = -1.0;
};

/// Residual of the discrete system the solver drives to zero (Midrange, or Central with the viscosity shift).
GridFunction scheme_residual(const DirichletProblem& problem, const GridFunction& u, const SolveOptions& options = {});

struct SolveReport {
    int iterations = 0;
    int linear_failures = 0;  ///< Newton steps whose Krylov solve failed
    double final_residual = 0.0;
    bool converged = false;
    double wall_time = 0.0;
    std::string method;
    std::string stop_reason;
    std::vector<double> history;  ///< interior residual norm after each iteration
    std::map<std::string, std::string> metadata;
};

struct SolveResult {
    GridFunction u;
    SolveReport report;
};

/// Boundary band is reset to f; Diverged once |u|_inf exceeds 1e3 (|f|_inf + 1) or turns non-finite.
SolveResult solve(const DirichletProblem& problem, const GridFunction& initial, const SolveOptions& options = {});
SolveResult solve(const DirichletProblem& problem, const GridFunction& initial, double tolerance, int max_iter);

struct PLimitRow {
    double p = 0.0;  ///< +inf for the reference row
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double error_vs_reference = 0.0;
};

struct PLimitStudy {
    std::vector<PLimitRow> rows;
    GridFunction reference;
    std::vector<GridFunction> solutions;  ///< one per p, in the order given
};

/// Solves normalized_p for each p (warm-started along the list) and the infinity instance, started from
/// the last p solution, then reports |u_p - u_inf|_inf. The p solves always use the central scheme;
/// options.scheme selects the scheme of the reference solve.
PLimitStudy p_limit_study(const GroupSpec& spec, const GridGeometry& grid, const ScalarField& boundary,
                          const std::vector<double>& ps, const SolveOptions& options = {}, double eps_reg = -1.0);

/// CSV with columns p,residual,iterations,error_vs_reference.
void write_p_limit_csv(const std::string& path, const PLimitStudy& study);

struct SmpWitness {
    double max_value = 0.0;
    double boundary_max = 0.0;
    double interior_max = 0.0;
    double gap = 0.0;  ///< boundary_max - interior_max
    bool interior_attains = false;
    bool constant_case = false;
    std::size_t argmax_node = 0;
};

/// Whether the max of u over the closed grid is reached at an interior node within tie_tol.
SmpWitness smp_witness(const GridFunction& u, double tie_tol);

}  // namespace carnot

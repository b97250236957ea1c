#pragma once

#include "mfe/grid.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace mfe {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A discrete solution of Q(mu) or P(lambda); both parameters are filled in.
struct Solution {
    GridField u;
    double lambda = 0.0;
    double mu = 0.0;
    double sup_norm = 0.0;
    double residual_norm = 0.0;
    bool converged = false;
};

enum class SolveStatus { converged, diverged, singular, linear_failure };
std::string to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::diverged;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> damping;  ///< accepted step length per iteration
    std::string message;
};

struct NewtonOptions {
    double tol = 1e-10;  ///< scaled by (1 + parameter)
    int max_iter = 50;
    double min_step = 1.0 / 1024.0;
    double singular_tol = 1e-14;
    /// Solutions to deflate away from (P only); empty for plain Newton.
    std::vector<GridField> deflate;
    double deflation_shift = 1.0;
};

struct NewtonResult {
    Solution solution;
    SolveReport report;
};

/// Damped Newton for -Lap_h u = mu e^u.
NewtonResult newton_Q(const Grid& grid, double mu, const GridField& init, const NewtonOptions& opt = {});
/// Damped Newton for -Lap_h u = lambda e^u / int e^u, with the nonlocal
/// Jacobian term handled by a rank-one update of the local factorization.
NewtonResult newton_P(const Grid& grid, double lambda, const GridField& init, const NewtonOptions& opt = {});

/// Max-norm residuals of the two discrete problems.
double residual_Q(const Grid& grid, double mu, const GridField& u);
double residual_P(const Grid& grid, double lambda, const GridField& u);

struct MonotoneOptions {
    double tol = 1e-11;
    int max_iter = 5000;
    /// Allowed decrease per step; the first step from a sampled sub/supersolution
    /// may move against the order by the discretization defect.
    double slack = 1e-12;
    double first_step_slack = 0.0;  ///< 0 selects 5 h^2
};

struct MonotoneResult {
    Solution solution;      ///< limit of the increasing sequence started at sub
    GridField upper;        ///< limit of the decreasing sequence started at super
    int iterations = 0;
    double first_step_defect = 0.0;  ///< largest order violation of the first step
};

/// u_{n+1} = (A + K)^{-1} (mu e^{u_n} + K u_n), K = mu exp(max super), from sub and from super.
MonotoneResult monotone_iterate(const Grid& grid, double mu, const GridField& sub, const GridField& super,
                                const MonotoneOptions& opt = {});

/// Discrete defect of a candidate sub (sign = -1) or super (sign = +1) solution:
/// the largest violation of sign * (A v - mu e^v) >= 0 over nodes farther than
/// `collar` from every node where v has a kink (v == 0 inside the domain).
double sub_super_defect(const Grid& grid, double mu, const GridField& v, int sign, int collar = 1);

// ---------------------------------------------------------------- functionals

/// Integral of e^u (boundary trace 1).
double exp_integral(const Grid& grid, const GridField& u);
double lambda_of(const Grid& grid, const GridField& u, double mu);

/// Density e^u / int e^u; `trace` is its boundary value 1 / int e^u.
struct Density {
    GridField delta;
    double trace = 0.0;
};
Density delta_of(const Grid& grid, const GridField& u);

/// (1 / (2 lambda)) int delta u.
double energy(const Grid& grid, const GridField& u, double lambda);
/// 1/2 int delta G[delta] for an arbitrary density.
double energy_of_density(const Grid& grid, const Density& d);
double entropy(const Grid& grid, const Density& d);
/// Dirichlet form u . W A u, the discrete int |grad u|^2.
double dirichlet_energy(const Grid& grid, const GridField& u);
double F_lambda(const Grid& grid, const GridField& u, double lambda);
/// -S/beta + E.
double free_energy_cvp(const Grid& grid, const Density& d, double beta);

/// Smallest eigenvalue of -Lap_h by shifted inverse iteration.
double dirichlet_eig1(const Grid& grid, double tol = 1e-8);

}  // namespace mfe

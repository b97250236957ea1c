#pragma once

#include "mfe/grid.hpp"
#include "mfe/solver.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfe {

class BranchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BranchPoint {
    double lambda = 0.0;
    double mu = 0.0;
    GridField u;
    double sup_norm = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    double F_lambda = 0.0;
    double tau1 = std::numeric_limits<double>::quiet_NaN();
    double nu0 = std::numeric_limits<double>::quiet_NaN();
    bool fold = false;  ///< the control parameter turned back between the previous point and this one
    double s = 0.0;     ///< accumulated arclength
};

/// Which problem is continued and how the next point is parametrized.
/// Natural controls switch to pseudo-arclength on their own when Newton fails
/// or the branch turns steep in the parameter.
enum class Control { natural_lambda, natural_mu, arclength_lambda, arclength_mu };

struct StepPolicy {
    double initial = 1.0;  ///< parameter increment (natural) or arclength increment
    double max = 4.0;
    double growth = 1.5;
    int fast_iterations = 3;     ///< grow the step when the corrector needs at most this many
    double min_ratio = 1e-6;     ///< truncate when the step falls below min_ratio * initial
    double steep_slope = 0.05;   ///< |dp/ds| below this switches natural control to arclength
};

struct BranchOptions {
    Control control = Control::natural_lambda;
    double target_lambda = 8.0 * 3.141592653589793;
    double max_arclength = std::numeric_limits<double>::infinity();
    double max_sup = std::numeric_limits<double>::infinity();
    int max_points = 500;
    StepPolicy step;
    bool spectrum = true;  ///< fill tau1 and nu0
    NewtonOptions newton;
};

struct Fold {
    int index = 0;  ///< first point past the turn
    double s_lo = 0.0, s_hi = 0.0;
    double param_lo = 0.0, param_hi = 0.0;
    double param_max = 0.0;  ///< extreme parameter value seen in the bracket
};

struct Branch {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    Control control = Control::natural_lambda;
    std::vector<BranchPoint> points;
    std::vector<Fold> folds;
    std::vector<double> steps;
    bool switched_to_arclength = false;
    bool truncated = false;
    std::string diagnostic;
};

/// Thin-ratio b/a for ellipse domains, NaN otherwise.
double domain_alpha(const Domain& d);

/// Continue from (u, p) = (0, 0) unless a warm start is given.
Branch continue_branch(const Grid& grid, const BranchOptions& opt, const std::optional<Solution>& warm = std::nullopt);

/// Energy, entropy and F_lambda of a solved point; spectrum optional.
BranchPoint make_point(const Grid& grid, const GridField& u, double lambda, double mu, bool spectrum);

// ---------------------------------------------------------------- expansion

struct ExpansionReport {
    double alpha = 0.0;
    double lambda = 0.0;
    double mu0_solver = 0.0;  ///< lambda / (alpha int e^u)
    double mu0_series = 0.0;
    double mu0_residual = 0.0;
    double remainder = 0.0;       ///< |u - alpha phi0 - alpha^2 phi1|_inf
    double center_ratio = 0.0;    ///< u(0,0) / alpha
    double center_target = 0.0;   ///< mu0 / (2 (1 + alpha^2))
    double int_alpha2_phi1 = 0.0;
    double int_alpha2_phi1_exact = 0.0;
    GridField phi1;
};

/// Requires a canonical ellipse grid and a solved point of P(lambda) on it.
ExpansionReport verify_expansion(const Grid& grid, double lambda, const GridField& u);
/// log2 of the remainder ratio between alpha and alpha/2.
double expansion_order(const ExpansionReport& coarse_alpha, const ExpansionReport& half_alpha);

// ---------------------------------------------------------------- entropy

struct EntropyCurve {
    double alpha = 0.0;
    std::vector<double> E, S, lambda;
};

/// Collects (E, S, lambda) along the branch, checks S = -2 lambda E + log int e^u,
/// and keeps points with alpha/(8 pi) <= E <= alpha/(8 pi) + alpha^2 lambda_bar/(50 pi^2).
EntropyCurve energy_entropy_along(const Grid& grid, const Branch& branch, double lambda_bar);

struct CurvatureResult {
    double value = 0.0;  ///< d^2 S/dE^2 at the midpoint of the E range
    double leading = 0.0;
    std::vector<double> E, S, d2S;  ///< uniform-in-E resampling and nodal second differences
};

/// Monotone cubic resampling onto `samples` uniform E nodes, central second difference at the middle.
CurvatureResult entropy_curvature(const EntropyCurve& curve, int samples = 9);

// ---------------------------------------------------------------- multiplicity

/// Bubble field log sum_j (1/k) 8 m^2/(1 + m^2 chi_d(|y - x_j|)^2)^2 - log 8 m^2/(1 + 4 d^2 m^2)^2
/// inside `inner`, zero outside; chi_d is the identity on [0,d], 2d beyond 2d, and the
/// monotone cubic d + d(s + s^2 - s^3), s = (t - d)/d, in between.
GridField mountain_pass_init(const Grid& grid, const Ellipse& inner, double d, double mu_peak,
                             const std::vector<Vec2>& peaks);
double chi_d(double t, double d);

struct SecondSolutionOptions {
    std::vector<double> mu_ladder{10.0, 30.0, 100.0, 300.0};
    double d = 0.4;
    std::vector<Vec2> peaks{Vec2::Zero()};
    std::optional<Ellipse> inner;  ///< defaults to the domain ellipse
    NewtonOptions newton;
};

struct SecondSolutionResult {
    std::optional<Solution> solution;
    double F_min = 0.0, F_second = 0.0;
    double E_min = 0.0, E_second = 0.0;
    std::vector<std::string> log;
};

/// Deflated Newton from the bubble ladder; a candidate is accepted when it is distinct from
/// u_min and has both larger F_lambda and larger sup norm.
SecondSolutionResult second_solution(const Grid& grid, double lambda, const Solution& u_min,
                                     const SecondSolutionOptions& opt = {});

struct ProbeResult {
    std::vector<Solution> solutions;  ///< distinct solutions with E <= energy cap
    std::vector<double> energies;
    int starts = 0;
    int converged_starts = 0;
    std::uint64_t seed = 42;
};

/// Multistart deflated Newton: zero, alpha phi0 on canonical ellipses, bubbles at random
/// admissible peaks, random smooth fields.
ProbeResult uniqueness_probe(const Grid& grid, double lambda, double energy_cap, int n_starts,
                             std::uint64_t seed = 42, double distinct = 1e-4);

}  // namespace mfe

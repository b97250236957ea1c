#include "mfe/solver.hpp"

#include "mfe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace mfe {

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::singular: return "singular";
    case SolveStatus::linear_failure: return "linear_failure";
    }
    return "unknown";
}

namespace {

double sup(const GridField& u) { return u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0; }

GridField residual_vector_Q(const Grid& grid, double mu, const GridField& u)
{
    return grid.laplacian() * u - mu * u.array().exp().matrix();
}

GridField residual_vector_P(const Grid& grid, double lambda, const GridField& u)
{
    const GridField e = u.array().exp().matrix();
    return grid.laplacian() * u - (lambda / exp_integral(grid, u)) * e;
}

/// Product of (1/|u - u_k|^2 + shift) over the deflated solutions and the gradient of its log.
struct Deflation {
    double factor = 1.0;
    GridField grad_log;
};

Deflation deflation_at(const Grid& grid, const NewtonOptions& opt, const GridField& u)
{
    Deflation d;
    d.grad_log = GridField::Zero(u.size());
    const GridField& w = grid.weights();
    for (const auto& k : opt.deflate) {
        const GridField diff = u - k;
        const double n2 = diff.dot(w.cwiseProduct(diff));
        const double m = 1.0 / n2 + opt.deflation_shift;
        d.factor *= m;
        d.grad_log += (-2.0 / (n2 * n2 * m)) * w.cwiseProduct(diff);
    }
    return d;
}

template <class Residual, class Step>
NewtonResult damped_newton(const Grid& grid, double param, const GridField& init, const NewtonOptions& opt,
                           Residual residual, Step step)
{
    NewtonResult out;
    GridField u = init;
    const double tol = opt.tol * (1.0 + param);
    auto merit = [&](const GridField& v, double r) {
        return opt.deflate.empty() ? r : r * deflation_at(grid, opt, v).factor;
    };

    double r = residual(u).template lpNorm<Eigen::Infinity>();
    if (!std::isfinite(r)) {
        out.report.message = "initial residual is not finite";
        out.solution.u = u;
        return out;
    }
    int it = 0;
    for (; it < opt.max_iter && r > tol; ++it) {
        GridField du;
        try {
            auto s = step(u);
            if (!s) {
                out.report.status = SolveStatus::singular;
                out.report.message = "rank-one denominator below threshold";
                break;
            }
            du = std::move(*s);
        } catch (const LinearSolveError& e) {
            out.report.status = SolveStatus::linear_failure;
            out.report.message = e.what();
            break;
        }
        if (!opt.deflate.empty()) {
            const Deflation d = deflation_at(grid, opt, u);
            const double g = d.grad_log.dot(du);
            if (std::abs(1.0 - g) > 1e-12) du /= (1.0 - g);
        }
        const double m0 = merit(u, r);
        double t = 1.0;
        bool accepted = false;
        while (t >= opt.min_step) {
            const GridField trial = u + t * du;
            const double rt = residual(trial).template lpNorm<Eigen::Infinity>();
            if (std::isfinite(rt) && merit(trial, rt) < m0) {
                u = trial;
                r = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            out.report.message = "line search failed below minimum step";
            break;
        }
        out.report.damping.push_back(t);
    }
    out.report.iterations = it;
    out.report.residual = r;
    if (r <= tol) {
        out.report.status = SolveStatus::converged;
        out.report.message.clear();
    } else if (out.report.message.empty()) {
        out.report.message = "no convergence within max_iter";
    }
    out.solution.u = std::move(u);
    out.solution.residual_norm = r;
    out.solution.converged = out.report.status == SolveStatus::converged;
    out.solution.sup_norm = sup(out.solution.u);
    return out;
}

}  // namespace

double residual_Q(const Grid& grid, double mu, const GridField& u)
{
    return residual_vector_Q(grid, mu, u).lpNorm<Eigen::Infinity>();
}

double residual_P(const Grid& grid, double lambda, const GridField& u)
{
    return residual_vector_P(grid, lambda, u).lpNorm<Eigen::Infinity>();
}

NewtonResult newton_Q(const Grid& grid, double mu, const GridField& init, const NewtonOptions& opt)
{
    if (!(mu >= 0.0)) throw SolverError("newton_Q: mu must be nonnegative");
    if (init.size() != grid.size() || !init.allFinite()) throw SolverError("newton_Q: bad initial field");
    LinearSolver solver;
    auto residual = [&](const GridField& u) { return residual_vector_Q(grid, mu, u); };
    auto step = [&](const GridField& u) -> std::optional<GridField> {
        const GridField e = u.array().exp().matrix();
        solver.compute(add_diagonal(grid.laplacian(), -mu * e));
        return solver.solve(-residual(u));
    };
    NewtonResult out = damped_newton(grid, mu, init, opt, residual, step);
    out.solution.mu = mu;
    out.solution.lambda = lambda_of(grid, out.solution.u, mu);
    return out;
}

NewtonResult newton_P(const Grid& grid, double lambda, const GridField& init, const NewtonOptions& opt)
{
    if (!(lambda >= 0.0)) throw SolverError("newton_P: lambda must be nonnegative");
    if (init.size() != grid.size() || !init.allFinite()) throw SolverError("newton_P: bad initial field");
    LinearSolver solver;
    auto residual = [&](const GridField& u) { return residual_vector_P(grid, lambda, u); };
    auto step = [&](const GridField& u) -> std::optional<GridField> {
        const Density d = delta_of(grid, u);
        solver.compute(add_diagonal(grid.laplacian(), -lambda * d.delta));
        const GridField c = lambda * d.delta;
        const GridField b = grid.weights().cwiseProduct(d.delta);
        const RankOneSolve s = solve_rank_one(solver, c, b, -residual(u));
        if (std::abs(s.denominator) < opt.singular_tol) return std::nullopt;
        return s.x;
    };
    NewtonResult out = damped_newton(grid, lambda, init, opt, residual, step);
    out.solution.lambda = lambda;
    out.solution.mu = lambda / exp_integral(grid, out.solution.u);
    return out;
}

MonotoneResult monotone_iterate(const Grid& grid, double mu, const GridField& sub, const GridField& super,
                                const MonotoneOptions& opt)
{
    const double h2 = grid.h() * grid.h();
    const double first_slack = opt.first_step_slack > 0.0 ? opt.first_step_slack : 5.0 * h2;
    if (sub.size() != grid.size() || super.size() != grid.size())
        throw SolverError("monotone_iterate: field size mismatch");
    if ((sub - super).maxCoeff() > first_slack) throw SolverError("monotone_iterate: sub exceeds super");

    const double K = mu * std::exp(super.maxCoeff());
    LinearSolver solver;
    solver.compute(add_diagonal(grid.laplacian(), GridField::Constant(grid.size(), K)));
    auto T = [&](const GridField& u) -> GridField {
        return solver.solve((mu * u.array().exp() + K * u.array()).matrix());
    };

    MonotoneResult out;
    GridField lo = sub, hi = super;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const GridField lo1 = T(lo), hi1 = T(hi);
        const double down = (lo - lo1).maxCoeff();  // lower sequence must not decrease
        const double up = (hi1 - hi).maxCoeff();    // upper sequence must not increase
        const double violation = std::max({down, up, 0.0});
        if (it == 0) out.first_step_defect = violation;
        if (violation > (it == 0 ? first_slack : opt.slack))
            throw SolverError("monotone_iterate: monotonicity violated by " + std::to_string(violation) +
                              " at step " + std::to_string(it) + "; grid too coarse for the sub/supersolution pair");
        const double change = std::max((lo1 - lo).lpNorm<Eigen::Infinity>(), (hi1 - hi).lpNorm<Eigen::Infinity>());
        lo = lo1;
        hi = hi1;
        if (change < opt.tol) break;
    }
    if (it == opt.max_iter) throw SolverError("monotone_iterate: no convergence");
    out.iterations = it + 1;
    out.solution.u = lo;
    out.solution.mu = mu;
    out.solution.lambda = lambda_of(grid, lo, mu);
    out.solution.sup_norm = sup(lo);
    out.solution.residual_norm = residual_Q(grid, mu, lo);
    out.solution.converged = true;
    out.upper = hi;
    return out;
}

double sub_super_defect(const Grid& grid, double mu, const GridField& v, int sign, int collar)
{
    const GridField r = double(sign) * residual_vector_Q(grid, mu, v);
    double worst = 0.0;
    const auto& nodes = grid.nodes();
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const bool flat = v[k] == 0.0;
        bool near_interface = false;
        for (int di = -collar; di <= collar && !near_interface; ++di)
            for (int dj = -collar; dj <= collar; ++dj) {
                const int m = grid.index(nodes[k].i + di, nodes[k].j + dj);
                if (m >= 0 && (v[m] == 0.0) != flat) {
                    near_interface = true;
                    break;
                }
            }
        if (!near_interface) worst = std::max(worst, -r[k]);
    }
    return worst;
}

// ---------------------------------------------------------------- functionals

double exp_integral(const Grid& grid, const GridField& u)
{
    return quadrature(grid, u.array().exp().matrix(), 1.0);
}

double lambda_of(const Grid& grid, const GridField& u, double mu) { return mu * exp_integral(grid, u); }

Density delta_of(const Grid& grid, const GridField& u)
{
    const double I = exp_integral(grid, u);
    return Density{u.array().exp().matrix() / I, 1.0 / I};
}

double energy(const Grid& grid, const GridField& u, double lambda)
{
    if (!(lambda > 0.0)) throw SolverError("energy: lambda must be positive");
    const Density d = delta_of(grid, u);
    return quadrature(grid, d.delta.cwiseProduct(u)) / (2.0 * lambda);
}

double energy_of_density(const Grid& grid, const Density& d)
{
    LinearSolver solver;
    solver.compute(grid.laplacian());
    const GridField g = solver.solve(d.delta);
    return 0.5 * quadrature(grid, d.delta.cwiseProduct(g));
}

double entropy(const Grid& grid, const Density& d)
{
    if (!(d.delta.minCoeff() > 0.0 && d.trace > 0.0)) throw SolverError("entropy: density must be positive");
    const GridField f = d.delta.array() * d.delta.array().log();
    return -quadrature(grid, f, d.trace * std::log(d.trace));
}

double dirichlet_energy(const Grid& grid, const GridField& u)
{
    return u.dot(grid.weights().cwiseProduct(grid.laplacian() * u));
}

double F_lambda(const Grid& grid, const GridField& u, double lambda)
{
    return 0.5 * dirichlet_energy(grid, u) - lambda * std::log(exp_integral(grid, u));
}

double free_energy_cvp(const Grid& grid, const Density& d, double beta)
{
    if (beta == 0.0) throw SolverError("free_energy_cvp: beta must be nonzero");
    return -entropy(grid, d) / beta + energy_of_density(grid, d);
}

double dirichlet_eig1(const Grid& grid, double tol)
{
    EigenProblem p;
    p.M = &grid.laplacian();
    p.B = GridField::Ones(grid.size());
    p.W = grid.weights();
    return smallest_eig(p, 0.0, tol).value;
}

}  // namespace mfe

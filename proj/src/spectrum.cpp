#include "mfe/spectrum.hpp"

#include "mfe/linalg.hpp"
#include "mfe/solver.hpp"

#include <cmath>

namespace mfe {

namespace {

EigenResult run(const EigenProblem& p, double lower_bound, double tol)
{
    try {
        const EigenIterate e = smallest_eig(p, lower_bound, tol);
        return EigenResult{e.value, e.vector, e.iterations, e.residual};
    } catch (const LinearSolveError& err) {
        throw SpectrumError(err.what());
    }
}

}  // namespace

EigenResult tau1(const Grid& grid, const GridField& u, double lambda, double tol)
{
    const Density d = delta_of(grid, u);
    const SparseMatrix m = add_diagonal(grid.laplacian(), -lambda * d.delta);
    EigenProblem p;
    p.M = &m;
    p.B = d.delta;
    p.W = grid.weights();
    p.c = lambda * d.delta;
    p.b = grid.weights().cwiseProduct(d.delta);
    return run(p, -lambda - 1.0, tol);
}

EigenResult tau0(const Grid& grid, const GridField& u, double lambda, double tol)
{
    const Density d = delta_of(grid, u);
    const SparseMatrix m = add_diagonal(grid.laplacian(), -lambda * d.delta);
    EigenProblem p;
    p.M = &m;
    p.B = d.delta;
    p.W = grid.weights();
    EigenResult r = run(p, -lambda - 1.0, tol);
    if (r.eigenfield.minCoeff() * r.eigenfield.maxCoeff() < -1e-10)
        throw SpectrumError("tau0: first eigenfield changes sign");
    return r;
}

EigenResult nu0(const Grid& grid, const GridField& u, double mu, double tol)
{
    const GridField e = u.array().exp().matrix();
    const SparseMatrix m = add_diagonal(grid.laplacian(), -mu * e);
    EigenProblem p;
    p.M = &m;
    p.B = e;
    p.W = grid.weights();
    return run(p, -mu - 1.0, tol);
}

double tau1_quotient(const Grid& grid, const GridField& u, double lambda, const GridField& phi)
{
    const Density d = delta_of(grid, u);
    const GridField wd = grid.weights().cwiseProduct(d.delta);
    const double p2 = phi.dot(wd.cwiseProduct(phi));
    const double p1 = phi.dot(wd);
    return (dirichlet_energy(grid, phi) - lambda * p2 + lambda * p1 * p1) / p2;
}

}  // namespace mfe

#include "doctest.h"

#include "mfe/closedform.hpp"
#include "mfe/linalg.hpp"
#include "mfe/solver.hpp"
#include "mfe/spectrum.hpp"

#include <cmath>
#include <numbers>

using namespace mfe;
using std::numbers::pi;

namespace {

constexpr double kJ0Sq = 5.783185962946784;

EigenProblem tau1_problem(const Grid& g, const GridField& u, double lambda, SparseMatrix& storage, bool rank_one)
{
    const Density d = delta_of(g, u);
    storage = add_diagonal(g.laplacian(), -lambda * d.delta);
    EigenProblem p;
    p.M = &storage;
    p.B = d.delta;
    p.W = g.weights();
    if (rank_one) {
        p.c = lambda * d.delta;
        p.b = g.weights().cwiseProduct(d.delta);
    }
    return p;
}

}  // namespace

TEST_CASE("tau1 at lambda = 0 on the disk")
{
    Grid g(Domain::disk(), 97, 97);
    const GridField z = GridField::Zero(g.size());
    const auto t1 = tau1(g, z, 0.0);
    const auto t0 = tau0(g, z, 0.0);
    CHECK(t1.value == doctest::Approx(pi * kJ0Sq).epsilon(0.01));
    CHECK(t0.value == doctest::Approx(t1.value).epsilon(1e-8));
    CHECK(t1.residual <= 1e-8);
}

TEST_CASE("dense oracle on a coarse grid")
{
    Grid g(Domain::ellipse(1.5, 1.0), 25, 17);
    for (double lambda : {0.0, 6.0, 15.0}) {
        auto r = newton_P(g, lambda, GridField::Zero(g.size()));
        REQUIRE(r.solution.converged);
        SparseMatrix s1, s0;
        const double d1 = smallest_eig_dense(tau1_problem(g, r.solution.u, lambda, s1, true));
        const double d0 = smallest_eig_dense(tau1_problem(g, r.solution.u, lambda, s0, false));
        CHECK(tau1(g, r.solution.u, lambda).value == doctest::Approx(d1).epsilon(1e-8));
        CHECK(tau0(g, r.solution.u, lambda).value == doctest::Approx(d0).epsilon(1e-8));
    }
}

TEST_CASE("Rayleigh quotient, ordering and the nu0 relation")
{
    const double a = 0.1;
    Grid g = anisotropic_ellipse_grid(a, 17);
    GridField u = GridField::Zero(g.size());
    for (double lambda = 2.0; lambda < 40.0; lambda += 2.0) {
        auto r = newton_P(g, lambda, u);
        REQUIRE(r.solution.converged);
        u = r.solution.u;
        const auto t1 = tau1(g, u, lambda);
        const auto t0 = tau0(g, u, lambda);
        const auto n0 = nu0(g, u, r.solution.mu);
        CHECK(tau1_quotient(g, u, lambda, t1.eigenfield) == doctest::Approx(t1.value).epsilon(1e-8));
        CHECK(t1.value >= t0.value);
        CHECK(t0.eigenfield.minCoeff() * t0.eigenfield.maxCoeff() > -1e-10);
        CHECK(n0.value * lambda == doctest::Approx(r.solution.mu * t0.value).epsilon(1e-6));
    }
}

TEST_CASE("nu0")
{
    SUBCASE("mu = 0 gives the Dirichlet eigenvalue")
    {
        Grid g = anisotropic_ellipse_grid(0.2, 33);
        CHECK(nu0(g, GridField::Zero(g.size()), 0.0).value == doctest::Approx(dirichlet_eig1(g)).epsilon(1e-8));
    }
    SUBCASE("decreases along the disk minimal branch and vanishes near the fold")
    {
        Grid g(Domain::disk(), 65, 65);
        GridField u = GridField::Zero(g.size());
        double prev = 1e300;
        for (double mu : {0.25, 0.75, 1.25, 1.75, 1.99, 1.999}) {
            auto r = newton_Q(g, mu, u);
            REQUIRE(r.solution.converged);
            u = r.solution.u;
            const double v = nu0(g, u, mu).value;
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
        CHECK(prev < 0.1);
    }
}

TEST_CASE("positivity on omega_0.05 at 8 pi")
{
    const double a = 0.05;
    Grid g = anisotropic_ellipse_grid(a, 33);
    auto r = newton_P(g, 8.0 * pi, a * g.sample(phi0(8.0 * pi, a)));
    REQUIRE(r.solution.converged);
    CHECK(tau1(g, r.solution.u, 8.0 * pi).value > 0.0);
    CHECK(nu0(g, r.solution.u, r.solution.mu).value > 0.0);
}

#include "doctest.h"

#include "mfe/closedform.hpp"
#include "mfe/solver.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

using namespace mfe;
using std::numbers::pi;

namespace {

double sup_error(const Grid& g, const GridField& u, const FieldFn& exact)
{
    return (u - g.sample(exact)).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("newton_Q")
{
    SUBCASE("mu = 0 gives zero")
    {
        Grid g(Domain::canonical_ellipse(0.3), 40, 16);
        auto r = newton_Q(g, 0.0, GridField::Zero(g.size()));
        CHECK(r.solution.converged);
        CHECK(r.solution.sup_norm == 0.0);
        CHECK(r.report.iterations == 0);
    }
    SUBCASE("disk minimal branch against the Liouville family")
    {
        const double mu = 1.5;
        const auto exact = liouville_disk(disk_gamma_of_mu(mu));
        double prev = 0.0;
        for (int n : {33, 65, 129}) {
            Grid g(Domain::disk(), n, n);
            auto r = newton_Q(g, mu, GridField::Zero(g.size()));
            REQUIRE(r.solution.converged);
            CHECK(r.solution.residual_norm <= 1e-10 * (1.0 + mu));
            CHECK(r.solution.u.minCoeff() >= -1e-10);
            const double err = sup_error(g, r.solution.u, exact.u);
            CHECK(err <= 5.0 * g.h() * g.h());
            CHECK(r.solution.lambda == doctest::Approx(exact.lambda).epsilon(5.0 * g.h() * g.h()));
            if (prev > 0.0) CHECK(std::log2(prev / err) >= 1.8);
            prev = err;
        }
    }
    SUBCASE("the discrete disk fold lies just below mu = 2")
    {
        Grid g(Domain::disk(), 65, 65);
        CHECK_FALSE(newton_Q(g, 2.0, GridField::Zero(g.size())).solution.converged);
        auto r = newton_Q(g, 2.0 - 1e-3, GridField::Zero(g.size()));
        CHECK(r.solution.converged);
        CHECK(interpolate(g, r.solution.u, Vec2::Zero()) == doctest::Approx(2.0 * std::log(2.0)).epsilon(0.05));
    }
    SUBCASE("beyond the fold Newton reports divergence")
    {
        Grid g(Domain::disk(), 33, 33);
        auto r = newton_Q(g, 2.5, GridField::Zero(g.size()));
        CHECK_FALSE(r.solution.converged);
        CHECK(r.report.status != SolveStatus::converged);
        CHECK(r.report.iterations <= 50);
        CHECK_FALSE(r.report.message.empty());
    }
    SUBCASE("bad input")
    {
        Grid g(Domain::disk(), 17, 17);
        CHECK_THROWS_AS(newton_Q(g, -1.0, GridField::Zero(g.size())), SolverError);
        CHECK_THROWS_AS(newton_Q(g, 1.0, GridField::Zero(3)), SolverError);
    }
}

TEST_CASE("newton_P")
{
    SUBCASE("lambda = 0 gives zero")
    {
        Grid g(Domain::disk(), 33, 33);
        auto r = newton_P(g, 0.0, GridField::Zero(g.size()));
        CHECK(r.solution.converged);
        CHECK(r.solution.sup_norm == 0.0);
    }
    SUBCASE("disk at 4 pi from the oracle")
    {
        Grid g(Domain::disk(), 129, 129);
        const auto d = liouville_disk(1.0);
        auto r = newton_P(g, 4.0 * pi, g.sample(d.u));
        REQUIRE(r.solution.converged);
        CHECK(r.solution.residual_norm <= 1e-10 * (1.0 + 4.0 * pi));
        CHECK(lambda_of(g, r.solution.u, d.mu) == doctest::Approx(4.0 * pi).epsilon(0.005));
        CHECK(r.solution.mu == doctest::Approx(2.0).epsilon(0.005));
        CHECK(r.solution.u.minCoeff() >= -1e-10);
    }
    SUBCASE("thin ellipse at 8 pi from alpha phi0")
    {
        const double a = 0.05;
        Grid g = anisotropic_ellipse_grid(a, 33);
        auto r = newton_P(g, 8.0 * pi, a * g.sample(phi0(8.0 * pi, a)));
        REQUIRE(r.solution.converged);
        // u ~ alpha lambda/(2 pi) (1 - rho) at leading order
        CHECK(r.solution.sup_norm == doctest::Approx(a * 8.0 * pi / (2.0 * pi)).epsilon(0.2));
        CHECK(r.solution.lambda == doctest::Approx(r.solution.mu * exp_integral(g, r.solution.u)).epsilon(1e-12));
    }
    SUBCASE("dilation and translation invariance")
    {
        const double lambda = 10.0;
        Grid g(Domain::ellipse(2.0, 1.0), 65, 33);
        Grid g2(Domain::ellipse(6.0, 3.0, Vec2(1.0, -2.0)), 65, 33);
        auto r = newton_P(g, lambda, GridField::Zero(g.size()));
        auto r2 = newton_P(g2, lambda, GridField::Zero(g2.size()));
        REQUIRE(r.solution.converged);
        REQUIRE(r2.solution.converged);
        CHECK((r.solution.u - r2.solution.u).lpNorm<Eigen::Infinity>() < 1e-9);
        CHECK(energy(g, r.solution.u, lambda) == doctest::Approx(energy(g2, r2.solution.u, lambda)).epsilon(1e-9));
    }
    SUBCASE("rotation invariance on a square")
    {
        const double lambda = 12.0;
        const double t = pi / 6.0;
        const Mat2 R = Eigen::Rotation2Dd(t).toRotationMatrix();
        std::vector<Vec2> v{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, vr;
        for (const auto& p : v) vr.push_back(R * p);
        Grid g(Domain::polygon(ConvexPolygon(v)), 97, 97);
        Grid gr(Domain::polygon(ConvexPolygon(vr)), 129, 129);
        auto r = newton_P(g, lambda, GridField::Zero(g.size()));
        auto rr = newton_P(gr, lambda, GridField::Zero(gr.size()));
        REQUIRE(r.solution.converged);
        REQUIRE(rr.solution.converged);
        const double h = std::max(g.h(), gr.h());
        double worst = 0.0;
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            const Vec2 p = g.node_point(k);
            if (!ConvexPolygon(v).contains(p, -2.0 * h)) continue;
            worst = std::max(worst, std::abs(r.solution.u[k] - interpolate(gr, rr.solution.u, R * p)));
        }
        CHECK(worst < 5.0 * h * h);
    }
}

TEST_CASE("monotone_iterate")
{
    SUBCASE("trivial")
    {
        Grid g(Domain::disk(), 17, 17);
        const GridField z = GridField::Zero(g.size());
        auto m = monotone_iterate(g, 0.0, z, z);
        CHECK(m.solution.sup_norm == 0.0);
    }
    SUBCASE("sandwich on omega_0.05 at mu_bar")
    {
        const double a = 0.05, mu = mu_bar(a);
        Grid g = anisotropic_ellipse_grid(a, 33);
        const GridField sub = g.sample(v_minus(mu, a, 1.0));
        const GridField super = g.sample(v_plus(mu, a));
        CHECK(sub_super_defect(g, mu, sub, -1) <= g.h() * g.h());
        CHECK(sub_super_defect(g, mu, super, +1) <= g.h() * g.h());

        auto m = monotone_iterate(g, mu, sub, super);
        const double slack = 5.0 * g.h() * g.h();
        CHECK((sub - m.solution.u).maxCoeff() <= slack);
        CHECK((m.solution.u - super).maxCoeff() <= slack);
        const auto b = lambda_bounds(mu, a, 1.0);
        CHECK(m.solution.lambda >= b.lower);
        CHECK(m.solution.lambda <= b.upper);
        CHECK((m.upper - m.solution.u).lpNorm<Eigen::Infinity>() < 1e-8);

        auto n = newton_Q(g, mu, sub);
        REQUIRE(n.solution.converged);
        CHECK((n.solution.u - m.solution.u).lpNorm<Eigen::Infinity>() < 1e-8);
    }
    SUBCASE("sub above super is rejected")
    {
        Grid g(Domain::disk(), 17, 17);
        CHECK_THROWS_AS(monotone_iterate(g, 1.0, GridField::Ones(g.size()), GridField::Zero(g.size())),
                        SolverError);
    }
}

TEST_CASE("functionals")
{
    SUBCASE("zero field")
    {
        const double a = 0.2, lambda = 3.0;
        Grid g = anisotropic_ellipse_grid(a, 33);
        const GridField z = GridField::Zero(g.size());
        const double A = pi / a;
        CHECK(lambda_of(g, z, 1.5) == doctest::Approx(1.5 * A).epsilon(1e-12));
        const Density d = delta_of(g, z);
        CHECK(d.delta.maxCoeff() == doctest::Approx(1.0 / A).epsilon(1e-12));
        CHECK(d.trace == doctest::Approx(1.0 / A).epsilon(1e-12));
        CHECK(entropy(g, d) == doctest::Approx(std::log(A)).epsilon(1e-12));
        CHECK(F_lambda(g, z, lambda) == doctest::Approx(-lambda * std::log(A)).epsilon(1e-12));
    }
    SUBCASE("density normalization and shape on the disk")
    {
        Grid g(Domain::disk(), 65, 65);
        auto r = newton_Q(g, 1.0, GridField::Zero(g.size()));
        const Density d = delta_of(g, r.solution.u);
        CHECK(quadrature(g, d.delta, d.trace) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.delta.minCoeff() > 0.0);
        double prev = 1e300;
        for (double x = 0.0; x < 0.95; x += 0.1) {
            const double v = interpolate(g, d.delta, Vec2(x, 0.0));
            CHECK(v < prev);
            prev = v;
        }
    }
    SUBCASE("disk energy against a radial integral")
    {
        const auto o = liouville_disk(1.0);
        const double g2 = 1.0;
        auto ur = [&](double r) { return 2.0 * std::log((1.0 + g2) / (1.0 + g2 * r * r)); };
        const double radial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double r) { return std::exp(ur(r)) * ur(r) * r; }, 0.0, 1.0, 15, 1e-14);
        const double E_exact = o.mu / (2.0 * o.lambda * o.lambda) * 2.0 * pi * radial;
        Grid g(Domain::disk(), 129, 129);
        auto r = newton_P(g, o.lambda, g.sample(o.u));
        REQUIRE(r.solution.converged);
        CHECK(energy(g, r.solution.u, o.lambda) == doctest::Approx(E_exact).epsilon(5.0 * g.h() * g.h()));
    }
    SUBCASE("small-lambda energy on omega_alpha")
    {
        const double a = 0.2;
        Grid g = anisotropic_ellipse_grid(a, 65);
        auto r = newton_P(g, 1e-4, GridField::Zero(g.size()));
        const double E = energy(g, r.solution.u, 1e-4);
        CHECK(E == doctest::Approx(E_uniform_exact(a)).epsilon(1e-3));
        CHECK(E == doctest::Approx(E_uniform(a)).epsilon(a * a * 1.1));
    }
    SUBCASE("entropy identity and duality at solutions")
    {
        Grid g = anisotropic_ellipse_grid(0.1, 33);
        for (double lambda : {2.0, 10.0, 25.0}) {
            auto r = newton_P(g, lambda, GridField::Zero(g.size()));
            REQUIRE(r.solution.converged);
            const GridField& u = r.solution.u;
            const Density d = delta_of(g, u);
            const double E = energy(g, u, lambda);
            CHECK(E > 0.0);
            CHECK(entropy(g, d) == doctest::Approx(-2.0 * lambda * E + std::log(exp_integral(g, u))).epsilon(1e-10));
            CHECK(energy_of_density(g, d) == doctest::Approx(E).epsilon(1e-9));
            CHECK(free_energy_cvp(g, d, -lambda) ==
                  doctest::Approx(-F_lambda(g, u, lambda) / (lambda * lambda)).epsilon(1e-6));
        }
        CHECK_THROWS_AS(free_energy_cvp(g, delta_of(g, GridField::Zero(g.size())), 0.0), SolverError);
    }
    SUBCASE("lambda_of grows with mu on the minimal branch")
    {
        Grid g = anisotropic_ellipse_grid(0.2, 17);
        double prev = 0.0;
        GridField u = GridField::Zero(g.size());
        for (int k = 1; k <= 8; ++k) {
            const double mu = mu_bar(0.2) * k / 8.0;
            auto r = newton_Q(g, mu, u);
            REQUIRE(r.solution.converged);
            CHECK(r.solution.lambda > prev);
            prev = r.solution.lambda;
            u = r.solution.u;
        }
    }
}

TEST_CASE("dirichlet_eig1")
{
    SUBCASE("rectangle T_0.25")
    {
        const double a = 0.25;
        Grid g(Domain::rectangle(-1.0 / a, 1.0 / a, -1.0, 1.0), 256, 64);
        CHECK(dirichlet_eig1(g) == doctest::Approx(pi * pi * (1.0 + a * a) / 4.0).epsilon(0.01));
    }
    SUBCASE("unit square")
    {
        Grid g(Domain::rectangle(0.0, 1.0, 0.0, 1.0), 64, 64);
        CHECK(dirichlet_eig1(g) == doctest::Approx(2.0 * pi * pi).epsilon(0.01));
    }
    SUBCASE("unit disk")
    {
        Grid g(Domain::disk(), 65, 65);
        CHECK(dirichlet_eig1(g) == doctest::Approx(5.783185962946784).epsilon(0.005));
    }
    SUBCASE("Poincare bound on thin ellipses")
    {
        for (double a : {0.05, 0.1, 0.2}) {
            Grid g = anisotropic_ellipse_grid(a, 33);
            CHECK(dirichlet_eig1(g) >= 2.0 * (1.0 + a));
        }
    }
}

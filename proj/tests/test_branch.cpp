#include "doctest.h"

#include "mfe/branch.hpp"
#include "mfe/closedform.hpp"

#include <cmath>
#include <numbers>

using namespace mfe;
using std::numbers::pi;

TEST_CASE("disk branch in mu follows the Liouville family through the fold")
{
    Grid g(Domain::disk(), 65, 65);
    BranchOptions opt;
    opt.control = Control::natural_mu;
    opt.step.initial = 0.25;
    opt.step.max = 0.5;
    opt.max_sup = 6.0;
    opt.target_lambda = 8.0 * pi;
    const Branch br = continue_branch(g, opt);
    REQUIRE(br.points.size() > 10);
    CHECK(br.switched_to_arclength);
    REQUIRE(br.folds.size() == 1);
    const Fold& f = br.folds.front();
    CHECK(f.param_max == doctest::Approx(2.0).epsilon(0.02));
    CHECK(br.points[f.index - 2].nu0 * br.points[f.index].nu0 < 0.0);

    for (const auto& p : br.points) {
        CHECK(p.lambda < 8.0 * pi);
        if (p.mu == 0.0) continue;
        const double u0 = interpolate(g, p.u, Vec2::Zero());
        const double g2 = std::exp(u0 / 2.0) - 1.0;
        CHECK(p.lambda == doctest::Approx(8.0 * pi * g2 / (1.0 + g2)).epsilon(0.01));
    }
}

TEST_CASE("omega_0.05 branch in lambda up to lambda_lower")
{
    const double a = 0.05;
    Grid g(Domain::canonical_ellipse(a), 129, 33);
    BranchOptions opt;
    opt.control = Control::natural_lambda;
    opt.step.initial = 4.0;
    opt.step.max = 6.0;
    opt.target_lambda = lambda_lower(a, 1.0);
    const Branch br = continue_branch(g, opt);
    CHECK_FALSE(br.truncated);
    REQUIRE(br.points.size() > 3);
    CHECK(br.points.back().lambda == doctest::Approx(opt.target_lambda));
    CHECK(br.folds.empty());
    CHECK(br.alpha == doctest::Approx(a));
    double prev_mu = -1.0;
    for (const auto& p : br.points) {
        CHECK(p.tau1 > 0.0);
        CHECK(p.nu0 > 0.0);
        CHECK(p.mu > prev_mu);
        prev_mu = p.mu;
    }
}

TEST_CASE("omega_0.5 branch in mu stays below 10 pi")
{
    Grid g(Domain::canonical_ellipse(0.5), 65, 33);
    BranchOptions opt;
    opt.control = Control::arclength_mu;
    opt.step.initial = 0.3;
    opt.step.max = 1.0;
    opt.max_sup = 8.0;
    opt.target_lambda = 1e9;
    opt.spectrum = false;
    const Branch br = continue_branch(g, opt);
    CHECK_FALSE(br.truncated);
    double lmax = 0.0;
    for (const auto& p : br.points) lmax = std::max(lmax, p.lambda);
    CHECK(lmax > 6.0 * pi);
    CHECK(lmax < 10.0 * pi);
}

TEST_CASE("entropy identity and the free energy duality along a branch")
{
    const double a = 0.1;
    Grid g(Domain::canonical_ellipse(a), 161, 33);
    BranchOptions opt;
    opt.step.initial = 2.0;
    opt.step.max = 2.0;
    opt.spectrum = false;
    const Branch br = continue_branch(g, opt);
    const EntropyCurve c = energy_entropy_along(g, br, 8.0 * pi);
    CHECK(c.E.size() >= 7);
    CHECK(c.E.size() < br.points.size());  // lambda = 0 sits below alpha/(8 pi)
    for (const auto& p : br.points) {
        if (p.lambda == 0.0) {
            CHECK(p.entropy == doctest::Approx(std::log(g.domain().area())).epsilon(1e-10));
            continue;
        }
        const Density d = delta_of(g, p.u);
        CHECK(free_energy_cvp(g, d, -p.lambda) == doctest::Approx(-p.F_lambda / (p.lambda * p.lambda)).epsilon(1e-6));
    }
    const CurvatureResult k = entropy_curvature(c);
    CHECK(k.value < 0.0);
    CHECK(k.leading == doctest::Approx(entropy_curvature_leading(a)));
}

TEST_CASE("entropy curvature needs seven points")
{
    EntropyCurve c;
    c.alpha = 0.1;
    c.E = {1, 2, 3};
    c.S = {1, 2, 3};
    CHECK_THROWS_AS(entropy_curvature(c), BranchError);
}

TEST_CASE("expansion about the thin limit")
{
    auto report = [](double a) {
        Grid g(Domain::canonical_ellipse(a), 4 * 32 + 1, 33);
        auto r = newton_P(g, 8.0, a * g.sample(phi0(8.0, a)));
        REQUIRE(r.solution.converged);
        return verify_expansion(g, 8.0, r.solution.u);
    };
    const ExpansionReport r1 = report(0.1), r2 = report(0.05);
    CHECK(r1.mu0_residual < 0.05 * r1.mu0_series);
    CHECK(r2.mu0_residual < r1.mu0_residual);
    CHECK(r2.center_ratio == doctest::Approx(r2.center_target).epsilon(0.05));
    CHECK(r2.int_alpha2_phi1 == doctest::Approx(r2.int_alpha2_phi1_exact).epsilon(0.01));
    CHECK(expansion_order(r1, r2) > 2.0);
    CHECK_THROWS_AS(verify_expansion(Grid(Domain::ellipse(2.0, 0.5), 9, 9), 1.0, GridField::Zero(21)), BranchError);
}

TEST_CASE("mountain pass initial field")
{
    CHECK(chi_d(0.1, 0.2) == doctest::Approx(0.1));
    CHECK(chi_d(0.5, 0.2) == doctest::Approx(0.4));
    CHECK(chi_d(0.4, 0.2) == doctest::Approx(0.4));
    CHECK(chi_d(0.3, 0.2) < chi_d(0.31, 0.2));

    Grid g(Domain::canonical_ellipse(0.2), 81, 33);
    const Ellipse inner = *g.domain().as_ellipse();
    const GridField f = mountain_pass_init(g, inner, 0.3, 10.0, {Vec2::Zero()});
    const double k1 = 2.0 * std::log((1.0 + 4.0 * 0.09 * 100.0) / 1.0);
    CHECK(f.maxCoeff() == doctest::Approx(k1).epsilon(1e-12));
    CHECK(f.minCoeff() >= 0.0);
    CHECK_THROWS_AS(mountain_pass_init(g, inner, 0.3, 10.0, {Vec2(0.0, 0.6)}), BranchError);
    CHECK_THROWS_AS(mountain_pass_init(g, inner, 0.3, 10.0, {Vec2(-1.0, 0.0), Vec2(0.0, 0.0)}), BranchError);
    const GridField two = mountain_pass_init(g, inner, 0.3, 10.0, {Vec2(-1.5, 0.0), Vec2(1.5, 0.0)});
    const double floor_term = 800.0 / std::pow(1.0 + 36.0, 2);
    CHECK(two.maxCoeff() == doctest::Approx(std::log((800.0 + floor_term) / (2.0 * floor_term))).epsilon(1e-9));
}

TEST_CASE("second solution above 8 pi on omega_0.05")
{
    const double a = 0.05, lambda = 9.0 * pi;
    Grid g(Domain::canonical_ellipse(a), 129, 33);
    auto m = newton_P(g, lambda, a * g.sample(phi0(lambda, a)));
    REQUIRE(m.solution.converged);
    const SecondSolutionResult s = second_solution(g, lambda, m.solution);
    REQUIRE(s.solution);
    CHECK(s.F_second > s.F_min);
    CHECK(s.solution->sup_norm > m.solution.sup_norm);
    CHECK((s.solution->u - m.solution.u).lpNorm<Eigen::Infinity>() > 1e-4);
}

TEST_CASE("uniqueness probes")
{
    SUBCASE("disk at 4 pi")
    {
        Grid g(Domain::disk(), 33, 33);
        const ProbeResult p = uniqueness_probe(g, 4.0 * pi, 1e300, 8);
        CHECK(p.solutions.size() == 1);
        CHECK(p.starts == 8);
    }
    SUBCASE("omega_0.05 at 4 pi")
    {
        const double a = 0.05;
        Grid g(Domain::canonical_ellipse(a), 129, 33);
        const ProbeResult p = uniqueness_probe(g, 4.0 * pi, E_hat_max(a), 8);
        CHECK(p.solutions.size() == 1);
        CHECK(p.seed == 42);
    }
}

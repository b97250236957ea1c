#include "doctest.h"

#include "mfe/grid.hpp"

#include <cmath>
#include <numbers>

using namespace mfe;
using std::numbers::pi;

namespace {

bool is_m_matrix(const SparseMatrix& A)
{
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col() && it.value() <= 0.0) return false;
            if (it.row() != it.col() && it.value() > 0.0) return false;
        }
    // weak row diagonal dominance
    const Eigen::VectorXd rowsum = A * Eigen::VectorXd::Ones(A.cols());
    return rowsum.minCoeff() >= -1e-9 * A.diagonal().maxCoeff();
}

double psi0(double alpha, const Vec2& p)
{
    return (1.0 - (alpha * alpha * p.x() * p.x() + p.y() * p.y())) / (2.0 * (1.0 + alpha * alpha));
}

}  // namespace

TEST_CASE("build_grid examples")
{
    SUBCASE("unit disk node count")
    {
        const Grid g(Domain::disk(), 64, 64);
        const double expected = pi / (g.hx() * g.hy());
        CHECK(std::abs(g.size() - expected) / expected < 0.02);
    }
    SUBCASE("omega_0.05 spacings")
    {
        const Grid g(Domain::canonical_ellipse(0.05), 400, 64);
        CHECK(g.hx() == doctest::Approx((2.0 / 0.05) / 399.0).epsilon(1e-14));
        CHECK(g.hy() == doctest::Approx(2.0 / 63.0).epsilon(1e-14));
    }
    SUBCASE("too coarse or degenerate")
    {
        CHECK_THROWS_AS(Grid(Domain::disk(), 4, 64), GeometryError);
        CHECK_THROWS_AS(Domain::ellipse(1.0, 0.0), GeometryError);
    }
    SUBCASE("anisotropic helper equalizes spacings")
    {
        const Grid g = anisotropic_ellipse_grid(0.1, 33);
        CHECK(g.nx() == 321);
        CHECK(g.hx() == doctest::Approx(g.hy()));
        const Grid capped = anisotropic_ellipse_grid(0.01, 257, 1025);
        CHECK(capped.nx() == 1025);
    }
}

TEST_CASE("node classification and arms")
{
    for (const Domain& d : {Domain::disk(), Domain::canonical_ellipse(0.3),
                            Domain::polygon(ConvexPolygon({Vec2(0, 0), Vec2(3, 0.5), Vec2(1, 2)}))}) {
        const Grid g(d, 41, 37);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const Vec2 p = g.point(i, j);
                if (g.index(i, j) >= 0) CHECK(d.contains(p));
                else if (d.contains(p, -1e-9)) CHECK(false);
            }
        for (const auto& n : g.nodes()) {
            CHECK(n.arms.left > 0.0);
            CHECK(n.arms.left <= g.hx());
            CHECK(n.arms.right > 0.0);
            CHECK(n.arms.right <= g.hx());
            CHECK(n.arms.down > 0.0);
            CHECK(n.arms.down <= g.hy());
            CHECK(n.arms.up > 0.0);
            CHECK(n.arms.up <= g.hy());
        }
        CHECK(is_m_matrix(g.laplacian()));
    }
}

TEST_CASE("Shortley-Weller Laplacian is exact on quadratics")
{
    // -Lap(1 - x^2 - y^2) = 4 and the field vanishes on the unit circle
    const Grid g(Domain::disk(), 33, 33);
    const GridField u = g.sample([](const Vec2& p) { return 1.0 - p.squaredNorm(); });
    const Eigen::VectorXd r = g.laplacian() * u - Eigen::VectorXd::Constant(g.size(), 4.0);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("quadrature exact for linear functions on polygons")
{
    const ConvexPolygon poly({Vec2(0.1, -0.3), Vec2(2.2, 0.0), Vec2(1.7, 1.4), Vec2(-0.4, 0.9)});
    const Grid g(Domain::polygon(poly), 23, 19);
    const auto f = [](const Vec2& p) { return 1.5 - 0.7 * p.x() + 2.0 * p.y(); };
    const Vec2 c = poly.centroid();
    CHECK(std::abs(quadrature(g, f) - poly.area() * f(c)) < 1e-12);
    CHECK(std::abs(g.total_weight() - poly.area()) < 1e-12);
}

TEST_CASE("quadrature examples converge at second order")
{
    const double alpha_area = 0.5;
    const double alpha = 0.1;
    const double ipsi = pi / (4.0 * alpha * (1.0 + alpha * alpha));
    const double ipsi2 = pi / (12.0 * alpha * (1.0 + alpha * alpha) * (1.0 + alpha * alpha));
    // polar substitution x = r cos(t)/alpha, y = r sin(t)
    CHECK(ipsi == doctest::Approx(2.0 * pi / alpha * 0.25 / (2.0 * (1.0 + alpha * alpha))));
    CHECK(ipsi == doctest::Approx(7.7762194).epsilon(1e-7));
    CHECK(ipsi2 == doctest::Approx(2.5664091).epsilon(1e-7));

    double prev[3] = {0, 0, 0};
    for (int ny : {17, 33, 65}) {
        const Grid ga(Domain::canonical_ellipse(alpha_area), 2 * (ny - 1) + 1, ny);
        const Grid gp = anisotropic_ellipse_grid(alpha, ny);
        const GridField one = GridField::Ones(ga.size());
        const GridField p = gp.sample([&](const Vec2& q) { return psi0(alpha, q); });
        const double err[3] = {
            std::abs(quadrature(ga, one, 1.0) - 2.0 * pi),
            std::abs(quadrature(gp, p) - ipsi),
            std::abs(quadrature(gp, GridField(p.array().square())) - ipsi2),
        };
        for (int k = 0; k < 3; ++k) {
            if (prev[k] > 0.0 && err[k] > 1e-13) CHECK(std::log2(prev[k] / err[k]) >= 1.8);
            prev[k] = err[k];
        }
        CHECK(err[1] / ipsi < 5.0 * gp.h() * gp.h());
    }
}

#include "mfe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace mfe {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Mat2 rotation_matrix(double angle)
{
    Mat2 r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

}  // namespace

// ---------------------------------------------------------------- EllipseSpec

EllipseSpec EllipseSpec::make(double alpha, double beta_minus, double beta_plus)
{
    EllipseSpec s{alpha, beta_minus, beta_plus, 0.0};
    if (!(beta_plus > 0.0)) throw GeometryError("EllipseSpec: beta_plus must be positive");
    s.c = (beta_minus * beta_minus) / (beta_plus * beta_plus);
    s.validate();
    return s;
}

EllipseSpec EllipseSpec::canonical(double alpha) { return make(alpha, 1.0, 1.0); }

void EllipseSpec::validate() const
{
    if (!(alpha > 0.0 && alpha <= 1.0)) throw GeometryError("EllipseSpec: alpha must lie in (0,1]");
    if (!(beta_minus > 0.0 && beta_minus <= beta_plus))
        throw GeometryError("EllipseSpec: need 0 < beta_minus <= beta_plus");
    const double ratio = beta_minus * beta_minus / (beta_plus * beta_plus);
    if (std::abs(ratio - c) > 1e-12) throw GeometryError("EllipseSpec: c != beta_minus^2/beta_plus^2");
}

// -------------------------------------------------------------------- Ellipse

Mat2 Ellipse::rotation() const { return rotation_matrix(angle); }

Mat2 Ellipse::quadratic_form() const
{
    const Mat2 r = rotation();
    const Eigen::Vector2d inv_sq(1.0 / (a * a), 1.0 / (b * b));
    return r * inv_sq.asDiagonal() * r.transpose();
}

bool Ellipse::contains(const Vec2& p, double tol) const
{
    const Vec2 d = p - center;
    return d.dot(quadratic_form() * d) <= 1.0 + tol;
}

Vec2 Ellipse::point_at(double t) const
{
    return center + rotation() * Vec2(a * std::cos(t), b * std::sin(t));
}

double Ellipse::area() const { return std::numbers::pi * a * b; }

Ellipse Ellipse::scaled(double factor) const { return Ellipse{center, angle, a * factor, b * factor}; }

// -------------------------------------------------------------- ConvexPolygon

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices))
{
    const std::size_t n = vertices_.size();
    if (n < 3) throw GeometryError("ConvexPolygon: need at least 3 vertices");
    double twice_area = 0.0;
    for (std::size_t i = 0; i < n; ++i) twice_area += cross(vertices_[i], vertices_[(i + 1) % n]);
    if (std::abs(twice_area) < 1e-14) throw GeometryError("ConvexPolygon: zero area");
    if (twice_area < 0.0) std::reverse(vertices_.begin(), vertices_.end());

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p0 = vertices_[(i + n - 1) % n];
        const Vec2& p1 = vertices_[i];
        const Vec2& p2 = vertices_[(i + 1) % n];
        const Vec2 e0 = p1 - p0;
        const Vec2 e1 = p2 - p1;
        if (e0.norm() == 0.0 || e1.norm() == 0.0) throw GeometryError("ConvexPolygon: repeated vertex");
        if (cross(e0, e1) <= 1e-12 * e0.norm() * e1.norm())
            throw GeometryError("ConvexPolygon: vertices are not strictly convex");
    }
    // Winding test: the turning angles have to add up to one full turn.
    double turn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e0 = vertices_[i] - vertices_[(i + n - 1) % n];
        const Vec2 e1 = vertices_[(i + 1) % n] - vertices_[i];
        turn += std::atan2(cross(e0, e1), e0.dot(e1));
    }
    if (std::abs(turn - 2.0 * std::numbers::pi) > 1e-6)
        throw GeometryError("ConvexPolygon: vertex list is self-intersecting");
}

ConvexPolygon ConvexPolygon::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw GeometryError("cannot open polygon file " + path.string());
    std::vector<Vec2> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        double x = 0.0;
        double y = 0.0;
        if (!(ss >> x >> y))
            throw GeometryError(path.string() + ":" + std::to_string(lineno) + ": expected \"x y\"");
        pts.emplace_back(x, y);
    }
    return ConvexPolygon(std::move(pts));
}

ConvexPolygon ConvexPolygon::regular(int n, double circumradius, const Vec2& center, double phase)
{
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = phase + 2.0 * std::numbers::pi * k / n;
        v.push_back(center + circumradius * Vec2(std::cos(t), std::sin(t)));
    }
    return ConvexPolygon(std::move(v));
}

ConvexPolygon ConvexPolygon::rectangle(double x0, double x1, double y0, double y1)
{
    return ConvexPolygon({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

ConvexPolygon ConvexPolygon::hull_of(std::vector<Vec2> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw GeometryError("hull_of: fewer than 3 distinct points");
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    // strict turn test drops collinear points
    auto turn = [&](const Vec2& o, const Vec2& a, const Vec2& b) { return cross(a - o, b - o); };
    for (const auto& p : pts) {
        while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (k >= lower && turn(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return ConvexPolygon(std::move(hull));
}

double ConvexPolygon::area() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += cross(vertices_[i], vertices_[(i + 1) % size()]);
    return 0.5 * s;
}

double ConvexPolygon::perimeter() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += (vertices_[(i + 1) % size()] - vertices_[i]).norm();
    return s;
}

Vec2 ConvexPolygon::centroid() const
{
    Vec2 c = Vec2::Zero();
    double a2 = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const Vec2& p = vertices_[i];
        const Vec2& q = vertices_[(i + 1) % size()];
        const double w = cross(p, q);
        a2 += w;
        c += w * (p + q);
    }
    return c / (3.0 * a2);
}

double ConvexPolygon::edge_distance(std::size_t k, const Vec2& p) const
{
    const Vec2& a = vertices_[k];
    const Vec2 e = vertices_[(k + 1) % size()] - a;
    return cross(e, p - a) / e.norm();
}

double ConvexPolygon::min_edge_distance(const Vec2& p) const
{
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < size(); ++k) m = std::min(m, edge_distance(k, p));
    return m;
}

bool ConvexPolygon::contains(const Vec2& p, double tol) const { return min_edge_distance(p) >= -tol; }

// ------------------------------------------------------------- CanonicalFrame

Vec2 CanonicalFrame::to_canonical(const Vec2& p) const { return dilation * (rotation.transpose() * (p - center)); }

Vec2 CanonicalFrame::from_canonical(const Vec2& q) const { return center + rotation * q / dilation; }

void CanonicalFrame::validate() const
{
    if (!(dilation > 0.0)) throw GeometryError("CanonicalFrame: dilation must be positive");
    if ((rotation.transpose() * rotation - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-12)
        throw GeometryError("CanonicalFrame: rotation is not orthogonal");
}

Canonicalized canonicalize(const Ellipse& e)
{
    if (!(e.a > 0.0 && e.b > 0.0)) throw GeometryError("canonicalize: degenerate ellipse");
    double angle = e.angle;
    double a = e.a;
    double b = e.b;
    if (a < b) {
        std::swap(a, b);
        angle += 0.5 * std::numbers::pi;
    }
    Canonicalized out;
    out.frame.center = e.center;
    out.frame.rotation = rotation_matrix(angle);
    out.frame.dilation = 1.0 / b;
    out.spec = EllipseSpec::canonical(b / a);
    return out;
}

Canonicalized canonicalize(const ConvexPolygon& polygon)
{
    const Sandwich s = sandwich_of(polygon);
    Canonicalized out;
    out.frame = s.frame;
    out.spec = EllipseSpec::make(s.spec.alpha, 0.5, 1.0);
    return out;
}

// ------------------------------------------------------------------- John

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Barrier objective -t log det B - sum log s_k for x = (p, q, r, d1, d2), B = [p q; q r].
struct JohnBarrier {
    std::vector<Vec2> normals;
    std::vector<double> offsets;

    bool feasible(const Vec5& x) const
    {
        if (x(0) <= 0.0 || x(0) * x(2) - x(1) * x(1) <= 0.0) return false;
        for (std::size_t k = 0; k < normals.size(); ++k)
            if (slack(x, k) <= 0.0) return false;
        return true;
    }

    double slack(const Vec5& x, std::size_t k) const
    {
        const Vec2& a = normals[k];
        const Vec2 v(x(0) * a.x() + x(1) * a.y(), x(1) * a.x() + x(2) * a.y());
        return offsets[k] - a.x() * x(3) - a.y() * x(4) - v.norm();
    }

    double value(const Vec5& x, double t) const
    {
        double f = -t * std::log(x(0) * x(2) - x(1) * x(1));
        for (std::size_t k = 0; k < normals.size(); ++k) f -= std::log(slack(x, k));
        return f;
    }

    void derivatives(const Vec5& x, double t, Vec5& g, Mat5& H) const
    {
        const double p = x(0), q = x(1), r = x(2);
        const double D = p * r - q * q;
        g.setZero();
        H.setZero();
        g(0) = -t * r / D;
        g(1) = t * 2.0 * q / D;
        g(2) = -t * p / D;
        const double D2 = D * D;
        Eigen::Matrix3d hl;
        hl << -r * r, 2.0 * q * r, -q * q,
              2.0 * q * r, -2.0 * D - 4.0 * q * q, 2.0 * q * p,
              -q * q, 2.0 * q * p, -p * p;
        H.topLeftCorner<3, 3>() = -t * hl / D2;

        for (std::size_t k = 0; k < normals.size(); ++k) {
            const Vec2& a = normals[k];
            Eigen::Matrix<double, 2, 5> Jv = Eigen::Matrix<double, 2, 5>::Zero();
            Jv(0, 0) = a.x();
            Jv(0, 1) = a.y();
            Jv(1, 1) = a.x();
            Jv(1, 2) = a.y();
            const Vec2 v = Jv * x;
            const double nv = v.norm();
            const double s = offsets[k] - a.x() * x(3) - a.y() * x(4) - nv;
            Vec5 ds = -Jv.transpose() * (v / nv);
            ds(3) -= a.x();
            ds(4) -= a.y();
            const Mat2 curv = (Mat2::Identity() - v * v.transpose() / (nv * nv)) / nv;
            g -= ds / s;
            H += ds * ds.transpose() / (s * s) + Jv.transpose() * curv * Jv / s;
        }
    }
};

}  // namespace

JohnEllipse john_ellipse(const ConvexPolygon& polygon, double gap_tol, int max_newton)
{
    // Work in a normalized copy: centroid at the origin, circumradius 1.
    const Vec2 c0 = polygon.centroid();
    double scale = 0.0;
    for (const auto& v : polygon.vertices()) scale = std::max(scale, (v - c0).norm());

    JohnBarrier bar;
    const std::size_t m = polygon.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Vec2 p = (polygon.vertices()[k] - c0) / scale;
        const Vec2 e = (polygon.vertices()[(k + 1) % m] - c0) / scale - p;
        const Vec2 n = Vec2(e.y(), -e.x()).normalized();  // outward for CCW
        bar.normals.push_back(n);
        bar.offsets.push_back(n.dot(p));
    }

    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) rho = std::min(rho, bar.offsets[k]);
    Vec5 x;
    x << 0.5 * rho, 0.0, 0.5 * rho, 0.0, 0.0;

    double t = 1.0;
    int steps = 0;
    const double mu = 8.0;
    while (true) {
        for (int inner = 0; inner < 200; ++inner) {
            if (++steps > max_newton) throw GeometryError("john_ellipse: barrier method did not converge");
            Vec5 g;
            Mat5 H;
            bar.derivatives(x, t, g, H);
            const Vec5 dx = H.ldlt().solve(-g);
            const double decrement = -g.dot(dx);
            if (decrement < 1e-14) break;
            double step = 1.0;
            const double f0 = bar.value(x, t);
            while (step > 1e-14) {
                const Vec5 trial = x + step * dx;
                if (bar.feasible(trial) && bar.value(trial, t) <= f0 - 0.25 * step * decrement) break;
                step *= 0.5;
            }
            x += step * dx;
            if (0.5 * decrement < 1e-12) break;
        }
        if (static_cast<double>(m) / t < gap_tol) break;
        t *= mu;
    }

    Mat2 B;
    B << x(0), x(1), x(1), x(2);
    Eigen::SelfAdjointEigenSolver<Mat2> es(B);
    const Vec2 axis_major = es.eigenvectors().col(1);
    JohnEllipse out;
    out.ellipse.center = c0 + scale * Vec2(x(3), x(4));
    out.ellipse.a = scale * es.eigenvalues()(1);
    out.ellipse.b = scale * es.eigenvalues()(0);
    out.ellipse.angle = std::atan2(axis_major.y(), axis_major.x());
    out.duality_gap = static_cast<double>(m) / t;
    out.newton_steps = steps;
    return out;
}

double john_area_ratio(const ConvexPolygon& polygon) { return john_ellipse(polygon).area() / polygon.area(); }

bool lassak_check(const ConvexPolygon& polygon)
{
    // The slack is absolute, so the optimizer has to resolve the area well below it.
    return john_ellipse(polygon, 1e-13, 20000).area() >= kLassakRatio * polygon.area() - 1e-9;
}

Sandwich sandwich_of(const ConvexPolygon& polygon)
{
    const JohnEllipse je = john_ellipse(polygon);
    const Ellipse& e = je.ellipse;
    Sandwich s;
    s.inner = e;
    s.outer = je.doubled();
    s.frame.center = e.center;
    s.frame.rotation = e.rotation();
    s.frame.dilation = 1.0 / (2.0 * e.b);
    s.spec = EllipseSpec::make(e.b / e.a, e.b, 2.0 * e.b);

    for (const auto& v : polygon.vertices())
        if (!s.outer.contains(v, 1e-6)) throw GeometryError("sandwich_of: vertex outside doubled John ellipse");
    for (int k = 0; k < 256; ++k) {
        const Vec2 p = e.point_at(2.0 * std::numbers::pi * k / 256.0);
        if (polygon.min_edge_distance(p) < -1e-6 * e.a)
            throw GeometryError("sandwich_of: John ellipse leaves the polygon");
    }
    return s;
}

// ------------------------------------------------------------------ perimeter

double ramanujan_perimeter(double a, double b)
{
    const double s = a + b;
    const double d = a - b;
    return std::numbers::pi * (s + 3.0 * d * d / (10.0 * s + std::sqrt(a * a + 14.0 * a * b + b * b)));
}

double exact_ellipse_perimeter(double a, double b)
{
    if (a < b) std::swap(a, b);
    const double k = std::sqrt(1.0 - (b * b) / (a * a));
    return 4.0 * a * std::comp_ellint_2(k);
}

double isoperimetric_ratio(const ConvexPolygon& polygon)
{
    const double l = polygon.perimeter();
    return l * l / polygon.area();
}

double isoperimetric_ratio(const Ellipse& e)
{
    if (!(e.a > 0.0 && e.b > 0.0)) throw GeometryError("isoperimetric_ratio: degenerate ellipse");
    const double l = ramanujan_perimeter(e.a, e.b);
    return l * l / e.area();
}

}  // namespace mfe

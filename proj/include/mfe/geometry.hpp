#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfe {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thin-domain description: the domain sits between the similar ellipses
/// {alpha^2 x^2 + y^2 <= beta_minus^2} and {alpha^2 x^2 + y^2 <= beta_plus^2},
/// with c = beta_minus^2 / beta_plus^2.
struct EllipseSpec {
    double alpha = 1.0;
    double beta_minus = 1.0;
    double beta_plus = 1.0;
    double c = 1.0;

    static EllipseSpec make(double alpha, double beta_minus, double beta_plus);
    /// omega_alpha itself: beta_minus = beta_plus = 1, c = 1.
    static EllipseSpec canonical(double alpha);

    void validate() const;
};

/// Ellipse with semi-axes `a` along the direction `angle` and `b` orthogonal to it.
struct Ellipse {
    Vec2 center = Vec2::Zero();
    double angle = 0.0;
    double a = 1.0;
    double b = 1.0;

    Mat2 rotation() const;
    /// Q with (p - center)^T Q (p - center) <= 1 describing the ellipse.
    Mat2 quadratic_form() const;
    bool contains(const Vec2& p, double tol = 0.0) const;
    Vec2 point_at(double t) const;
    double area() const;
    Ellipse scaled(double factor) const;
};

/// Strictly convex polygon, vertices counterclockwise.
class ConvexPolygon {
public:
    explicit ConvexPolygon(std::vector<Vec2> vertices);

    /// Reads one "x y" pair per line; blank lines and lines starting with '#' are skipped.
    static ConvexPolygon from_file(const std::filesystem::path& path);
    static ConvexPolygon regular(int n, double circumradius, const Vec2& center = Vec2::Zero(),
                                 double phase = 0.0);
    static ConvexPolygon rectangle(double x0, double x1, double y0, double y1);
    /// Convex hull of arbitrary points (Andrew's monotone chain).
    static ConvexPolygon hull_of(std::vector<Vec2> points);

    const std::vector<Vec2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }

    double area() const;
    double perimeter() const;
    Vec2 centroid() const;
    /// Signed distance of `p` to the supporting line of edge k, positive inside.
    double edge_distance(std::size_t k, const Vec2& p) const;
    double min_edge_distance(const Vec2& p) const;
    bool contains(const Vec2& p, double tol = 0.0) const;

private:
    std::vector<Vec2> vertices_;
};

/// Similarity map (translation, rotation, dilation) taking a domain to canonical position:
/// q = dilation * R^T (p - center).
struct CanonicalFrame {
    Vec2 center = Vec2::Zero();
    Mat2 rotation = Mat2::Identity();
    double dilation = 1.0;

    Vec2 to_canonical(const Vec2& p) const;
    Vec2 from_canonical(const Vec2& q) const;
    void validate() const;
};

struct Canonicalized {
    CanonicalFrame frame;
    EllipseSpec spec;
};

Canonicalized canonicalize(const Ellipse& ellipse);
/// Uses the John ellipse sandwich, so the result always has c = 1/4 and beta_plus = 1.
Canonicalized canonicalize(const ConvexPolygon& polygon);

struct JohnEllipse {
    Ellipse ellipse;
    double duality_gap = 0.0;
    int newton_steps = 0;

    double area() const { return ellipse.area(); }
    /// {c0 + 2(x - c0) : x in E}
    Ellipse doubled() const { return ellipse.scaled(2.0); }
};

/// Maximal-area ellipse inscribed in a convex polygon. Barrier method on
/// max log det B s.t. ||B a_k|| + a_k^T d <= b_k; stops when the central-path
/// duality gap m/t drops below `gap_tol`.
JohnEllipse john_ellipse(const ConvexPolygon& polygon, double gap_tol = 1e-8, int max_newton = 2000);

/// Area of the inscribed John ellipse over the polygon area.
double john_area_ratio(const ConvexPolygon& polygon);
/// True iff the John ellipse area is at least pi/(3 sqrt 3) A(K) (less 1e-9).
bool lassak_check(const ConvexPolygon& polygon);
inline constexpr double kLassakRatio = std::numbers::pi / (3.0 * std::numbers::sqrt3);

struct Sandwich {
    EllipseSpec spec;  ///< in the rotated, translated but undilated frame
    CanonicalFrame frame;
    Ellipse inner;
    Ellipse outer;
};

/// Inner ellipse = John ellipse, outer = its double; c = 1/4.
Sandwich sandwich_of(const ConvexPolygon& polygon);

/// Ramanujan's second perimeter formula, the perimeter of record for ellipses.
/// It underestimates the exact elliptic-integral perimeter, by at most 2.4e-4 relative for
/// b/a >= 0.01 and below 1e-4 for b/a >= 0.05.
double ramanujan_perimeter(double a, double b);
double exact_ellipse_perimeter(double a, double b);

double isoperimetric_ratio(const ConvexPolygon& polygon);
double isoperimetric_ratio(const Ellipse& ellipse);

}  // namespace mfe

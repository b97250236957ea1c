#pragma once

#include "mfe/geometry.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mfe {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Box {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

/// Area and first moments of a region.
struct Moments {
    double area = 0.0;
    double mx = 0.0;
    double my = 0.0;
    Vec2 centroid() const { return Vec2(mx / area, my / area); }
};

/// Planar convex domain the grids are built on: an axis-aligned ellipse or a convex polygon.
/// Rotated ellipses are handled by canonicalizing first.
class Domain {
public:
    static Domain ellipse(double a, double b, const Vec2& center = Vec2::Zero());
    /// omega_alpha = {alpha^2 x^2 + y^2 <= 1}
    static Domain canonical_ellipse(double alpha);
    static Domain disk(double radius = 1.0, const Vec2& center = Vec2::Zero());
    static Domain polygon(ConvexPolygon polygon);
    static Domain rectangle(double x0, double x1, double y0, double y1);

    bool is_ellipse() const { return std::holds_alternative<Ellipse>(shape_); }
    const Ellipse* as_ellipse() const { return std::get_if<Ellipse>(&shape_); }
    const ConvexPolygon* as_polygon() const { return std::get_if<ConvexPolygon>(&shape_); }

    Box bbox() const;
    double area() const;
    /// Ramanujan's formula for ellipses.
    double perimeter() const;
    bool contains(const Vec2& p, double tol = 0.0) const;

    /// y-extent of the vertical line through x, if it meets the domain.
    std::optional<Interval> chord_y(double x) const;
    std::optional<Interval> chord_x(double y) const;

    /// Exact area and first moments of the intersection with an axis-aligned box.
    Moments clip_moments(const Box& box) const;
    /// Boundary corners lying in the closed box (polygon vertices; none for ellipses).
    std::vector<Vec2> corners_in(const Box& box) const;
    /// Extra boundary samples inside the box used to resolve curved boundary pieces.
    std::vector<Vec2> arc_samples_in(const Box& box) const;

    std::string describe() const;

private:
    explicit Domain(std::variant<Ellipse, ConvexPolygon> s) : shape_(std::move(s)) {}
    std::variant<Ellipse, ConvexPolygon> shape_;
};

/// Shortley-Weller arm lengths of an interior node; a neighbour is a grid node
/// when its arm equals the spacing, otherwise the arm ends on the boundary.
struct Arms {
    double left = 0.0, right = 0.0, down = 0.0, up = 0.0;
};

struct GridNode {
    int i = 0;
    int j = 0;
    Arms arms;
    /// interior indices of the four neighbours, -1 for a boundary neighbour
    int left = -1, right = -1, down = -1, up = -1;
};

struct BoundarySample {
    Vec2 point;
    double weight = 0.0;
};

using GridField = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Cartesian grid over the bounding box; nodes span the box exactly
/// (x_i = x0 + i hx, i = 0..nx-1). Only nodes strictly inside the domain carry unknowns.
class Grid {
public:
    static constexpr double kBoundaryTie = 1e-12;

    Grid(Domain domain, int nx, int ny);

    const Domain& domain() const { return domain_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double h() const { return std::max(hx_, hy_); }
    const Box& box() const { return box_; }

    Eigen::Index size() const { return static_cast<Eigen::Index>(nodes_.size()); }
    const std::vector<GridNode>& nodes() const { return nodes_; }
    Vec2 point(int i, int j) const { return Vec2(box_.x0 + i * hx_, box_.y0 + j * hy_); }
    Vec2 node_point(Eigen::Index k) const;
    /// Interior index of node (i,j), or -1.
    int index(int i, int j) const;

    /// Nodal quadrature weights; integral of f = w.f + sum over boundary samples of weight * f(boundary).
    const Eigen::VectorXd& weights() const { return weights_; }
    const std::vector<BoundarySample>& boundary_samples() const { return boundary_; }
    double boundary_weight() const { return boundary_weight_; }
    double total_weight() const { return weights_.sum() + boundary_weight_; }

    /// Discrete -Laplacian with Shortley-Weller rows (homogeneous Dirichlet data).
    const SparseMatrix& laplacian() const { return laplacian_; }

    GridField sample(const std::function<double(const Vec2&)>& f) const;

private:
    void classify();
    void assemble_laplacian();
    void assemble_weights();

    Domain domain_;
    int nx_ = 0, ny_ = 0;
    double hx_ = 0.0, hy_ = 0.0;
    Box box_;
    std::vector<int> index_;
    std::vector<GridNode> nodes_;
    Eigen::VectorXd weights_;
    std::vector<BoundarySample> boundary_;
    double boundary_weight_ = 0.0;
    SparseMatrix laplacian_;
};

/// Integral of a field with the given constant trace on the boundary.
double quadrature(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f, double boundary_value = 0.0);
double quadrature(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                  const std::function<double(const Vec2&)>& boundary);
/// Integral of a closed-form function sampled at the quadrature nodes.
double quadrature(const Grid& grid, const std::function<double(const Vec2&)>& f);

/// Bilinear interpolation of a field (zero trace) at an arbitrary point of the box.
double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f, const Vec2& p);

/// Grid for omega_alpha with hx close to hy: nx = (ny - 1)/alpha + 1, capped.
Grid anisotropic_ellipse_grid(double alpha, int ny, int max_nx = 4096);

}  // namespace mfe

#include "mfe/grid.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mfe {

// --------------------------------------------------------------------- Domain

Domain Domain::ellipse(double a, double b, const Vec2& center)
{
    if (!(a > 0.0 && b > 0.0)) throw GeometryError("Domain::ellipse: semi-axes must be positive");
    return Domain(Ellipse{center, 0.0, a, b});
}

Domain Domain::canonical_ellipse(double alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) throw GeometryError("Domain::canonical_ellipse: alpha must lie in (0,1]");
    return ellipse(1.0 / alpha, 1.0);
}

Domain Domain::disk(double radius, const Vec2& center) { return ellipse(radius, radius, center); }

Domain Domain::polygon(ConvexPolygon polygon) { return Domain(std::move(polygon)); }

Domain Domain::rectangle(double x0, double x1, double y0, double y1)
{
    return polygon(ConvexPolygon::rectangle(x0, x1, y0, y1));
}

Box Domain::bbox() const
{
    if (const auto* e = as_ellipse())
        return Box{e->center.x() - e->a, e->center.x() + e->a, e->center.y() - e->b, e->center.y() + e->b};
    const auto& v = as_polygon()->vertices();
    Box b{v[0].x(), v[0].x(), v[0].y(), v[0].y()};
    for (const auto& p : v) {
        b.x0 = std::min(b.x0, p.x());
        b.x1 = std::max(b.x1, p.x());
        b.y0 = std::min(b.y0, p.y());
        b.y1 = std::max(b.y1, p.y());
    }
    return b;
}

double Domain::area() const
{
    if (const auto* e = as_ellipse()) return e->area();
    return as_polygon()->area();
}

double Domain::perimeter() const
{
    if (const auto* e = as_ellipse()) return ramanujan_perimeter(e->a, e->b);
    return as_polygon()->perimeter();
}

bool Domain::contains(const Vec2& p, double tol) const
{
    if (const auto* e = as_ellipse()) {
        const double dx = (p.x() - e->center.x()) / e->a;
        const double dy = (p.y() - e->center.y()) / e->b;
        return dx * dx + dy * dy <= 1.0 + tol;
    }
    return as_polygon()->contains(p, tol);
}

namespace {

std::optional<Interval> polygon_chord(const ConvexPolygon& poly, double s, int axis)
{
    const int other = 1 - axis;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const auto& v = poly.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec2& p = v[k];
        const Vec2& q = v[(k + 1) % v.size()];
        if ((p[axis] - s) * (q[axis] - s) > 0.0) continue;
        if (p[axis] == q[axis]) {
            lo = std::min({lo, p[other], q[other]});
            hi = std::max({hi, p[other], q[other]});
            continue;
        }
        const double t = (s - p[axis]) / (q[axis] - p[axis]);
        const double y = p[other] + t * (q[other] - p[other]);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    if (lo > hi) return std::nullopt;
    return Interval{lo, hi};
}

Moments polygon_moments(const std::vector<Vec2>& pts)
{
    Moments m;
    const std::size_t n = pts.size();
    if (n < 3) return m;
    double a2 = 0.0;
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % n];
        const double w = p.x() * q.y() - p.y() * q.x();
        a2 += w;
        c += w * (p + q);
    }
    m.area = 0.5 * a2;
    m.mx = c.x() / 6.0;
    m.my = c.y() / 6.0;
    return m;
}

/// Sutherland-Hodgman against the half-plane sign * (p[axis] - s) >= 0.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& in, int axis, double s, double sign)
{
    std::vector<Vec2> out;
    if (in.empty()) return out;
    out.reserve(in.size() + 2);
    for (std::size_t k = 0; k < in.size(); ++k) {
        const Vec2& p = in[k];
        const Vec2& q = in[(k + 1) % in.size()];
        const double fp = sign * (p[axis] - s);
        const double fq = sign * (q[axis] - s);
        if (fp >= 0.0) out.push_back(p);
        if ((fp >= 0.0) != (fq >= 0.0)) {
            const double t = fp / (fp - fq);
            Vec2 r = p + t * (q - p);
            r[axis] = s;
            out.push_back(r);
        }
    }
    return out;
}

/// Moments of {x^2/a^2 + y^2/b^2 <= 1} intersected with a box, ellipse centered at the origin.
Moments ellipse_box_moments(double a, double b, const Box& box)
{
    Moments m;
    const double xa = std::max(box.x0, -a);
    const double xb = std::min(box.x1, a);
    if (xa >= xb || box.y0 >= b || box.y1 <= -b) return m;

    std::vector<double> brk{xa, xb};
    for (double y : {box.y0, box.y1}) {
        if (std::abs(y) >= b) continue;
        const double xs = a * std::sqrt(1.0 - (y / b) * (y / b));
        for (double x : {-xs, xs})
            if (x > xa && x < xb) brk.push_back(x);
    }
    std::sort(brk.begin(), brk.end());

    using Rule = boost::math::quadrature::gauss<double, 20>;
    for (std::size_t k = 0; k + 1 < brk.size(); ++k) {
        const double t0 = std::asin(std::clamp(brk[k] / a, -1.0, 1.0));
        const double t1 = std::asin(std::clamp(brk[k + 1] / a, -1.0, 1.0));
        if (t1 <= t0) continue;
        auto band = [&](double t, int which) {
            const double x = a * std::sin(t);
            const double top = b * std::cos(t);
            const double lo = std::max(box.y0, -top);
            const double hi = std::min(box.y1, top);
            if (hi <= lo) return 0.0;
            const double jac = a * std::cos(t);
            switch (which) {
            case 0: return (hi - lo) * jac;
            case 1: return x * (hi - lo) * jac;
            default: return 0.5 * (hi * hi - lo * lo) * jac;
            }
        };
        m.area += Rule::integrate([&](double t) { return band(t, 0); }, t0, t1);
        m.mx += Rule::integrate([&](double t) { return band(t, 1); }, t0, t1);
        m.my += Rule::integrate([&](double t) { return band(t, 2); }, t0, t1);
    }
    return m;
}

bool in_box(const Box& b, const Vec2& p, double slack)
{
    return p.x() >= b.x0 - slack && p.x() <= b.x1 + slack && p.y() >= b.y0 - slack && p.y() <= b.y1 + slack;
}

}  // namespace

std::optional<Interval> Domain::chord_y(double x) const
{
    if (const auto* e = as_ellipse()) {
        const double d = (x - e->center.x()) / e->a;
        if (std::abs(d) > 1.0) return std::nullopt;
        const double half = e->b * std::sqrt(std::max(0.0, 1.0 - d * d));
        return Interval{e->center.y() - half, e->center.y() + half};
    }
    return polygon_chord(*as_polygon(), x, 0);
}

std::optional<Interval> Domain::chord_x(double y) const
{
    if (const auto* e = as_ellipse()) {
        const double d = (y - e->center.y()) / e->b;
        if (std::abs(d) > 1.0) return std::nullopt;
        const double half = e->a * std::sqrt(std::max(0.0, 1.0 - d * d));
        return Interval{e->center.x() - half, e->center.x() + half};
    }
    return polygon_chord(*as_polygon(), y, 1);
}

Moments Domain::clip_moments(const Box& box) const
{
    if (const auto* e = as_ellipse()) {
        const Box local{box.x0 - e->center.x(), box.x1 - e->center.x(), box.y0 - e->center.y(),
                        box.y1 - e->center.y()};
        Moments m = ellipse_box_moments(e->a, e->b, local);
        m.mx += e->center.x() * m.area;
        m.my += e->center.y() * m.area;
        return m;
    }
    std::vector<Vec2> pts = as_polygon()->vertices();
    pts = clip_half_plane(pts, 0, box.x0, 1.0);
    pts = clip_half_plane(pts, 0, box.x1, -1.0);
    pts = clip_half_plane(pts, 1, box.y0, 1.0);
    pts = clip_half_plane(pts, 1, box.y1, -1.0);
    return polygon_moments(pts);
}

std::vector<Vec2> Domain::corners_in(const Box& box) const
{
    std::vector<Vec2> out;
    if (const auto* poly = as_polygon())
        for (const auto& v : poly->vertices())
            if (in_box(box, v, 0.0)) out.push_back(v);
    return out;
}

std::vector<Vec2> Domain::arc_samples_in(const Box& box) const
{
    std::vector<Vec2> out;
    const auto* e = as_ellipse();
    if (!e) return out;
    std::vector<double> angles;
    auto add = [&](const Vec2& p) {
        angles.push_back(std::atan2((p.y() - e->center.y()) / e->b, (p.x() - e->center.x()) / e->a));
    };
    for (double y : {box.y0, box.y1})
        if (auto c = chord_x(y))
            for (double x : {c->lo, c->hi})
                if (x >= box.x0 && x <= box.x1) add(Vec2(x, y));
    for (double x : {box.x0, box.x1})
        if (auto c = chord_y(x))
            for (double y : {c->lo, c->hi})
                if (y >= box.y0 && y <= box.y1) add(Vec2(x, y));
    std::sort(angles.begin(), angles.end());
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double t0 = angles[k];
        const double t1 = (k + 1 < angles.size()) ? angles[k + 1] : angles[0] + 2.0 * std::numbers::pi;
        if (t1 - t0 < 1e-14) continue;
        const double t = 0.5 * (t0 + t1);
        const Vec2 p = e->center + Vec2(e->a * std::cos(t), e->b * std::sin(t));
        if (in_box(box, p, 0.0)) out.push_back(p);
    }
    return out;
}

std::string Domain::describe() const
{
    std::ostringstream os;
    if (const auto* e = as_ellipse())
        os << "ellipse(a=" << e->a << ", b=" << e->b << ")";
    else
        os << "polygon(" << as_polygon()->size() << " vertices)";
    return os.str();
}

// ----------------------------------------------------------------------- Grid

Grid::Grid(Domain domain, int nx, int ny) : domain_(std::move(domain)), nx_(nx), ny_(ny)
{
    if (nx < 8 || ny < 8) throw GeometryError("build_grid: need at least 8 nodes per axis");
    box_ = domain_.bbox();
    if (!(box_.width() > 0.0 && box_.height() > 0.0)) throw GeometryError("build_grid: degenerate domain");
    hx_ = box_.width() / (nx - 1);
    hy_ = box_.height() / (ny - 1);
    classify();
    if (nodes_.empty()) throw GeometryError("build_grid: resolution too coarse, no interior nodes");
    assemble_laplacian();
    assemble_weights();
}

Vec2 Grid::node_point(Eigen::Index k) const
{
    const auto& n = nodes_[static_cast<std::size_t>(k)];
    return point(n.i, n.j);
}

int Grid::index(int i, int j) const
{
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
    return index_[static_cast<std::size_t>(j) * nx_ + i];
}

void Grid::classify()
{
    index_.assign(static_cast<std::size_t>(nx_) * ny_, -1);
    std::vector<std::optional<Interval>> cols(nx_);
    std::vector<std::optional<Interval>> rows(ny_);
    for (int i = 0; i < nx_; ++i) cols[i] = domain_.chord_y(point(i, 0).x());
    for (int j = 0; j < ny_; ++j) rows[j] = domain_.chord_x(point(0, j).y());

    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const Vec2 p = point(i, j);
            const auto& c = cols[i];
            const auto& r = rows[j];
            if (!c || !r) continue;
            if (p.y() - c->lo > kBoundaryTie && c->hi - p.y() > kBoundaryTie && p.x() - r->lo > kBoundaryTie &&
                r->hi - p.x() > kBoundaryTie) {
                index_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<int>(nodes_.size());
                nodes_.push_back(GridNode{i, j, {}, -1, -1, -1, -1});
            }
        }
    }
    for (auto& n : nodes_) {
        const Vec2 p = point(n.i, n.j);
        const Interval r = *rows[n.j];
        const Interval c = *cols[n.i];
        n.left = index(n.i - 1, n.j);
        n.right = index(n.i + 1, n.j);
        n.down = index(n.i, n.j - 1);
        n.up = index(n.i, n.j + 1);
        n.arms.left = n.left >= 0 ? hx_ : std::min(hx_, p.x() - r.lo);
        n.arms.right = n.right >= 0 ? hx_ : std::min(hx_, r.hi - p.x());
        n.arms.down = n.down >= 0 ? hy_ : std::min(hy_, p.y() - c.lo);
        n.arms.up = n.up >= 0 ? hy_ : std::min(hy_, c.hi - p.y());
    }
}

void Grid::assemble_laplacian()
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nodes_.size() * 5);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const auto& n = nodes_[k];
        const auto& a = n.arms;
        const int row = static_cast<int>(k);
        trip.emplace_back(row, row, 2.0 / (a.left * a.right) + 2.0 / (a.down * a.up));
        if (n.left >= 0) trip.emplace_back(row, n.left, -2.0 / (a.left * (a.left + a.right)));
        if (n.right >= 0) trip.emplace_back(row, n.right, -2.0 / (a.right * (a.left + a.right)));
        if (n.down >= 0) trip.emplace_back(row, n.down, -2.0 / (a.down * (a.down + a.up)));
        if (n.up >= 0) trip.emplace_back(row, n.up, -2.0 / (a.up * (a.down + a.up)));
    }
    laplacian_.resize(size(), size());
    laplacian_.setFromTriplets(trip.begin(), trip.end());
    laplacian_.makeCompressed();
}

namespace {

struct CellPoint {
    Vec2 p;
    int node;  // interior index, -1 for a boundary point
};

void push_unique(std::vector<CellPoint>& pts, const CellPoint& c, double tol)
{
    for (const auto& q : pts)
        if ((q.p - c.p).norm() <= tol) return;
    pts.push_back(c);
}

}  // namespace

void Grid::assemble_weights()
{
    weights_ = Eigen::VectorXd::Zero(size());
    boundary_.clear();
    const double full = hx_ * hy_;
    const double tol = 1e-12 * std::min(hx_, hy_);

    for (int j = 0; j + 1 < ny_; ++j) {
        for (int i = 0; i + 1 < nx_; ++i) {
            const std::array<int, 4> idx{index(i, j), index(i + 1, j), index(i, j + 1), index(i + 1, j + 1)};
            if (std::all_of(idx.begin(), idx.end(), [](int k) { return k >= 0; })) {
                for (int k : idx) weights_[k] += 0.25 * full;
                continue;
            }
            const Box cell{point(i, j).x(), point(i + 1, j).x(), point(i, j).y(), point(i, j + 1).y()};
            const Moments m = domain_.clip_moments(cell);
            if (m.area <= 1e-14 * full) continue;

            std::vector<CellPoint> pts;
            const std::array<std::pair<int, int>, 4> corners{{{i, j}, {i + 1, j}, {i, j + 1}, {i + 1, j + 1}}};
            for (std::size_t c = 0; c < 4; ++c) {
                const Vec2 p = point(corners[c].first, corners[c].second);
                if (idx[c] >= 0)
                    push_unique(pts, {p, idx[c]}, tol);
                else if (domain_.contains(p, 1e-12))
                    push_unique(pts, {p, -1}, tol);
            }
            for (double y : {cell.y0, cell.y1})
                if (auto r = domain_.chord_x(y))
                    for (double x : {r->lo, r->hi})
                        if (x >= cell.x0 && x <= cell.x1) push_unique(pts, {Vec2(x, y), -1}, tol);
            for (double x : {cell.x0, cell.x1})
                if (auto c = domain_.chord_y(x))
                    for (double y : {c->lo, c->hi})
                        if (y >= cell.y0 && y <= cell.y1) push_unique(pts, {Vec2(x, y), -1}, tol);
            for (const auto& v : domain_.corners_in(cell)) push_unique(pts, {v, -1}, tol);
            for (const auto& v : domain_.arc_samples_in(cell)) push_unique(pts, {v, -1}, tol);

            // Pick the data triangle in which the centroid is deepest; the resulting
            // weights integrate linear functions exactly over the cut cell.
            const Vec2 g = m.centroid();
            double best = -std::numeric_limits<double>::infinity();
            std::array<std::size_t, 3> tri{};
            Eigen::Vector3d bary = Eigen::Vector3d::Zero();
            for (std::size_t a = 0; a < pts.size(); ++a)
                for (std::size_t b = a + 1; b < pts.size(); ++b)
                    for (std::size_t c = b + 1; c < pts.size(); ++c) {
                        const Vec2 e1 = pts[b].p - pts[a].p;
                        const Vec2 e2 = pts[c].p - pts[a].p;
                        const double det = e1.x() * e2.y() - e1.y() * e2.x();
                        if (std::abs(det) < 1e-10 * full) continue;
                        const Vec2 d = g - pts[a].p;
                        const double lb = (d.x() * e2.y() - d.y() * e2.x()) / det;
                        const double lc = (e1.x() * d.y() - e1.y() * d.x()) / det;
                        const double la = 1.0 - lb - lc;
                        const double worst = std::min({la, lb, lc});
                        if (worst > best) {
                            best = worst;
                            tri = {a, b, c};
                            bary = Eigen::Vector3d(la, lb, lc);
                        }
                    }

            auto deposit = [&](const CellPoint& cp, double w) {
                if (cp.node >= 0)
                    weights_[cp.node] += w;
                else
                    boundary_.push_back({cp.p, w});
            };
            if (best == -std::numeric_limits<double>::infinity()) {
                for (const auto& cp : pts) deposit(cp, m.area / static_cast<double>(pts.size()));
            } else {
                for (int t = 0; t < 3; ++t) deposit(pts[tri[t]], m.area * bary[t]);
            }
        }
    }
    boundary_weight_ = 0.0;
    for (const auto& b : boundary_) boundary_weight_ += b.weight;
}

GridField Grid::sample(const std::function<double(const Vec2&)>& f) const
{
    GridField out(size());
    for (Eigen::Index k = 0; k < size(); ++k) out[k] = f(node_point(k));
    return out;
}

double quadrature(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f, double boundary_value)
{
    return grid.weights().dot(f) + boundary_value * grid.boundary_weight();
}

double quadrature(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                  const std::function<double(const Vec2&)>& boundary)
{
    double s = grid.weights().dot(f);
    for (const auto& b : grid.boundary_samples()) s += b.weight * boundary(b.point);
    return s;
}

double quadrature(const Grid& grid, const std::function<double(const Vec2&)>& f)
{
    return quadrature(grid, grid.sample(f), f);
}

double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f, const Vec2& p)
{
    const Box& b = grid.box();
    const double sx = (p.x() - b.x0) / grid.hx();
    const double sy = (p.y() - b.y0) / grid.hy();
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, grid.nx() - 2);
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, grid.ny() - 2);
    const double tx = sx - i;
    const double ty = sy - j;
    auto val = [&](int ii, int jj) {
        const int k = grid.index(ii, jj);
        return k >= 0 ? f[k] : 0.0;
    };
    return (1 - tx) * (1 - ty) * val(i, j) + tx * (1 - ty) * val(i + 1, j) + (1 - tx) * ty * val(i, j + 1) +
           tx * ty * val(i + 1, j + 1);
}

Grid anisotropic_ellipse_grid(double alpha, int ny, int max_nx)
{
    const int nx = std::min(max_nx, static_cast<int>(std::lround((ny - 1) / alpha)) + 1);
    return Grid(Domain::canonical_ellipse(alpha), nx, ny);
}

}  // namespace mfe

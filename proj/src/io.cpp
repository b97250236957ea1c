#include "mfe/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mfe {

namespace {

double parse_double(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw IoError("malformed " + what + ": '" + s + "'");
    }
    if (used != s.size()) throw IoError("malformed " + what + ": '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& what)
{
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw IoError("malformed " + what + ": '" + s + "'");
    return v;
}

}  // namespace

Domain parse_domain(const std::string& spec)
{
    if (spec == "disk") return Domain::disk();
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw IoError("malformed domain spec '" + spec + "'");
    const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (kind == "ellipse") {
        const double a = parse_double(arg, "ellipse alpha");
        if (!(a > 0.0 && a <= 1.0)) throw IoError("ellipse alpha must lie in (0, 1]");
        return Domain::canonical_ellipse(a);
    }
    if (kind == "polygon") {
        if (arg.empty()) throw IoError("polygon spec needs a file");
        try {
            return Domain::polygon(ConvexPolygon::from_file(arg));
        } catch (const GeometryError& e) {
            throw IoError(std::string("polygon file: ") + e.what());
        }
    }
    throw IoError("malformed domain spec '" + spec + "'");
}

std::pair<int, int> parse_grid(const std::string& spec)
{
    const auto x = spec.find('x');
    if (x == std::string::npos) throw IoError("grid must be NXxNY, got '" + spec + "'");
    const int nx = parse_int(spec.substr(0, x), "grid");
    const int ny = parse_int(spec.substr(x + 1), "grid");
    if (nx < 8 || ny < 8 || nx > 4096 || ny > 4096) throw IoError("grid sides must lie in [8, 4096]");
    return {nx, ny};
}

Grid make_grid(const Domain& domain, const std::optional<std::pair<int, int>>& resolution)
{
    if (resolution) return Grid(domain, resolution->first, resolution->second);
    const Ellipse* e = domain.as_ellipse();
    if (e && e->b == 1.0 && e->a > 1.0 && e->angle == 0.0 && e->center.isZero())
        return anisotropic_ellipse_grid(1.0 / e->a, 256);
    return Grid(domain, 256, 256);
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(std::ostream& os, const Grid& grid, const GridField& u)
{
    if (u.size() != grid.size()) throw IoError("field does not match the grid");
    os << "x,y,value\n";
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const Vec2 p = grid.node_point(k);
        os << format_number(p.x()) << ',' << format_number(p.y()) << ',' << format_number(u[k]) << '\n';
    }
}

GridField read_field_csv(const std::filesystem::path& path, const Grid& grid)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,value", 0) != 0) throw IoError(path.string() + ": missing header");
    GridField u = GridField::Constant(grid.size(), std::nan(""));
    const Box& b = grid.box();
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string fx, fy, fv;
        if (!std::getline(ss, fx, ',') || !std::getline(ss, fy, ',') || !std::getline(ss, fv))
            throw IoError(path.string() + ": malformed row " + std::to_string(row));
        const double x = parse_double(fx, "x"), y = parse_double(fy, "y"), v = parse_double(fv, "value");
        const double si = (x - b.x0) / grid.hx(), sj = (y - b.y0) / grid.hy();
        const int i = static_cast<int>(std::lround(si)), j = static_cast<int>(std::lround(sj));
        const int k = grid.index(i, j);
        if (k < 0 || std::abs(si - i) > 1e-6 || std::abs(sj - j) > 1e-6)
            throw IoError(path.string() + ": row " + std::to_string(row) + " is not an interior node of the grid");
        u[k] = v;
    }
    if (u.hasNaN()) throw IoError(path.string() + ": not every interior node is present");
    return u;
}

void write_branch_csv(std::ostream& os, const Branch& branch)
{
    os << "alpha,lambda,mu,sup_u,energy,entropy,F_lambda,tau1,nu0,fold_flag\n";
    for (const auto& p : branch.points) {
        os << format_number(branch.alpha) << ',' << format_number(p.lambda) << ',' << format_number(p.mu) << ','
           << format_number(p.sup_norm) << ',' << format_number(p.energy) << ',' << format_number(p.entropy) << ','
           << format_number(p.F_lambda) << ',' << format_number(p.tau1) << ',' << format_number(p.nu0) << ','
           << (p.fold ? 1 : 0) << '\n';
    }
}

void write_entropy_csv(std::ostream& os, const EntropyCurve& curve, const CurvatureResult& curvature)
{
    os << "E,S,lambda,d2S_dE2\n";
    const auto& E = curvature.E;
    for (std::size_t k = 0; k < curve.E.size(); ++k) {
        const double e = curve.E[k];
        double d2 = std::nan("");
        // interior resampled nodes carry second differences
        for (std::size_t m = 1; m + 2 < E.size(); ++m) {
            if (e >= E[m] && e <= E[m + 1]) {
                const double t = (e - E[m]) / (E[m + 1] - E[m]);
                d2 = (1.0 - t) * curvature.d2S[m] + t * curvature.d2S[m + 1];
                break;
            }
        }
        os << format_number(e) << ',' << format_number(curve.S[k]) << ',' << format_number(curve.lambda[k]) << ','
           << format_number(d2) << '\n';
    }
}

nlohmann::json to_json(const ThresholdReport& r)
{
    return nlohmann::json{{"alpha", r.alpha},
                          {"c", r.c},
                          {"mu_bar", r.mu_bar},
                          {"gamma_bar_sq", r.gamma_bar_sq},
                          {"gamma_under_sq", r.gamma_under_sq},
                          {"lambda_lower", r.lambda_lower},
                          {"lambda_upper", r.lambda_upper},
                          {"alpha_star_upper", r.alpha_star_upper},
                          {"alpha_star_lower", r.alpha_star_lower},
                          {"pohozaev", r.pohozaev}};
}

nlohmann::json to_json(const CriterionResult& r)
{
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : r.values) values[k] = v;
    return nlohmann::json{{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"values", values}};
}

nlohmann::json to_json(const JohnEllipse& j, const ConvexPolygon& polygon)
{
    const Ellipse& e = j.ellipse;
    return nlohmann::json{{"center", {e.center.x(), e.center.y()}},
                          {"angle", e.angle},
                          {"a", e.a},
                          {"b", e.b},
                          {"area_ratio", j.area() / polygon.area()},
                          {"lassak_ratio", kLassakRatio},
                          {"duality_gap", j.duality_gap},
                          {"newton_steps", j.newton_steps}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace mfe

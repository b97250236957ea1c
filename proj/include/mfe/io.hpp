#pragma once

#include "mfe/acceptance.hpp"
#include "mfe/branch.hpp"
#include "mfe/closedform.hpp"
#include "mfe/geometry.hpp"
#include "mfe/grid.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace mfe {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "ellipse:ALPHA" (the canonical omega_alpha), "polygon:FILE" or "disk".
Domain parse_domain(const std::string& spec);
/// "NXxNY"; each side in [8, 4096].
std::pair<int, int> parse_grid(const std::string& spec);
/// Explicit resolution if given, otherwise 256 x 256 with anisotropic ellipse grids for canonical ellipses.
Grid make_grid(const Domain& domain, const std::optional<std::pair<int, int>>& resolution);

/// Numbers as %.17g; NaN written as "nan".
std::string format_number(double v);

void write_field_csv(std::ostream& os, const Grid& grid, const GridField& u);
/// Reads an "x,y,value" dump back onto the grid; every interior node must be present.
GridField read_field_csv(const std::filesystem::path& path, const Grid& grid);

/// alpha,lambda,mu,sup_u,energy,entropy,F_lambda,tau1,nu0,fold_flag
void write_branch_csv(std::ostream& os, const Branch& branch);
/// E,S,lambda,d2S_dE2; the curvature column is the resampled second difference
/// interpolated to each point, nan where it is not defined.
void write_entropy_csv(std::ostream& os, const EntropyCurve& curve, const CurvatureResult& curvature);

nlohmann::json to_json(const ThresholdReport& r);
nlohmann::json to_json(const CriterionResult& r);
nlohmann::json to_json(const JohnEllipse& j, const ConvexPolygon& polygon);

/// Two-space indented dump with a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace mfe

#include "doctest.h"

#include "mfe/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace mfe;

TEST_CASE("domain and grid specs")
{
    CHECK(parse_domain("disk").area() == doctest::Approx(std::numbers::pi));
    const Domain e = parse_domain("ellipse:0.05");
    REQUIRE(e.as_ellipse());
    CHECK(e.as_ellipse()->a == doctest::Approx(20.0));
    CHECK_THROWS_AS(parse_domain("ellipse:"), IoError);
    CHECK_THROWS_AS(parse_domain("ellipse:1.5"), IoError);
    CHECK_THROWS_AS(parse_domain("ellipse:0.1x"), IoError);
    CHECK_THROWS_AS(parse_domain("square"), IoError);
    CHECK_THROWS_AS(parse_domain("polygon:/nonexistent/file"), IoError);

    CHECK(parse_grid("128x64") == std::pair{128, 64});
    CHECK_THROWS_AS(parse_grid("128"), IoError);
    CHECK_THROWS_AS(parse_grid("4x64"), IoError);
    CHECK_THROWS_AS(parse_grid("5000x64"), IoError);

    const Grid g = make_grid(parse_domain("ellipse:0.25"), std::nullopt);
    CHECK(g.ny() == 256);
    CHECK(g.nx() == 1021);
    CHECK(make_grid(parse_domain("disk"), std::pair{33, 17}).nx() == 33);
}

TEST_CASE("field CSV round trip")
{
    const Grid g(Domain::canonical_ellipse(0.5), 41, 21);
    const GridField u = g.sample([](const Vec2& p) { return std::sin(p.x()) * std::exp(p.y()) + 1.0 / 3.0; });
    const auto path = std::filesystem::temp_directory_path() / "mfe_field_roundtrip.csv";
    {
        std::ofstream os(path);
        write_field_csv(os, g, u);
    }
    const GridField v = read_field_csv(path, g);
    CHECK((u - v).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_THROWS_AS(read_field_csv(path, Grid(Domain::canonical_ellipse(0.5), 43, 21)), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("numbers keep seventeen digits")
{
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(std::numbers::pi)) == std::numbers::pi);
}

TEST_CASE("branch CSV columns")
{
    Branch b;
    b.alpha = 0.5;
    BranchPoint p;
    p.lambda = 2.0;
    p.fold = true;
    b.points.push_back(p);
    std::ostringstream os;
    write_branch_csv(os, b);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "alpha,lambda,mu,sup_u,energy,entropy,F_lambda,tau1,nu0,fold_flag");
    CHECK(row == "0.5,2,0,0,0,0,0,nan,nan,1");
}

TEST_CASE("threshold report keys")
{
    const nlohmann::json j = to_json(threshold_report(0.05, 1.0));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::vector<std::string> expected{"alpha",        "alpha_star_lower", "alpha_star_upper", "c",
                                      "gamma_bar_sq", "gamma_under_sq",   "lambda_lower",     "lambda_upper",
                                      "mu_bar",       "pohozaev"};
    CHECK(keys == expected);
    CHECK(j["lambda_lower"].get<double>() == doctest::Approx(lambda_lower(0.05, 1.0)));
}

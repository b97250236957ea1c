#include "mfe/acceptance.hpp"
#include "mfe/branch.hpp"
#include "mfe/closedform.hpp"
#include "mfe/io.hpp"
#include "mfe/solver.hpp"
#include "mfe/spectrum.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

using namespace mfe;
using std::numbers::pi;

namespace {

struct Common {
    std::string domain = "disk";
    std::string grid;
    std::string out;
    double newton_tol = 1e-10;
    double eig_tol = 1e-8;
    std::uint64_t seed = 42;
};

void add_domain(CLI::App* app, Common& c)
{
    app->add_option("--domain", c.domain, "ellipse:ALPHA | polygon:FILE | disk")->capture_default_str();
    app->add_option("--grid", c.grid, "NXxNY (default 256x256, anisotropic for ellipses)");
}

void add_out(CLI::App* app, Common& c) { app->add_option("--out", c.out, "Output prefix (default: stdout)"); }

Grid build_grid(const Common& c)
{
    std::optional<std::pair<int, int>> res;
    if (!c.grid.empty()) res = parse_grid(c.grid);
    Grid g = make_grid(parse_domain(c.domain), res);
    spdlog::info("domain {} on a {}x{} grid, {} unknowns", g.domain().describe(), g.nx(), g.ny(), g.size());
    return g;
}

NewtonOptions newton_options(const Common& c)
{
    NewtonOptions o;
    o.tol = c.newton_tol;
    return o;
}

/// Writes to PREFIX.suffix, or stdout without a prefix.
template <class F>
void emit(const Common& c, const std::string& suffix, F&& write)
{
    if (c.out.empty()) {
        write(std::cout);
        return;
    }
    const std::string path = c.out + "." + suffix;
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    write(os);
    spdlog::info("wrote {}", path);
}

void emit_json(const Common& c, const std::string& suffix, const nlohmann::json& j)
{
    emit(c, suffix, [&](std::ostream& os) { os << dump(j); });
}

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("mfe");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("MF_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else
        spdlog::set_level(spdlog::level::err);
}

nlohmann::json solution_json(const Grid& g, const Solution& s, const SolveReport& rep)
{
    const Density d = delta_of(g, s.u);
    nlohmann::json j{{"domain", g.domain().describe()},
                     {"grid", {{"nx", g.nx()}, {"ny", g.ny()}, {"unknowns", g.size()}}},
                     {"lambda", s.lambda},
                     {"mu", s.mu},
                     {"sup_norm", s.sup_norm},
                     {"residual", s.residual_norm},
                     {"converged", s.converged},
                     {"status", to_string(rep.status)},
                     {"iterations", rep.iterations},
                     {"message", rep.message}};
    if (s.converged) {
        j["energy"] = s.lambda > 0.0 ? energy(g, s.u, s.lambda) : energy_of_density(g, d);
        j["entropy"] = entropy(g, d);
        j["F_lambda"] = F_lambda(g, s.u, s.lambda);
    }
    return j;
}

}  // namespace

int main(int argc, char** argv)
{
    configure_logging();
    CLI::App app{"Mean field equation solver on thin ellipses and convex domains"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--newton-tol", c.newton_tol, "Newton tolerance (scaled by 1 + parameter)")
        ->check(CLI::PositiveNumber);
    app.add_option("--eig-tol", c.eig_tol, "Eigenvalue tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", c.seed, "Seed for randomized starts")->capture_default_str();

    // thresholds
    auto* thr = app.add_subcommand("thresholds", "Closed-form thresholds for omega_alpha with sandwich constant c");
    double thr_alpha = 0.05, thr_c = 1.0;
    thr->add_option("--alpha", thr_alpha)->required();
    thr->add_option("--c", thr_c)->capture_default_str();
    add_out(thr, c);

    // solve
    auto* solve = app.add_subcommand("solve", "Solve P(lambda) or Q(mu) by Newton");
    add_domain(solve, c);
    add_out(solve, c);
    std::optional<double> s_lambda, s_mu;
    std::string s_init = "zero";
    auto* ol = solve->add_option("--lambda", s_lambda);
    auto* om = solve->add_option("--mu", s_mu);
    ol->excludes(om);
    solve->add_option("--init", s_init, "zero | phi0 | FILE")->capture_default_str();

    // branch
    auto* branch = app.add_subcommand("branch", "Continue the branch from lambda = 0");
    add_domain(branch, c);
    add_out(branch, c);
    std::optional<double> b_to, b_arc;
    std::string b_control = "lambda";
    double b_step = 1.0, b_max_step = 4.0, b_max_sup = 1e300;
    bool b_no_spectrum = false;
    auto* bt = branch->add_option("--to-lambda", b_to);
    auto* ba = branch->add_option("--arclength", b_arc);
    bt->excludes(ba);
    branch->add_option("--control", b_control, "lambda | mu")->check(CLI::IsMember({"lambda", "mu"}));
    branch->add_option("--step", b_step)->check(CLI::PositiveNumber);
    branch->add_option("--max-step", b_max_step)->check(CLI::PositiveNumber);
    branch->add_option("--max-sup", b_max_sup)->check(CLI::PositiveNumber);
    branch->add_flag("--no-spectrum", b_no_spectrum);

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "tau1, tau0 and nu0 of a stored solution");
    add_domain(spec, c);
    add_out(spec, c);
    std::string sp_file;
    double sp_lambda = 0.0;
    std::optional<double> sp_mu;
    spec->add_option("--solution", sp_file, "x,y,value field")->required();
    spec->add_option("--lambda", sp_lambda)->required();
    spec->add_option("--mu", sp_mu);

    // entropy
    auto* ent = app.add_subcommand("entropy", "Entropy curve S(E) and its curvature on omega_alpha");
    add_out(ent, c);
    double e_alpha = 0.02, e_lmax = 8.0 * pi, e_step = 0.5;
    int e_ny = 33;
    ent->add_option("--alpha", e_alpha)->required();
    ent->add_option("--lambda-max", e_lmax, "Branch end and energy-window parameter (>= 8 pi)")->capture_default_str();
    ent->add_option("--step", e_step)->check(CLI::PositiveNumber);
    ent->add_option("--ny", e_ny, "Grid rows; columns are 4 (ny - 1) + 1")->check(CLI::Range(8, 1025));

    // second
    auto* sec = app.add_subcommand("second", "Second (mountain-pass) solution above 8 pi");
    add_domain(sec, c);
    add_out(sec, c);
    double sec_lambda = 9.0 * pi, sec_d = 0.4;
    sec->add_option("--lambda", sec_lambda)->required();
    sec->add_option("--d", sec_d, "Bubble plateau radius")->capture_default_str();

    // probe
    auto* probe = app.add_subcommand("probe", "Multistart deflated search for distinct solutions");
    add_domain(probe, c);
    add_out(probe, c);
    double pr_lambda = 4.0 * pi, pr_cap = 1e300;
    int pr_starts = 20;
    probe->add_option("--lambda", pr_lambda)->required();
    probe->add_option("--energy-cap", pr_cap);
    probe->add_option("--starts", pr_starts)->check(CLI::PositiveNumber);

    // john
    auto* john = app.add_subcommand("john", "John ellipse and sandwich of a convex polygon");
    add_out(john, c);
    std::string j_file;
    john->add_option("--polygon", j_file, "One 'x y' pair per line")->required();

    // verify
    auto* ver = app.add_subcommand("verify", "Run the acceptance criteria");
    add_out(ver, c);
    bool v_list = false;
    std::vector<int> v_only;
    ver->add_flag("--list", v_list, "Print criterion ids without running");
    ver->add_option("--only", v_only, "Criterion ids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*thr) {
            emit_json(c, "thresholds.json", to_json(threshold_report(thr_alpha, thr_c)));
            return 0;
        }
        if (*solve) {
            if (!s_lambda && !s_mu) throw CLI::RequiredError("--lambda or --mu");
            const Grid g = build_grid(c);
            GridField init;
            if (s_init == "zero") {
                init = GridField::Zero(g.size());
            } else if (s_init == "phi0") {
                const double a = domain_alpha(g.domain());
                if (!(a > 0.0)) throw IoError("--init phi0 needs an ellipse domain");
                const double l = s_lambda ? *s_lambda : *s_mu * g.domain().area();
                init = a * g.sample(phi0(l, a));
            } else {
                init = read_field_csv(s_init, g);
            }
            const NewtonResult r = s_lambda ? newton_P(g, *s_lambda, init, newton_options(c))
                                            : newton_Q(g, *s_mu, init, newton_options(c));
            nlohmann::json j = solution_json(g, r.solution, r.report);
            const Ellipse* e = g.domain().as_ellipse();
            if (s_mu && e && e->a == e->b && *s_mu > 0.0 && *s_mu <= 2.0) {
                // Liouville family on a disk of radius R: mu R^2 plays the unit-disk parameter
                const double R = e->a;
                const LiouvilleDisk d = liouville_disk(disk_gamma_of_mu(*s_mu * R * R));
                const double u0 = interpolate(g, r.solution.u, e->center);
                const double exact = d.u(Vec2::Zero());
                j["oracle"] = {{"u0", u0}, {"u0_exact", exact}, {"u0_error", std::abs(u0 - exact)},
                               {"lambda_exact", d.lambda}};
            }
            if (!c.out.empty()) emit(c, "field.csv", [&](std::ostream& os) { write_field_csv(os, g, r.solution.u); });
            emit_json(c, "report.json", j);
            return r.solution.converged ? 0 : 1;
        }
        if (*branch) {
            const Grid g = build_grid(c);
            BranchOptions opt;
            opt.control = b_control == "mu" ? Control::natural_mu : Control::natural_lambda;
            opt.target_lambda = b_to ? *b_to : (b_arc ? 1e300 : 8.0 * pi);
            if (b_arc) opt.max_arclength = *b_arc;
            opt.max_sup = b_max_sup;
            opt.step.initial = b_step;
            opt.step.max = std::max(b_step, b_max_step);
            opt.spectrum = !b_no_spectrum;
            opt.newton = newton_options(c);
            const Branch br = continue_branch(g, opt);
            spdlog::info("{} points, {} fold(s){}", br.points.size(), br.folds.size(),
                         br.truncated ? ", truncated: " + br.diagnostic : "");
            emit(c, "branch.csv", [&](std::ostream& os) { write_branch_csv(os, br); });
            return br.truncated ? 1 : 0;
        }
        if (*spec) {
            const Grid g = build_grid(c);
            const GridField u = read_field_csv(sp_file, g);
            const double mu = sp_mu ? *sp_mu : sp_lambda / exp_integral(g, u);
            const nlohmann::json j{{"tau1", tau1(g, u, sp_lambda, c.eig_tol).value},
                                   {"tau0", tau0(g, u, sp_lambda, c.eig_tol).value},
                                   {"nu0", nu0(g, u, mu, c.eig_tol).value}};
            emit_json(c, "spectrum.json", j);
            return 0;
        }
        if (*ent) {
            const Grid g(Domain::canonical_ellipse(e_alpha), 4 * (e_ny - 1) + 1, e_ny);
            BranchOptions opt;
            opt.target_lambda = e_lmax;
            opt.step.initial = e_step;
            opt.step.max = e_step;
            opt.spectrum = false;
            opt.newton = newton_options(c);
            const Branch br = continue_branch(g, opt);
            const EntropyCurve curve = energy_entropy_along(g, br, e_lmax);
            const CurvatureResult k = entropy_curvature(curve);
            spdlog::info("d2S/dE2 = {} (leading term {})", k.value, k.leading);
            emit(c, "entropy.csv", [&](std::ostream& os) { write_entropy_csv(os, curve, k); });
            return 0;
        }
        if (*sec) {
            const Grid g = build_grid(c);
            const double a = domain_alpha(g.domain());
            const GridField init = a > 0.0 && a < 1.0 ? GridField(a * g.sample(phi0(sec_lambda, a)))
                                                      : GridField(GridField::Zero(g.size()));
            const NewtonResult m = newton_P(g, sec_lambda, init, newton_options(c));
            if (!m.solution.converged) throw SolverError("minimal solution did not converge: " + m.report.message);
            SecondSolutionOptions so;
            so.d = sec_d;
            so.newton = newton_options(c);
            const SecondSolutionResult s = second_solution(g, sec_lambda, m.solution, so);
            for (const auto& line : s.log) spdlog::info("{}", line);
            nlohmann::json j{{"lambda", sec_lambda},
                             {"found", s.solution.has_value()},
                             {"F_min", s.F_min},
                             {"E_min", s.E_min},
                             {"sup_min", m.solution.sup_norm},
                             {"log", s.log}};
            if (s.solution) {
                j["F_second"] = s.F_second;
                j["E_second"] = s.E_second;
                j["sup_second"] = s.solution->sup_norm;
                if (!c.out.empty())
                    emit(c, "second.field.csv", [&](std::ostream& os) { write_field_csv(os, g, s.solution->u); });
            }
            emit_json(c, "second.json", j);
            return 0;
        }
        if (*probe) {
            const Grid g = build_grid(c);
            const ProbeResult p = uniqueness_probe(g, pr_lambda, pr_cap, pr_starts, c.seed);
            nlohmann::json sols = nlohmann::json::array();
            for (std::size_t k = 0; k < p.solutions.size(); ++k)
                sols.push_back({{"sup_norm", p.solutions[k].sup_norm}, {"energy", p.energies[k]}});
            emit_json(c, "probe.json",
                      {{"lambda", pr_lambda},
                       {"energy_cap", pr_cap},
                       {"starts", p.starts},
                       {"converged_starts", p.converged_starts},
                       {"seed", p.seed},
                       {"count", p.solutions.size()},
                       {"solutions", sols}});
            return 0;
        }
        if (*john) {
            const ConvexPolygon poly = ConvexPolygon::from_file(j_file);
            nlohmann::json j = to_json(john_ellipse(poly), poly);
            const Sandwich s = sandwich_of(poly);
            j["lassak"] = lassak_check(poly);
            j["alpha"] = s.spec.alpha;
            j["c"] = s.spec.c;
            emit_json(c, "john.json", j);
            return 0;
        }
        if (*ver) {
            AcceptanceConfig cfg;
            cfg.newton_tol = c.newton_tol;
            cfg.eig_tol = c.eig_tol;
            cfg.seed = c.seed;
            if (v_list) {
                for (const auto& k : acceptance_criteria()) std::cout << k.id << ' ' << k.name << '\n';
                return 0;
            }
            nlohmann::json all = nlohmann::json::array();
            bool ok = true;
            for (const auto& k : acceptance_criteria()) {
                if (!v_only.empty() && std::find(v_only.begin(), v_only.end(), k.id) == v_only.end()) continue;
                spdlog::info("criterion {}: {}", k.id, k.name);
                const CriterionResult r = run_criterion(k, cfg);
                ok = ok && r.passed;
                all.push_back(to_json(r));
            }
            emit_json(c, "verify.json", {{"passed", ok}, {"criteria", all}});
            return ok ? 0 : 1;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

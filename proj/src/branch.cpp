#include "mfe/branch.hpp"

#include "mfe/closedform.hpp"
#include "mfe/linalg.hpp"
#include "mfe/spectrum.hpp"

#include <math.h>  // pchip.hpp calls isnan unqualified

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace mfe {

using std::numbers::pi;

namespace {

bool nonlocal(Control c) { return c == Control::natural_lambda || c == Control::arclength_lambda; }
bool natural(Control c) { return c == Control::natural_lambda || c == Control::natural_mu; }

/// F(u, p) and its derivative in p for either problem.
struct System {
    const Grid& grid;
    bool P;

    GridField F(const GridField& u, double p) const
    {
        const GridField e = u.array().exp().matrix();
        if (P) return grid.laplacian() * u - (p / exp_integral(grid, u)) * e;
        return grid.laplacian() * u - p * e;
    }

    GridField Fp(const GridField& u) const
    {
        if (P) return -delta_of(grid, u).delta;
        return -u.array().exp().matrix();
    }

    NewtonResult newton(double p, const GridField& init, const NewtonOptions& opt) const
    {
        return P ? newton_P(grid, p, init, opt) : newton_Q(grid, p, init, opt);
    }
};

/// Factorized Jacobian d_u F at a point; P carries the rank-one correction.
class Linearization {
public:
    Linearization(const System& sys, const GridField& u, double p) : P_(sys.P)
    {
        const Grid& g = sys.grid;
        if (P_) {
            const Density d = delta_of(g, u);
            solver_.compute(add_diagonal(g.laplacian(), -p * d.delta));
            c_ = p * d.delta;
            b_ = g.weights().cwiseProduct(d.delta);
        } else {
            solver_.compute(add_diagonal(g.laplacian(), -p * u.array().exp().matrix()));
        }
    }

    /// Throws on a near-singular rank-one update.
    GridField solve(const GridField& r) const
    {
        if (!P_) return solver_.solve(r);
        RankOneSolve s = solve_rank_one(solver_, c_, b_, r);
        if (std::abs(s.denominator) < 1e-14) throw LinearSolveError("singular bordered system");
        return std::move(s.x);
    }

private:
    bool P_;
    LinearSolver solver_;
    GridField c_, b_;
};

struct State {
    GridField u;
    double p = 0.0;
};

struct Metric {
    const GridField& w;
    double area;
    double dot(const GridField& a, const GridField& b) const { return a.dot(w.cwiseProduct(b)) / area; }
    double norm(const GridField& du, double dp) const { return std::sqrt(dot(du, du) + dp * dp); }
};

struct Tangent {
    GridField u;
    double p = 1.0;
};

/// Solves [J Fp; <t0,.> t0p] t = [0; 1] and normalizes.
Tangent bordered_tangent(const System& sys, const Metric& m, const State& s, const Tangent& t0)
{
    Linearization lin(sys, s.u, s.p);
    const GridField b = lin.solve(sys.Fp(s.u));
    Tangent t;
    t.p = 1.0 / (t0.p - m.dot(t0.u, b));
    t.u = -t.p * b;
    const double n = m.norm(t.u, t.p);
    t.u /= n;
    t.p /= n;
    return t;
}

struct Corrected {
    bool ok = false;
    State state;
    int iterations = 0;
};

/// Newton on F = 0, <t, u - u0> + tp (p - p0) = 0 by block elimination.
Corrected arclength_corrector(const System& sys, const Metric& m, const State& pred, const Tangent& t,
                              const NewtonOptions& opt)
{
    Corrected out;
    State s = pred;
    auto constraint = [&](const State& x) { return m.dot(t.u, x.u - pred.u) + t.p * (x.p - pred.p); };
    auto merit = [&](const State& x, const GridField& F) {
        return std::max(F.lpNorm<Eigen::Infinity>(), std::abs(constraint(x)));
    };
    GridField F = sys.F(s.u, s.p);
    double r = merit(s, F);
    for (int it = 0; it < opt.max_iter; ++it) {
        if (!std::isfinite(r)) return out;
        if (F.lpNorm<Eigen::Infinity>() <= opt.tol * (1.0 + std::abs(s.p)) && std::abs(constraint(s)) <= 1e-10) {
            out.ok = true;
            out.state = std::move(s);
            out.iterations = it;
            return out;
        }
        GridField a, b;
        try {
            Linearization lin(sys, s.u, s.p);
            a = lin.solve(-F);
            b = lin.solve(sys.Fp(s.u));
        } catch (const LinearSolveError&) {
            return out;
        }
        const double N = constraint(s);
        const double den = t.p - m.dot(t.u, b);
        if (std::abs(den) < 1e-14) return out;
        const double dp = (-N - m.dot(t.u, a)) / den;
        const GridField du = a - dp * b;
        double step = 1.0;
        bool accepted = false;
        while (step >= opt.min_step) {
            State trial{s.u + step * du, s.p + step * dp};
            const GridField Ft = sys.F(trial.u, trial.p);
            const double rt = merit(trial, Ft);
            if (std::isfinite(rt) && rt < r) {
                s = std::move(trial);
                F = Ft;
                r = rt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return out;
    }
    return out;
}

double vertex_of_parabola(double s0, double p0, double s1, double p1, double s2, double p2)
{
    // divided differences; the extreme value of the interpolating quadratic
    const double d01 = (p1 - p0) / (s1 - s0);
    const double d12 = (p2 - p1) / (s2 - s1);
    const double c2 = (d12 - d01) / (s2 - s0);
    if (c2 == 0.0) return p1;
    const double c1 = d01 - c2 * (s0 + s1);
    const double sv = -c1 / (2.0 * c2);
    if (sv < s0 || sv > s2) return p1;
    return p0 + d01 * (sv - s0) + c2 * (sv - s0) * (sv - s1);
}

}  // namespace

double domain_alpha(const Domain& d)
{
    const Ellipse* e = d.as_ellipse();
    if (!e) return std::numeric_limits<double>::quiet_NaN();
    return std::min(e->a, e->b) / std::max(e->a, e->b);
}

BranchPoint make_point(const Grid& grid, const GridField& u, double lambda, double mu, bool spectrum)
{
    BranchPoint pt;
    pt.lambda = lambda;
    pt.mu = mu;
    pt.u = u;
    pt.sup_norm = u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0;
    const Density d = delta_of(grid, u);
    pt.energy = lambda > 0.0 ? energy(grid, u, lambda) : energy_of_density(grid, d);
    pt.entropy = entropy(grid, d);
    pt.F_lambda = F_lambda(grid, u, lambda);
    if (spectrum) {
        try {
            pt.tau1 = tau1(grid, u, lambda).value;
        } catch (const SpectrumError&) {
        }
        try {
            pt.nu0 = nu0(grid, u, mu).value;
        } catch (const SpectrumError&) {
        }
    }
    return pt;
}

Branch continue_branch(const Grid& grid, const BranchOptions& opt, const std::optional<Solution>& warm)
{
    Branch br;
    br.alpha = domain_alpha(grid.domain());
    br.control = opt.control;
    const System sys{grid, nonlocal(opt.control)};
    const Metric metric{grid.weights(), grid.domain().area()};
    auto param = [&](const Solution& s) { return sys.P ? s.lambda : s.mu; };

    State cur;
    if (warm) {
        cur = {warm->u, param(*warm)};
    } else {
        cur = {GridField::Zero(grid.size()), 0.0};
    }
    auto push = [&](const State& st, double ds) {
        const double I = exp_integral(grid, st.u);
        const double lambda = sys.P ? st.p : st.p * I;
        const double mu = sys.P ? st.p / I : st.p;
        BranchPoint pt = make_point(grid, st.u, lambda, mu, opt.spectrum);
        pt.s = br.points.empty() ? 0.0 : br.points.back().s + ds;
        br.points.push_back(std::move(pt));
        br.steps.push_back(ds);
    };
    push(cur, 0.0);

    Tangent tangent{GridField::Zero(grid.size()), 1.0};
    try {
        tangent = bordered_tangent(sys, metric, cur, tangent);
    } catch (const LinearSolveError& e) {
        br.truncated = true;
        br.diagnostic = std::string("tangent at the start point: ") + e.what();
        return br;
    }

    bool arclength = !natural(opt.control);
    double dp = opt.step.initial;
    double ds = opt.step.initial;
    const double min_step = opt.step.min_ratio * opt.step.initial;
    std::optional<State> prev;
    double prev_dp_sign = 0.0;

    auto done = [&]() {
        const BranchPoint& b = br.points.back();
        if (b.lambda >= opt.target_lambda * (1.0 - 1e-14)) return true;
        if (b.s >= opt.max_arclength || b.sup_norm >= opt.max_sup) return true;
        return false;
    };

    while (static_cast<int>(br.points.size()) < opt.max_points && !done()) {
        State next;
        int iterations = 0;
        bool ok = false;
        if (!arclength) {
            double target = cur.p + dp;
            if (sys.P && target > opt.target_lambda) target = opt.target_lambda;
            GridField pred;
            if (prev && cur.p != prev->p)
                pred = cur.u + (cur.u - prev->u) * ((target - cur.p) / (cur.p - prev->p));
            else
                pred = cur.u + tangent.u * ((target - cur.p) / tangent.p);
            try {
                NewtonResult r = sys.newton(target, pred, opt.newton);
                ok = r.solution.converged;
                iterations = r.report.iterations;
                next = {std::move(r.solution.u), target};
            } catch (const SolverError&) {
                ok = false;
            }
            if (!ok) {
                // natural parametrization failed: continue by arclength from here
                arclength = true;
                br.switched_to_arclength = true;
                ds = prev ? metric.norm(cur.u - prev->u, cur.p - prev->p) : dp;
                continue;
            }
        } else {
            Tangent t = tangent;
            if (prev) {
                t.u = cur.u - prev->u;
                t.p = cur.p - prev->p;
                const double n = metric.norm(t.u, t.p);
                t.u /= n;
                t.p /= n;
            }
            const State pred{cur.u + ds * t.u, cur.p + ds * t.p};
            Corrected c = arclength_corrector(sys, metric, pred, t, opt.newton);
            if (!c.ok || c.state.p < 0.0) {
                ds *= 0.5;
                if (ds < min_step) {
                    br.truncated = true;
                    br.diagnostic = "arclength step fell below the minimum";
                    break;
                }
                continue;
            }
            ok = true;
            iterations = c.iterations;
            next = std::move(c.state);
        }

        const double step_len = metric.norm(next.u - cur.u, next.p - cur.p);
        const double sign = next.p > cur.p ? 1.0 : (next.p < cur.p ? -1.0 : 0.0);
        const bool fold = prev_dp_sign != 0.0 && sign != 0.0 && sign != prev_dp_sign;
        if (sign != 0.0) prev_dp_sign = sign;
        prev = std::move(cur);
        cur = std::move(next);
        push(cur, step_len);
        if (fold) {
            const auto n = br.points.size();
            BranchPoint& last = br.points.back();
            last.fold = true;
            const BranchPoint& mid = br.points[n - 2];
            const BranchPoint& first = br.points[n - 3];
            auto pv = [&](const BranchPoint& b) { return sys.P ? b.lambda : b.mu; };
            Fold f;
            f.index = static_cast<int>(n - 1);
            f.s_lo = first.s;
            f.s_hi = last.s;
            f.param_lo = pv(first);
            f.param_hi = pv(last);
            f.param_max = vertex_of_parabola(first.s, pv(first), mid.s, pv(mid), last.s, pv(last));
            br.folds.push_back(f);
        }

        if (arclength) {
            if (iterations <= opt.step.fast_iterations) ds = std::min(ds * opt.step.growth, opt.step.max);
        } else {
            const double slope = std::abs(cur.p - prev->p) / step_len;
            if (slope < opt.step.steep_slope) {
                arclength = true;
                br.switched_to_arclength = true;
                ds = step_len;
            } else if (iterations <= opt.step.fast_iterations) {
                dp = std::min(dp * opt.step.growth, opt.step.max);
            }
        }
    }
    if (static_cast<int>(br.points.size()) >= opt.max_points && !done()) {
        br.truncated = true;
        br.diagnostic = "point budget exhausted";
    }
    return br;
}

// ---------------------------------------------------------------- expansion

ExpansionReport verify_expansion(const Grid& grid, double lambda, const GridField& u)
{
    const Ellipse* e = grid.domain().as_ellipse();
    if (!e || std::abs(e->b - 1.0) > 1e-12 || e->a < 1.0 || e->center.norm() > 1e-12 || e->angle != 0.0)
        throw BranchError("verify_expansion: needs the canonical ellipse {alpha^2 x^2 + y^2 <= 1}");
    if (!(lambda > 0.0)) throw BranchError("verify_expansion: lambda must be positive");
    ExpansionReport r;
    r.alpha = 1.0 / e->a;
    r.lambda = lambda;
    const double a = r.alpha;
    r.mu0_solver = lambda / (a * exp_integral(grid, u));
    r.mu0_series = mu0_series(lambda, a).mu0;
    r.mu0_residual = std::abs(r.mu0_solver - r.mu0_series);

    const GridField psi = grid.sample(psi0(a));
    LinearSolver solver;
    solver.compute(grid.laplacian());
    r.phi1 = solver.solve(r.mu0_solver * r.mu0_solver * psi);
    const GridField rem = u - a * r.mu0_solver * psi - a * a * r.phi1;
    r.remainder = rem.lpNorm<Eigen::Infinity>();
    r.center_ratio = interpolate(grid, u, Vec2::Zero()) / a;
    r.center_target = r.mu0_series / (2.0 * (1.0 + a * a));
    r.int_alpha2_phi1 = a * a * quadrature(grid, r.phi1);
    r.int_alpha2_phi1_exact = integral_alpha2_phi1(r.mu0_solver, a);
    return r;
}

double expansion_order(const ExpansionReport& coarse_alpha, const ExpansionReport& half_alpha)
{
    return std::log(coarse_alpha.remainder / half_alpha.remainder) / std::log(coarse_alpha.alpha / half_alpha.alpha);
}

// ---------------------------------------------------------------- entropy

EntropyCurve energy_entropy_along(const Grid& grid, const Branch& branch, double lambda_bar)
{
    const double a = branch.alpha;
    if (!(a > 0.0)) throw BranchError("energy_entropy_along: branch is not on an ellipse");
    if (!(lambda_bar >= 8.0 * pi)) throw BranchError("energy_entropy_along: lambda_bar must be at least 8 pi");
    const double lo = a / (8.0 * pi);
    const double hi = lo + a * a * lambda_bar / (50.0 * pi * pi);
    EntropyCurve c;
    c.alpha = a;
    for (const auto& p : branch.points) {
        const double logI = std::log(exp_integral(grid, p.u));
        const double identity = -2.0 * p.lambda * p.energy + logI;
        if (std::abs(identity - p.entropy) > 1e-8 * (1.0 + std::abs(p.entropy)))
            throw BranchError("energy_entropy_along: entropy identity violated at lambda = " +
                              std::to_string(p.lambda));
        if (p.energy < lo || p.energy > hi) continue;
        c.E.push_back(p.energy);
        c.S.push_back(p.entropy);
        c.lambda.push_back(p.lambda);
    }
    return c;
}

CurvatureResult entropy_curvature(const EntropyCurve& curve, int samples)
{
    if (curve.E.size() < 7) throw BranchError("entropy_curvature: fewer than 7 points in the energy window");
    if (samples < 3 || samples % 2 == 0) throw BranchError("entropy_curvature: samples must be odd and >= 3");
    std::vector<std::size_t> order(curve.E.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return curve.E[i] < curve.E[j]; });
    std::vector<double> E, S;
    for (auto i : order) {
        if (!E.empty() && curve.E[i] <= E.back()) throw BranchError("entropy_curvature: energies are not distinct");
        E.push_back(curve.E[i]);
        S.push_back(curve.S[i]);
    }
    const double e0 = E.front(), e1 = E.back();
    boost::math::interpolators::pchip<std::vector<double>> spline(std::move(E), std::move(S));

    CurvatureResult r;
    const double H = (e1 - e0) / (samples - 1);
    for (int k = 0; k < samples; ++k) {
        const double e = k + 1 == samples ? e1 : e0 + k * H;
        r.E.push_back(e);
        r.S.push_back(spline(e));
    }
    r.d2S.assign(samples, std::numeric_limits<double>::quiet_NaN());
    for (int k = 1; k + 1 < samples; ++k) r.d2S[k] = (r.S[k + 1] - 2.0 * r.S[k] + r.S[k - 1]) / (H * H);
    r.value = r.d2S[samples / 2];
    r.leading = entropy_curvature_leading(curve.alpha);
    return r;
}

// ---------------------------------------------------------------- multiplicity

double chi_d(double t, double d)
{
    if (t <= d) return t;
    if (t >= 2.0 * d) return 2.0 * d;
    const double s = (t - d) / d;
    return d + d * (s + s * s - s * s * s);
}

namespace {

/// Every point of the circle of radius r around p lies in e.
bool disk_inside(const Ellipse& e, const Vec2& p, double r)
{
    constexpr int n = 72;
    if (!e.contains(p)) return false;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * pi * k / n;
        if (!e.contains(p + r * Vec2(std::cos(t), std::sin(t)))) return false;
    }
    return true;
}

bool admissible(const Ellipse& inner, double d, const std::vector<Vec2>& peaks)
{
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (!disk_inside(inner, peaks[i], 2.0 * d)) return false;
        for (std::size_t j = 0; j < i; ++j)
            if ((peaks[i] - peaks[j]).norm() <= 4.0 * d) return false;
    }
    return true;
}

const Ellipse& ellipse_of(const Grid& grid, const std::optional<Ellipse>& inner, const char* who)
{
    if (inner) return *inner;
    const Ellipse* e = grid.domain().as_ellipse();
    if (!e) throw BranchError(std::string(who) + ": polygon domains need an explicit inner ellipse");
    return *e;
}

double sup_distance(const GridField& a, const GridField& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

GridField mountain_pass_init(const Grid& grid, const Ellipse& inner, double d, double mu_peak,
                             const std::vector<Vec2>& peaks)
{
    if (!(d > 0.0) || !(mu_peak > 0.0) || peaks.empty())
        throw BranchError("mountain_pass_init: need d > 0, mu_peak > 0 and at least one peak");
    if (!admissible(inner, d, peaks))
        throw BranchError("mountain_pass_init: peaks must sit 2d inside the inner ellipse and 4d apart");
    const double m2 = mu_peak * mu_peak;
    const double k = static_cast<double>(peaks.size());
    const double floor_term = 8.0 * m2 / std::pow(1.0 + 4.0 * d * d * m2, 2);
    return grid.sample([&](const Vec2& y) {
        if (!inner.contains(y)) return 0.0;
        double sum = 0.0;
        for (const auto& x : peaks) {
            const double c = chi_d((y - x).norm(), d);
            sum += 8.0 * m2 / std::pow(1.0 + m2 * c * c, 2) / k;
        }
        return std::log(sum) - std::log(floor_term);
    });
}

SecondSolutionResult second_solution(const Grid& grid, double lambda, const Solution& u_min,
                                     const SecondSolutionOptions& opt)
{
    const Ellipse& inner = ellipse_of(grid, opt.inner, "second_solution");
    SecondSolutionResult out;
    out.F_min = F_lambda(grid, u_min.u, lambda);
    out.E_min = energy(grid, u_min.u, lambda);
    const double sup_min = u_min.u.lpNorm<Eigen::Infinity>();
    NewtonOptions nopt = opt.newton;
    nopt.deflate.push_back(u_min.u);

    for (double mp : opt.mu_ladder) {
        const GridField init = mountain_pass_init(grid, inner, opt.d, mp, opt.peaks);
        NewtonResult r = newton_P(grid, lambda, init, nopt);
        const std::string tag = "mu_peak " + std::to_string(mp) + ": ";
        if (!r.solution.converged) {
            out.log.push_back(tag + to_string(r.report.status) + " (" + r.report.message + ")");
            continue;
        }
        const Solution& v = r.solution;
        const double F = F_lambda(grid, v.u, lambda);
        const bool distinct = sup_distance(v.u, u_min.u) > 1e-4;
        if (distinct && F > out.F_min && v.sup_norm > sup_min) {
            out.F_second = F;
            out.E_second = energy(grid, v.u, lambda);
            out.solution = v;
            out.log.push_back(tag + "accepted, F_lambda " + std::to_string(F) + ", sup " + std::to_string(v.sup_norm));
            return out;
        }
        out.log.push_back(tag + "converged to a rejected candidate, F_lambda " + std::to_string(F) + ", sup " +
                          std::to_string(v.sup_norm));
        nopt.deflate.push_back(v.u);
    }
    out.log.push_back("no second solution found");
    return out;
}

ProbeResult uniqueness_probe(const Grid& grid, double lambda, double energy_cap, int n_starts, std::uint64_t seed,
                             double distinct)
{
    ProbeResult out;
    out.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Box box = grid.box();
    const Ellipse* ell = grid.domain().as_ellipse();
    const double alpha = domain_alpha(grid.domain());
    const bool canonical = ell && std::abs(ell->b - 1.0) < 1e-12 && ell->a >= 1.0 && ell->center.norm() < 1e-12 &&
                           ell->angle == 0.0;

    std::vector<GridField> found;
    auto random_bubble = [&]() -> std::optional<GridField> {
        const double semi = std::min(ell->a, ell->b);
        for (int tries = 0; tries < 200; ++tries) {
            const double d = semi * (0.1 + 0.3 * U(rng));
            const Vec2 p(box.x0 + U(rng) * box.width(), box.y0 + U(rng) * box.height());
            if (!admissible(*ell, d, {p})) continue;
            const double mp = std::array{3.0, 10.0, 30.0}[static_cast<std::size_t>(U(rng) * 3.0) % 3];
            return mountain_pass_init(grid, *ell, d, mp, {p});
        }
        return std::nullopt;
    };
    auto random_smooth = [&]() -> GridField {
        const double A = 0.5 + 2.5 * U(rng);
        const double k1 = pi * (1 + static_cast<int>(U(rng) * 3)), k2 = pi * (1 + static_cast<int>(U(rng) * 3));
        const double f1 = 2.0 * pi * U(rng), f2 = 2.0 * pi * U(rng);
        return grid.sample([&](const Vec2& p) {
            const double xi = (p.x() - box.x0) / box.width(), eta = (p.y() - box.y0) / box.height();
            const double bump = 16.0 * xi * (1.0 - xi) * eta * (1.0 - eta);
            return A * bump * (1.0 + 0.5 * std::sin(k1 * xi + f1) * std::sin(k2 * eta + f2));
        });
    };

    for (int s = 0; s < n_starts; ++s) {
        GridField init;
        if (s == 0) {
            init = GridField::Zero(grid.size());
        } else if (s == 1 && canonical) {
            init = alpha * grid.sample(phi0(lambda, alpha));
        } else if (ell && s % 2 == 0) {
            auto b = random_bubble();
            init = b ? *b : random_smooth();
        } else {
            init = random_smooth();
        }
        ++out.starts;
        NewtonOptions nopt;
        nopt.deflate = found;
        NewtonResult r;
        try {
            r = newton_P(grid, lambda, init, nopt);
        } catch (const SolverError&) {
            continue;
        }
        if (!r.solution.converged) continue;
        ++out.converged_starts;
        bool is_new = true;
        for (const auto& f : found)
            if (sup_distance(f, r.solution.u) <= distinct) is_new = false;
        if (!is_new) continue;
        found.push_back(r.solution.u);
        const double E = lambda > 0.0 ? energy(grid, r.solution.u, lambda)
                                      : energy_of_density(grid, delta_of(grid, r.solution.u));
        if (E <= energy_cap) {
            out.solutions.push_back(r.solution);
            out.energies.push_back(E);
        }
    }
    return out;
}

}  // namespace mfe

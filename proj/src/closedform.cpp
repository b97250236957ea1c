#include "mfe/closedform.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace mfe {

using std::numbers::pi;

namespace {

void require_alpha(double alpha, const char* who)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError(std::string(who) + ": alpha must lie in (0,1]");
}

void require_mu(double mu, double alpha, const char* who)
{
    if (!(mu >= 0.0)) throw DomainError(std::string(who) + ": mu must be nonnegative");
    if (mu > mu_bar(alpha) * (1.0 + 1e-14))
        throw DomainError(std::string(who) + ": mu exceeds mu_bar(alpha), no member of the family");
}

/// Bisection for a decreasing function f with f(lo) > 0 > f(hi).
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    if (!(f(lo) > 0.0 && f(hi) < 0.0)) throw DomainError("bisection: root not bracketed");
    auto done = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto r = boost::math::tools::bisect(f, lo, hi, done);
    return 0.5 * (r.first + r.second);
}

double log_ratio_profile(double g2, double alpha, double scale, const Vec2& p)
{
    const double rho = alpha * alpha * p.x() * p.x() + p.y() * p.y();
    return 2.0 * std::log((1.0 + g2) / (1.0 + g2 * rho / scale));
}

}  // namespace

double mu_bar(double alpha)
{
    const double s = 1.0 + alpha * alpha;
    return 0.5 * s * s;
}

double gamma_bar_sq(double alpha) { return (1.0 + alpha * alpha) / (3.0 - alpha * alpha); }

double gamma_bar_sq_substituted(double alpha)
{
    const double a2 = alpha * alpha;
    return (1.0 + a2) * (3.0 - a2) / (8.0 * (1.0 - a2) + (1.0 + a2) * (1.0 + a2));
}

double gamma_under_sq(double alpha, double c)
{
    const double a2 = alpha * alpha;
    return (1.0 + a2) * (c - 4.0 + c * a2 + 4.0 * std::sqrt(1.0 - c * a2)) /
           (8.0 * (1.0 - a2) - c * (1.0 + a2) * (1.0 + a2));
}

double g_plus(double gamma, double alpha)
{
    const double g2 = gamma * gamma;
    const double a2 = alpha * alpha;
    return 4.0 * g2 / ((1.0 + g2) * (1.0 + g2)) * (1.0 + a2 + g2 * (a2 - 1.0));
}

double g_minus(double gamma, double alpha, double c)
{
    const double g2 = gamma * gamma;
    const double a2 = alpha * alpha;
    return 4.0 * g2 / (c * (1.0 + g2) * (1.0 + g2)) * (1.0 + a2 + g2 * (1.0 - a2));
}

double V_plus(double gamma, double alpha, const Vec2& p)
{
    const double g2 = gamma * gamma;
    const double a2 = alpha * alpha;
    return 4.0 * g2 / ((1.0 + g2) * (1.0 + g2)) *
           (1.0 + a2 + g2 * (1.0 - a2) * (a2 * p.x() * p.x() - p.y() * p.y()));
}

double gamma_plus_sq(double mu, double alpha)
{
    require_alpha(alpha, "gamma_plus");
    require_mu(mu, alpha, "gamma_plus");
    const double s = 1.0 + alpha * alpha;
    const double disc = std::max(0.0, s * s - 2.0 * mu);
    return (2.0 * s - mu - 2.0 * std::sqrt(disc)) / (mu + 4.0 * (1.0 - alpha * alpha));
}

double gamma_minus_sq(double mu, double alpha, double c)
{
    require_alpha(alpha, "gamma_minus");
    require_mu(mu, alpha, "gamma_minus");
    if (!(c > 0.0 && c <= 1.0)) throw DomainError("gamma_minus: c must lie in (0,1]");
    const double s = 1.0 + alpha * alpha;
    const double disc = s * s - 2.0 * alpha * alpha * mu * c;
    if (disc < 0.0) throw DomainError("gamma_minus: negative discriminant");
    return (mu * c - 2.0 * s + 2.0 * std::sqrt(disc)) / (4.0 * (1.0 - alpha * alpha) - mu * c);
}

FieldFn v_plus(double mu, double alpha)
{
    const double g2 = gamma_plus_sq(mu, alpha);
    return [g2, alpha](const Vec2& p) { return log_ratio_profile(g2, alpha, 1.0, p); };
}

FieldFn v_minus(double mu, double alpha, double c)
{
    const double g2 = gamma_minus_sq(mu, alpha, c);
    return [g2, alpha, c](const Vec2& p) {
        const double rho = alpha * alpha * p.x() * p.x() + p.y() * p.y();
        return rho <= c ? log_ratio_profile(g2, alpha, c, p) : 0.0;
    };
}

SubSuperPair sub_super_pair(double mu, double alpha, double c)
{
    SubSuperPair s;
    s.mu = mu;
    s.alpha = alpha;
    s.c = c;
    s.gamma_minus = gamma_minus(mu, alpha, c);
    s.gamma_plus = gamma_plus(mu, alpha);
    s.sub = v_minus(mu, alpha, c);
    s.super = v_plus(mu, alpha);
    return s;
}

LambdaBounds lambda_bounds(double mu, double alpha, double c)
{
    return {mu * c * (pi / alpha) * (1.0 + gamma_minus_sq(mu, alpha, c)),
            mu * (pi / alpha) * (1.0 + gamma_plus_sq(mu, alpha))};
}

double lambda_lower(double alpha, double c)
{
    require_alpha(alpha, "lambda_lower");
    return c * mu_bar(alpha) * (pi / alpha) * (1.0 + gamma_under_sq(alpha, c));
}

double lambda_upper(double alpha)
{
    require_alpha(alpha, "lambda_upper");
    return mu_bar(alpha) * (pi / alpha) * (1.0 + gamma_bar_sq(alpha));
}

double alpha_star_upper()
{
    return bisect_root([](double a) { return lambda_upper(a) - 8.0 * pi; }, 1e-6, 0.5, 1e-10);
}

double alpha_star_lower(double c)
{
    if (!(c > 0.0 && c <= 1.0)) throw DomainError("alpha_star_lower: c must lie in (0,1]");
    return bisect_root([c](double a) { return lambda_lower(a, c) - 8.0 * pi; }, 1e-6,
                       1.0 / (2.0 * std::sqrt(10.0)), 1e-10);
}

double pohozaev_bound(double alpha)
{
    require_alpha(alpha, "pohozaev_bound");
    return 4.0 * pi * (1.0 + alpha * alpha) / alpha;
}

double psi_of_N(double N) { return pi * pi / (3.0 * std::sqrt(3.0) * N - pi * pi); }

double phi_of_N(double N)
{
    const double t = 8192.0 * std::sqrt(2.0) / (pi * N);
    return (64.0 + t) / (pi * N - 64.0 - t);
}

double N_bar()
{
    const double target = alpha_star_lower(0.25);
    // phi is decreasing once the Taylor step of the derivation is valid (N > 512/pi)
    return bisect_root([target](double N) { return phi_of_N(N) - target; }, 512.0 / pi * (1.0 + 1e-9), 1e9,
                       1e-9);
}

ConvexThresholds convex_thresholds(double N)
{
    if (!(N > N_bar())) throw DomainError("convex_thresholds: N must exceed N_bar");
    return {lambda_lower(phi_of_N(N), 0.25), lambda_upper(psi_of_N(N))};
}

ThresholdReport threshold_report(double alpha, double c)
{
    require_alpha(alpha, "thresholds");
    if (!(c > 0.0 && c <= 1.0)) throw DomainError("thresholds: c must lie in (0,1]");
    ThresholdReport r;
    r.alpha = alpha;
    r.c = c;
    r.mu_bar = mu_bar(alpha);
    r.gamma_bar_sq = gamma_bar_sq(alpha);
    r.gamma_under_sq = gamma_under_sq(alpha, c);
    r.lambda_lower = lambda_lower(alpha, c);
    r.lambda_upper = lambda_upper(alpha);
    r.alpha_star_upper = alpha_star_upper();
    r.alpha_star_lower = alpha_star_lower(c);
    r.pohozaev = pohozaev_bound(alpha);
    return r;
}

// ---------------------------------------------------------------- expansions

FieldFn psi0(double alpha)
{
    require_alpha(alpha, "psi0");
    const double k = 1.0 / (2.0 * (1.0 + alpha * alpha));
    return [alpha, k](const Vec2& p) { return k * (1.0 - (alpha * alpha * p.x() * p.x() + p.y() * p.y())); };
}

FieldFn phi0(double lambda, double alpha)
{
    const double mu0 = mu0_series(lambda, alpha).mu0;
    const FieldFn base = psi0(alpha);
    return [mu0, base](const Vec2& p) { return mu0 * base(p); };
}

double integral_psi0(double alpha) { return pi / (4.0 * alpha * (1.0 + alpha * alpha)); }

double integral_psi0_sq(double alpha)
{
    const double s = 1.0 + alpha * alpha;
    return pi / (12.0 * alpha * s * s);
}

double integral_alpha2_phi1(double mu0, double alpha)
{
    const double s = 1.0 + alpha * alpha;
    return pi * mu0 * mu0 * alpha / (12.0 * s * s);
}

Mu0Series mu0_series(double lambda, double alpha)
{
    Mu0Series s;
    s.mu0 = lambda / pi - lambda * lambda * alpha / (4.0 * pi * pi);
    s.d_mu0 = 1.0 / pi - lambda * alpha / (2.0 * pi * pi);
    s.dd_mu0 = -alpha / (2.0 * pi * pi);
    return s;
}

double lambda0_series(double mu0, double alpha) { return pi * mu0 + pi * mu0 * mu0 * alpha / 4.0; }

EnergySeries E_hat_series(double lambda, double alpha)
{
    EnergySeries s;
    s.E_hat = alpha / (8.0 * pi) + alpha * alpha * lambda / (48.0 * pi * pi);
    s.d_E_hat = alpha * alpha / (48.0 * pi * pi);
    return s;
}

LambdaHatSeries lambda_hat_series(double E, double alpha)
{
    LambdaHatSeries s;
    s.d_lambda_hat = 48.0 * pi * pi / (alpha * alpha);
    s.lambda_hat = s.d_lambda_hat * (E - alpha / (8.0 * pi));
    return s;
}

double E_hat_max(double alpha) { return alpha / (8.0 * pi) + alpha * alpha * lambda_upper(alpha) / (50.0 * pi * pi); }

ExpansionCoeffs expansion_coeffs(double lambda, double alpha)
{
    const auto m = mu0_series(lambda, alpha);
    const auto e = E_hat_series(lambda, alpha);
    const auto l = lambda_hat_series(e.E_hat, alpha);
    return {m.mu0, m.d_mu0, m.dd_mu0, e.E_hat, e.d_E_hat, e.dd_E_hat, l.lambda_hat, l.d_lambda_hat,
            entropy_curvature_leading(alpha)};
}

double entropy_curvature_leading(double alpha) { return -11.0 * 48.0 * pi * pi / (alpha * alpha); }

double entropy_curvature_thermodynamic(double alpha) { return -48.0 * pi * pi / (alpha * alpha); }

double E_uniform(double alpha)
{
    require_alpha(alpha, "E_uniform");
    return alpha / (8.0 * pi);
}

double E_uniform_exact(double alpha)
{
    require_alpha(alpha, "E_uniform_exact");
    return alpha / (8.0 * pi * (1.0 + alpha * alpha));
}

// ---------------------------------------------------------------- disk oracle

LiouvilleDisk liouville_disk(double gamma)
{
    if (!(gamma > 0.0)) throw DomainError("liouville_disk: gamma must be positive");
    const double g2 = gamma * gamma;
    LiouvilleDisk d;
    d.gamma = gamma;
    d.mu = 8.0 * g2 / ((1.0 + g2) * (1.0 + g2));
    d.lambda = 8.0 * pi * g2 / (1.0 + g2);
    d.u = [g2](const Vec2& p) { return 2.0 * std::log((1.0 + g2) / (1.0 + g2 * p.squaredNorm())); };
    return d;
}

double disk_gamma_of_mu(double mu)
{
    if (!(mu > 0.0 && mu <= 2.0 * (1.0 + 1e-14))) throw DomainError("disk_gamma_of_mu: mu must lie in (0,2]");
    const double t = (4.0 - mu - 2.0 * std::sqrt(std::max(0.0, 4.0 - 2.0 * mu))) / mu;
    return std::sqrt(t);
}

}  // namespace mfe

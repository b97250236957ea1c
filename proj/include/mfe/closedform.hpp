#pragma once

#include "mfe/geometry.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mfe {

using FieldFn = std::function<double(const Vec2&)>;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ------------------------------------------------ sub/supersolution families

double mu_bar(double alpha);  ///< (1 + alpha^2)^2 / 2
double gamma_bar_sq(double alpha);  ///< (1 + alpha^2) / (3 - alpha^2)
/// Same quantity written through mu_bar; kept as a cross-check.
double gamma_bar_sq_substituted(double alpha);
double gamma_under_sq(double alpha, double c);

double g_plus(double gamma, double alpha);
double g_minus(double gamma, double alpha, double c);
/// Weight V with -Lap v = V e^v for v = v_{alpha,gamma}.
double V_plus(double gamma, double alpha, const Vec2& p);

double gamma_plus_sq(double mu, double alpha);
double gamma_minus_sq(double mu, double alpha, double c);
inline double gamma_plus(double mu, double alpha) { return std::sqrt(gamma_plus_sq(mu, alpha)); }
inline double gamma_minus(double mu, double alpha, double c) { return std::sqrt(gamma_minus_sq(mu, alpha, c)); }

/// 2 log((1 + g^2) / (1 + g^2 (alpha^2 x^2 + y^2))) with g = gamma_plus(mu, alpha).
FieldFn v_plus(double mu, double alpha);
/// Same profile squeezed into {alpha^2 x^2 + y^2 <= c}, zero outside.
FieldFn v_minus(double mu, double alpha, double c);

struct SubSuperPair {
    double mu = 0.0, alpha = 0.0, c = 1.0;
    double gamma_minus = 0.0, gamma_plus = 0.0;
    FieldFn sub;
    FieldFn super;
};
SubSuperPair sub_super_pair(double mu, double alpha, double c);

// ---------------------------------------------------------------- thresholds

struct LambdaBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// mu c (pi/alpha)(1 + gamma_-^2) and mu (pi/alpha)(1 + gamma_+^2).
LambdaBounds lambda_bounds(double mu, double alpha, double c);
double lambda_lower(double alpha, double c);  ///< at mu = mu_bar
double lambda_upper(double alpha);            ///< at mu = mu_bar

/// Root of lambda_upper(alpha) = 8 pi, bisection to 1e-8.
double alpha_star_upper();
/// Root of lambda_lower(alpha, c) = 8 pi on (0, 1/(2 sqrt 10)], bisection to 1e-8.
double alpha_star_lower(double c);

double pohozaev_bound(double alpha);  ///< 4 pi (1 + alpha^2) / alpha

double psi_of_N(double N);  ///< pi^2 / (3 sqrt3 N - pi^2), lower bound on b/a
double phi_of_N(double N);  ///< upper bound on b/a
/// Root of phi(N) = alpha_star_lower(1/4).
double N_bar();

struct ConvexThresholds {
    double lower = 0.0;  ///< lambda_lower(phi(N), 1/4)
    double upper = 0.0;  ///< lambda_upper(psi(N))
};
ConvexThresholds convex_thresholds(double N);

struct ThresholdReport {
    double alpha = 0.0;
    double c = 1.0;
    double mu_bar = 0.0;
    double gamma_bar_sq = 0.0;
    double gamma_under_sq = 0.0;
    double lambda_lower = 0.0;
    double lambda_upper = 0.0;
    double alpha_star_upper = 0.0;
    double alpha_star_lower = 0.0;
    double pohozaev = 0.0;
};
ThresholdReport threshold_report(double alpha, double c);

// ---------------------------------------------------------------- expansions

/// (1 - (alpha^2 x^2 + y^2)) / (2 (1 + alpha^2)); solves -Lap psi0 = 1 on omega_alpha.
FieldFn psi0(double alpha);
FieldFn phi0(double lambda, double alpha);

double integral_psi0(double alpha);
double integral_psi0_sq(double alpha);
/// Integral of alpha^2 phi1 where -Lap phi1 = mu0^2 psi0.
double integral_alpha2_phi1(double mu0, double alpha);

struct Mu0Series {
    double mu0 = 0.0;
    double d_mu0 = 0.0;
    double dd_mu0 = 0.0;
    static constexpr int remainder_order = 2;
};
Mu0Series mu0_series(double lambda, double alpha);
/// pi mu0 + pi mu0^2 alpha / 4, remainder O(alpha^2).
double lambda0_series(double mu0, double alpha);

struct EnergySeries {
    double E_hat = 0.0;
    double d_E_hat = 0.0;
    double dd_E_hat = 0.0;  ///< zero at series order
    static constexpr int remainder_order = 3;
};
EnergySeries E_hat_series(double lambda, double alpha);

struct LambdaHatSeries {
    double lambda_hat = 0.0;
    double d_lambda_hat = 0.0;
    double dd_lambda_hat = 0.0;  ///< zero at series order, remainder O(1/alpha)
    static constexpr int remainder_order = 1;
};
LambdaHatSeries lambda_hat_series(double E, double alpha);

/// Upper end of the energy window, alpha/(8 pi) + alpha^2 lambda_upper / (50 pi^2).
double E_hat_max(double alpha);

struct ExpansionCoeffs {
    double mu0 = 0.0, d_mu0 = 0.0, dd_mu0 = 0.0;
    double E_hat = 0.0, d_E_hat = 0.0, dd_E_hat = 0.0;
    double lambda_hat = 0.0, d_lambda_hat = 0.0;
    double S_curv = 0.0;
};
ExpansionCoeffs expansion_coeffs(double lambda, double alpha);

/// Claimed leading term -11 * 48 pi^2 / alpha^2 of d^2 S / dE^2.
double entropy_curvature_leading(double alpha);
/// -d lambda_hat / dE = -48 pi^2 / alpha^2, the value implied by dS/dE = -lambda.
double entropy_curvature_thermodynamic(double alpha);

/// alpha / (8 pi): uniform-density energy at leading order in alpha.
double E_uniform(double alpha);
/// alpha / (8 pi (1 + alpha^2)): exact small-lambda limit of the energy on omega_alpha.
double E_uniform_exact(double alpha);

// ------------------------------------------------------------ disk oracle

struct LiouvilleDisk {
    double gamma = 0.0;
    double mu = 0.0;
    double lambda = 0.0;
    FieldFn u;
};
/// u = 2 log((1 + g^2)/(1 + g^2 r^2)) on the unit disk, mu = 8g^2/(1+g^2)^2, lambda = 8 pi g^2/(1+g^2).
LiouvilleDisk liouville_disk(double gamma);
/// Minimal-branch gamma in (0, 1] for a given mu in (0, 2].
double disk_gamma_of_mu(double mu);

}  // namespace mfe

#pragma once

#include "mfe/grid.hpp"

#include <stdexcept>

namespace mfe {

class SpectrumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EigenResult {
    double value = 0.0;
    GridField eigenfield;  ///< <phi^2>_weight = 1, largest-magnitude entry positive
    int iterations = 0;
    double residual = 0.0;
};

/// Smallest tau with (A - lambda D + lambda delta (w delta)^T) phi = tau D phi, D = diag(delta).
/// This is the nonlocal linearization of P(lambda) at u.
EigenResult tau1(const Grid& grid, const GridField& u, double lambda, double tol = 1e-8);
/// Same without the rank-one term; the eigenfield is checked to be one-signed.
EigenResult tau0(const Grid& grid, const GridField& u, double lambda, double tol = 1e-8);
/// Smallest nu with (A - mu diag(e^u)) phi = nu diag(e^u) phi.
EigenResult nu0(const Grid& grid, const GridField& u, double mu, double tol = 1e-8);

/// Quadrature Rayleigh quotient (int |grad phi|^2 - lambda <phi^2> + lambda <phi>^2) / <phi^2>,
/// brackets taken against delta(u).
double tau1_quotient(const Grid& grid, const GridField& u, double lambda, const GridField& phi);

}  // namespace mfe

#pragma once

#include "mfe/grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>

namespace mfe {

class LinearSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sparse LU below `direct_limit` unknowns, ILUT-preconditioned BiCGSTAB above.
/// The symbolic analysis is reused while the sparsity pattern stays the same.
class LinearSolver {
public:
    static constexpr Eigen::Index kDirectLimit = 100000;

    explicit LinearSolver(Eigen::Index direct_limit = kDirectLimit) : direct_limit_(direct_limit) {}

    void compute(const SparseMatrix& m);
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    bool direct() const { return direct_; }

private:
    Eigen::Index direct_limit_;
    bool direct_ = true;
    Eigen::Index pattern_rows_ = -1;
    Eigen::Index pattern_nnz_ = -1;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
    std::unique_ptr<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>> krylov_;
};

/// m + diag(d); m must store its full diagonal.
SparseMatrix add_diagonal(const SparseMatrix& m, const Eigen::VectorXd& d);

struct RankOneSolve {
    Eigen::VectorXd x;
    double denominator = 0.0;
};
/// Solves (M + c bᵀ) x = r given a factorized M, by the rank-one update formula.
/// The caller inspects `denominator` = 1 + bᵀ M⁻¹ c for near-singularity.
RankOneSolve solve_rank_one(const LinearSolver& m, const Eigen::VectorXd& c, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& r);

/// Generalized eigenproblem (M + c bᵀ) x = t diag(B) x with B > 0. Inner products
/// use diag(W B), which makes the Rayleigh quotient the quadrature-weighted one.
struct EigenProblem {
    const SparseMatrix* M = nullptr;
    Eigen::VectorXd B;
    Eigen::VectorXd W;
    Eigen::VectorXd c;  ///< empty for no rank-one term
    Eigen::VectorXd b;
};

struct EigenIterate {
    double value = 0.0;
    Eigen::VectorXd vector;  ///< normalized to xᵀ W B x = 1, largest entry positive
    int iterations = 0;
    double residual = 0.0;
    double gap = 0.0;  ///< Ritz estimate of the distance to the next eigenvalue
};

/// Smallest eigenvalue: block inverse iteration with Rayleigh-Ritz from a shift
/// below the spectrum, then single-vector inverse iteration from a shift just
/// under the converged Ritz value.
EigenIterate smallest_eig(const EigenProblem& p, double lower_bound, double tol = 1e-8, int max_iter = 3000);

/// Dense reference for small problems.
double smallest_eig_dense(const EigenProblem& p);

}  // namespace mfe

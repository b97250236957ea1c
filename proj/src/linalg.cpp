#include "mfe/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mfe {

void LinearSolver::compute(const SparseMatrix& m)
{
    direct_ = m.rows() <= direct_limit_;
    if (direct_) {
        if (!lu_ || pattern_rows_ != m.rows() || pattern_nnz_ != m.nonZeros()) {
            lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
            lu_->analyzePattern(m);
            pattern_rows_ = m.rows();
            pattern_nnz_ = m.nonZeros();
        }
        lu_->factorize(m);
        if (lu_->info() != Eigen::Success) throw LinearSolveError("sparse LU factorization failed: " + lu_->lastErrorMessage());
        return;
    }
    krylov_ = std::make_unique<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>>();
    krylov_->preconditioner().setDroptol(1e-6);
    krylov_->preconditioner().setFillfactor(20);
    krylov_->setTolerance(1e-14);
    krylov_->setMaxIterations(2000);
    krylov_->compute(m);
    if (krylov_->info() != Eigen::Success) throw LinearSolveError("ILUT preconditioner setup failed");
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) const
{
    if (direct_) {
        Eigen::VectorXd x = lu_->solve(b);
        if (lu_->info() != Eigen::Success) throw LinearSolveError("sparse LU solve failed");
        return x;
    }
    Eigen::VectorXd x = krylov_->solve(b);
    if (krylov_->info() != Eigen::Success)
        throw LinearSolveError("BiCGSTAB did not converge (error " + std::to_string(krylov_->error()) + ")");
    return x;
}

SparseMatrix add_diagonal(const SparseMatrix& m, const Eigen::VectorXd& d)
{
    SparseMatrix out = m;
    for (Eigen::Index k = 0; k < out.outerSize(); ++k) out.coeffRef(k, k) += d[k];
    return out;
}

RankOneSolve solve_rank_one(const LinearSolver& m, const Eigen::VectorXd& c, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& r)
{
    const Eigen::VectorXd y = m.solve(r);
    const Eigen::VectorXd z = m.solve(c);
    RankOneSolve out;
    out.denominator = 1.0 + b.dot(z);
    out.x = y - z * (b.dot(y) / out.denominator);
    return out;
}

namespace {

bool has_rank_one(const EigenProblem& p) { return p.c.size() > 0; }

Eigen::MatrixXd apply(const EigenProblem& p, const Eigen::MatrixXd& x)
{
    Eigen::MatrixXd y = (*p.M) * x;
    if (has_rank_one(p)) y += p.c * (p.b.transpose() * x);
    return y;
}

Eigen::VectorXd shifted_solve(const LinearSolver& s, const EigenProblem& p, const Eigen::VectorXd& r)
{
    if (!has_rank_one(p)) return s.solve(r);
    return solve_rank_one(s, p.c, p.b, r).x;
}

double residual_of(const EigenProblem& p, const Eigen::VectorXd& x, double t)
{
    const Eigen::VectorXd bx = p.B.cwiseProduct(x);
    const Eigen::VectorXd r = apply(p, x) - t * bx;
    return r.lpNorm<Eigen::Infinity>() / (bx.lpNorm<Eigen::Infinity>() * std::max(1.0, std::abs(t)));
}

}  // namespace

EigenIterate smallest_eig(const EigenProblem& p, double lower_bound, double tol, int max_iter)
{
    const Eigen::Index n = p.M->rows();
    const Eigen::VectorXd wb = p.W.cwiseProduct(p.B);
    const int block = static_cast<int>(std::min<Eigen::Index>(6, n));

    Eigen::MatrixXd x(n, block);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    x.col(0).setOnes();
    for (int k = 1; k < block; ++k)
        for (Eigen::Index i = 0; i < n; ++i) x(i, k) = uni(rng);

    LinearSolver solver;
    solver.compute(add_diagonal(*p.M, -lower_bound * p.B));

    EigenIterate out;
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(block, std::numeric_limits<double>::infinity());
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::MatrixXd y(n, block);
        for (int k = 0; k < block; ++k) y.col(k) = shifted_solve(solver, p, p.B.cwiseProduct(x.col(k)));
        // orthonormalize in the W B inner product
        const Eigen::MatrixXd g = y.transpose() * wb.asDiagonal() * y;
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success) throw LinearSolveError("smallest_eig: block lost rank");
        y = llt.matrixL().solve(y.transpose()).transpose();
        const Eigen::MatrixXd h = y.transpose() * p.W.asDiagonal() * apply(p, y);
        Eigen::EigenSolver<Eigen::MatrixXd> es(h);
        std::vector<int> order(block);
        for (int k = 0; k < block; ++k) order[k] = k;
        const Eigen::VectorXd re = es.eigenvalues().real();
        std::sort(order.begin(), order.end(), [&](int a, int b) { return re[a] < re[b]; });
        Eigen::MatrixXd v(block, block);
        Eigen::VectorXd next(block);
        for (int k = 0; k < block; ++k) {
            v.col(k) = es.eigenvectors().col(order[k]).real();
            next[k] = re[order[k]];
        }
        x = y * v;
        const double change = std::abs(next[0] - theta[0]) / std::max(1.0, std::abs(next[0]));
        theta = next;
        if (change < 1e-7 && it > 2) break;
    }

    out.gap = theta[1] - theta[0];
    const double shift = theta[0] - 0.25 * std::max(out.gap, 1e-6 * std::max(1.0, std::abs(theta[0])));
    solver.compute(add_diagonal(*p.M, -shift * p.B));

    Eigen::VectorXd v = x.col(0);
    double t = theta[0];
    for (; it < max_iter; ++it) {
        v = shifted_solve(solver, p, p.B.cwiseProduct(v));
        v /= std::sqrt(v.dot(wb.cwiseProduct(v)));
        t = v.dot(p.W.cwiseProduct(apply(p, v)));
        out.residual = residual_of(p, v, t);
        if (out.residual <= tol) break;
    }
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    out.value = t;
    out.vector = v;
    out.iterations = it + 1;
    if (out.residual > tol) throw LinearSolveError("smallest_eig: inverse iteration stagnated");
    return out;
}

double smallest_eig_dense(const EigenProblem& p)
{
    Eigen::MatrixXd m = Eigen::MatrixXd(*p.M);
    if (has_rank_one(p)) m += p.c * p.b.transpose();
    m = p.B.cwiseInverse().asDiagonal() * m;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    return es.eigenvalues().real().minCoeff();
}

}  // namespace mfe

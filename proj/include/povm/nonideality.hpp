// Copyright 2026 The povmlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Nonideal-measurement relation between two measures: M_i = sum_j l_ij N_j
 * with a column-stochastic l, the average-row-entropy nonideality measure J
 * and the Martens lower bound on J_lambda + J_mu for a joint measurement of
 * two maximal PVMs.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "povm/core.hpp"
#include "povm/measurement.hpp"

namespace povm {

/// Residual (Hilbert-Schmidt) above which a decomposition is rejected.
inline constexpr double kDecompositionTol = 1e-8;

class UnsupportedError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Column-stochastic nonnegative matrix. Rows index the observed (nonideal)
 * outcomes, columns the target outcomes.
 */
class NonidealityMatrix {
  public:
    explicit NonidealityMatrix(Eigen::MatrixXd lambda, double tol = kDefaultTol) : lambda_(std::move(lambda)) {
        if (lambda_.rows() == 0 || lambda_.cols() == 0) {
            throw DimensionError("nonideality matrix is empty");
        }
        for (Eigen::Index i = 0; i < lambda_.rows(); ++i) {
            for (Eigen::Index j = 0; j < lambda_.cols(); ++j) {
                double &v = lambda_(i, j);
                if (!std::isfinite(v) || v < -tol) {
                    throw ValidationError("nonideality matrix has negative entry " + std::to_string(v));
                }
                if (v < 0.0) v = 0.0;
            }
        }
        for (Eigen::Index j = 0; j < lambda_.cols(); ++j) {
            const double s = lambda_.col(j).sum();
            if (std::abs(s - 1.0) > tol) {
                throw ValidationError("nonideality matrix column " + std::to_string(j) + " sums to " +
                                      std::to_string(s));
            }
        }
    }

    [[nodiscard]] const Eigen::MatrixXd &matrix() const { return lambda_; }
    [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(lambda_.rows()); }
    [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(lambda_.cols()); }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        return lambda_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

  private:
    Eigen::MatrixXd lambda_;
};

struct NonidealityFit {
    NonidealityMatrix lambda;
    /// sqrt(sum_i ||M_i - sum_j l_ij N_j||_HS^2)
    double residual = 0.0;
    /// residual <= kDecompositionTol: observed is a nonideal measurement of target.
    bool is_nonideal_measurement = false;
    /// False when the target elements are linearly dependent; lambda is then
    /// the minimum-norm choice.
    bool unique = true;
};

namespace detail {

inline double decomposition_residual(const PovmMeasure &observed, const PovmMeasure &target,
                                     const Eigen::MatrixXd &lambda) {
    double acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        Matrix diff = observed[i].matrix();
        for (std::size_t j = 0; j < target.size(); ++j) {
            diff -= lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * target[j].matrix();
        }
        acc += diff.squaredNorm();
    }
    return std::sqrt(acc);
}

/// Euclidean projection of v onto the probability simplex.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd &v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) theta = t;
    }
    return (v.array() - theta).max(0.0).matrix();
}

/// f(L) = sum_i l_i^T G l_i - 2 b_i^T l_i  (rows l_i of L).
inline double qp_objective(const Eigen::MatrixXd &lam, const Eigen::MatrixXd &gram, const Eigen::MatrixXd &b) {
    return (lam * gram).cwiseProduct(lam).sum() - 2.0 * lam.cwiseProduct(b).sum();
}

/**
 * Exact solve of the equality-constrained QP restricted to the support of
 * `start` (entries below `zero_tol` pinned to zero). Returns false if the
 * KKT solution leaves the nonnegative orthant.
 */
inline bool polish_on_support(const Eigen::MatrixXd &start, const Eigen::MatrixXd &gram, const Eigen::MatrixXd &b,
                              Eigen::MatrixXd &out, double zero_tol = 1e-12) {
    const Eigen::Index rows = start.rows();
    const Eigen::Index cols = start.cols();
    std::vector<std::pair<Eigen::Index, Eigen::Index>> free;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (start(i, j) > zero_tol) free.emplace_back(i, j);

    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + cols, nf + cols);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + cols);
    for (Eigen::Index a = 0; a < nf; ++a) {
        const auto [ia, ja] = free[static_cast<std::size_t>(a)];
        for (Eigen::Index c = 0; c < nf; ++c) {
            const auto [ic, jc] = free[static_cast<std::size_t>(c)];
            if (ia == ic) kkt(a, c) = 2.0 * gram(ja, jc);
        }
        kkt(a, nf + ja) = -1.0;
        kkt(nf + ja, a) = 1.0;
        rhs(a) = 2.0 * b(ia, ja);
    }
    for (Eigen::Index j = 0; j < cols; ++j) rhs(nf + j) = 1.0;

    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e-10) return false;
    out = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index a = 0; a < nf; ++a) {
        const auto [ia, ja] = free[static_cast<std::size_t>(a)];
        if (sol(a) < -1e-13) return false;
        out(ia, ja) = std::max(sol(a), 0.0);
    }
    return true;
}

} // namespace detail

/**
 * Fit observed M_i = sum_j l_ij N_j with l >= 0 and columns of l summing to 1,
 * minimizing the Hilbert-Schmidt residual.
 *
 * The Gram system is tried first; it is exact whenever an exact decomposition
 * exists and the targets are independent. Otherwise an accelerated projected
 * gradient over the product of column simplices runs, followed by an exact
 * KKT solve on the detected support.
 */
inline NonidealityFit solve_nonideality(const PovmMeasure &observed, const PovmMeasure &target,
                                        double tol = kDefaultTol) {
    if (observed.dim() != target.dim()) {
        throw DimensionError("solve_nonideality: measures act on different dimensions");
    }
    const auto ni = static_cast<Eigen::Index>(observed.size());
    const auto nj = static_cast<Eigen::Index>(target.size());

    Eigen::MatrixXd gram(nj, nj);
    for (Eigen::Index j = 0; j < nj; ++j)
        for (Eigen::Index k = 0; k < nj; ++k)
            gram(j, k) = hs_inner(target[static_cast<std::size_t>(j)], target[static_cast<std::size_t>(k)]).real();
    Eigen::MatrixXd b(ni, nj);
    for (Eigen::Index i = 0; i < ni; ++i)
        for (Eigen::Index j = 0; j < nj; ++j)
            b(i, j) = hs_inner(observed[static_cast<std::size_t>(i)], target[static_cast<std::size_t>(j)]).real();

    // Pseudo-inverse of the Gram matrix and the projector onto its kernel.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double cutoff = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()) * 1e-12;
    Eigen::VectorXd inv_ev = Eigen::VectorXd::Zero(nj);
    Eigen::Index gram_rank = 0;
    for (Eigen::Index k = 0; k < nj; ++k) {
        if (es.eigenvalues()(k) > cutoff) {
            inv_ev(k) = 1.0 / es.eigenvalues()(k);
            ++gram_rank;
        }
    }
    const Eigen::MatrixXd &vecs = es.eigenvectors();
    const Eigen::MatrixXd gram_pinv = vecs * inv_ev.asDiagonal() * vecs.transpose();
    const Eigen::MatrixXd kernel = Eigen::MatrixXd::Identity(nj, nj) - gram_pinv * gram;
    const bool unique = gram_rank == nj;

    // Row i: G^+ b_i plus an equal share of the kernel part of the all-ones
    // vector, the minimum-norm choice meeting the column sums.
    Eigen::MatrixXd lam = b * gram_pinv;
    const Eigen::RowVectorXd share = (kernel * Eigen::VectorXd::Ones(nj)).transpose() / static_cast<double>(ni);
    lam.rowwise() += share;

    const double tiny = 1e-12;
    const bool orthant_ok = lam.minCoeff() >= -tiny;
    const bool sums_ok = (lam.colwise().sum().array() - 1.0).abs().maxCoeff() <= tiny;
    double residual = detail::decomposition_residual(observed, target, lam);

    if (!(orthant_ok && sums_ok && residual <= kDecompositionTol)) {
        // Constrained fit: FISTA over the product of column simplices.
        const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), cutoff);
        Eigen::MatrixXd x = Eigen::MatrixXd::Constant(ni, nj, 1.0 / static_cast<double>(ni));
        Eigen::MatrixXd y = x;
        double t = 1.0;
        for (int it = 0; it < 20000; ++it) {
            const Eigen::MatrixXd grad = 2.0 * (y * gram - b);
            Eigen::MatrixXd next = y - grad / lip;
            for (Eigen::Index j = 0; j < nj; ++j) next.col(j) = detail::project_to_simplex(next.col(j));
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double step = (next - x).cwiseAbs().maxCoeff();
            y = next + ((t - 1.0) / tn) * (next - x);
            x = std::move(next);
            t = tn;
            if (step < 1e-16) break;
        }
        Eigen::MatrixXd polished;
        if (detail::polish_on_support(x, gram, b, polished) &&
            detail::qp_objective(polished, gram, b) <= detail::qp_objective(x, gram, b) + 1e-14) {
            x = std::move(polished);
        }
        lam = std::move(x);
        residual = detail::decomposition_residual(observed, target, lam);
    }

    lam = lam.cwiseMax(0.0);
    NonidealityFit fit{NonidealityMatrix(lam, std::max(tol, 1e-9)), residual, residual <= kDecompositionTol, unique};
    return fit;
}

/// x ln x with 0 ln 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/**
 * Average row entropy J = -(1/N) sum_ij l_ij ln(l_ij / sum_j' l_ij'), with N
 * the number of rows. Zero rows contribute nothing.
 */
inline double nonideality_entropy(const NonidealityMatrix &lambda) {
    const Eigen::MatrixXd &m = lambda.matrix();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double row = m.row(i).sum();
        if (row <= 0.0) continue;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (v > 0.0) acc -= v * std::log(v / row);
        }
    }
    return std::max(acc / static_cast<double>(m.rows()), 0.0);
}

/// -ln max_mn Tr(P_m Q_n) for two maximal PVMs on the same space.
inline double martens_bound(const PvmMeasure &p, const PvmMeasure &q, double tol = kDefaultTol) {
    if (p.dim() != q.dim()) {
        throw DimensionError("martens_bound: PVMs act on different dimensions");
    }
    if (!p.is_maximal(tol) || !q.is_maximal(tol)) {
        throw UnsupportedError("martens_bound: only maximal (rank-one) PVMs are supported");
    }
    double best = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m)
        for (std::size_t n = 0; n < q.size(); ++n) best = std::max(best, hs_inner(p[m], q[n]).real());
    return -std::log(best);
}

struct MartensReport {
    double j_lambda = 0.0;
    double j_mu = 0.0;
    double bound = 0.0;
    /// j_lambda + j_mu - bound
    double slack = 0.0;
    bool satisfied = true;
};

/**
 * Evaluate J_lambda + J_mu >= -ln max Tr P_m Q_n, with lambda relating the
 * first marginal to `p` and mu the second marginal to `q`.
 */
inline MartensReport check_martens(const NonidealityMatrix &lambda, const NonidealityMatrix &mu,
                                   const PvmMeasure &p, const PvmMeasure &q, double tol = kDefaultTol) {
    if (lambda.cols() != p.size() || mu.cols() != q.size()) {
        throw DimensionError("check_martens: nonideality matrices do not match the PVM outcome counts");
    }
    MartensReport r;
    r.j_lambda = nonideality_entropy(lambda);
    r.j_mu = nonideality_entropy(mu);
    r.bound = martens_bound(p, q, tol);
    r.slack = r.j_lambda + r.j_mu - r.bound;
    r.satisfied = r.slack >= -tol;
    return r;
}

class NotNonidealError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Martens check for a bivariate POVM R_mn: the m-marginal (axis 0) is fitted
 * against `p`, the n-marginal (axis 1) against `q`. Throws NotNonidealError
 * if either marginal is not a nonideal measurement of its PVM.
 */
inline MartensReport check_martens(const PovmMeasure &bivariate, const PvmMeasure &p, const PvmMeasure &q,
                                   double tol = kDefaultTol) {
    if (!bivariate.index_shape() || bivariate.index_shape()->size() != 2) {
        throw DimensionError("check_martens: expected a bivariate (two-axis) measure");
    }
    const auto lam = solve_nonideality(marginal(bivariate, {0}), p, tol);
    const auto mu = solve_nonideality(marginal(bivariate, {1}), q, tol);
    if (!lam.is_nonideal_measurement || !mu.is_nonideal_measurement) {
        throw NotNonidealError("check_martens: a marginal is not a nonideal measurement of its PVM (residuals " +
                               std::to_string(lam.residual) + ", " + std::to_string(mu.residual) + ")");
    }
    return check_martens(lam.lambda, mu.lambda, p, q, tol);
}

} // namespace povm

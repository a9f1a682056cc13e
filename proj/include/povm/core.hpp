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
 * Dense complex operator kernel: the Operator and State value types, the
 * algebraic predicates (Hermitian, positive, projector), Kronecker product,
 * partial trace and the uncertainty-product comparison.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace povm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Module-wide predicate tolerance. Every predicate accepts an override.
inline constexpr double kDefaultTol = 1e-9;

class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a value fails the invariants of the type it is being built as.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computed quantity contradicts an invariant that holds by
/// construction (e.g. a negative Born probability from a validated POVM).
class ConsistencyError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/**
 * Square complex matrix with a fixed dimension.
 *
 * Operators are immutable once built; arithmetic returns new values. The
 * dimension check happens at construction, so every binary operation only
 * has to compare two sizes.
 */
class Operator {
  public:
    Operator() : mat_(Matrix::Zero(1, 1)) {}

    explicit Operator(Matrix m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols() || mat_.rows() == 0) {
            throw DimensionError("Operator must be a non-empty square matrix, got " +
                                 std::to_string(mat_.rows()) + "x" + std::to_string(mat_.cols()));
        }
    }

    static Operator identity(std::size_t dim) {
        return Operator(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
    }
    static Operator zero(std::size_t dim) {
        return Operator(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
    }
    static Operator diagonal(std::span<const double> diag) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
        for (std::size_t i = 0; i < diag.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
        }
        return Operator(std::move(m));
    }
    static Operator diagonal(std::initializer_list<double> diag) {
        return diagonal(std::span<const double>(diag.begin(), diag.size()));
    }
    /// |v><v| (no normalization applied).
    static Operator outer(const Vector &v) { return Operator(v * v.adjoint()); }

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
    [[nodiscard]] const Matrix &matrix() const { return mat_; }
    [[nodiscard]] Complex operator()(std::size_t r, std::size_t c) const {
        return mat_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    [[nodiscard]] Complex trace() const { return mat_.trace(); }
    [[nodiscard]] Operator adjoint() const { return Operator(mat_.adjoint()); }
    /// (A + A^dagger) / 2
    [[nodiscard]] Operator hermitian_part() const { return Operator((mat_ + mat_.adjoint()) * 0.5); }
    /// Frobenius (Hilbert-Schmidt) norm.
    [[nodiscard]] double norm() const { return mat_.norm(); }

    friend Operator operator+(const Operator &a, const Operator &b) {
        check_same_dim(a, b);
        return Operator(a.mat_ + b.mat_);
    }
    friend Operator operator-(const Operator &a, const Operator &b) {
        check_same_dim(a, b);
        return Operator(a.mat_ - b.mat_);
    }
    friend Operator operator*(const Operator &a, const Operator &b) {
        check_same_dim(a, b);
        return Operator(a.mat_ * b.mat_);
    }
    friend Operator operator*(Complex s, const Operator &a) { return Operator(s * a.mat_); }
    friend Operator operator*(double s, const Operator &a) { return Operator(s * a.mat_); }

    static void check_same_dim(const Operator &a, const Operator &b) {
        if (a.dim() != b.dim()) {
            throw DimensionError("operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
                                 std::to_string(b.dim()));
        }
    }

  private:
    Matrix mat_;
};

/// Hilbert-Schmidt inner product Tr(A^dagger B).
inline Complex hs_inner(const Operator &a, const Operator &b) {
    Operator::check_same_dim(a, b);
    return (a.matrix().adjoint() * b.matrix()).trace();
}

inline double max_abs_diff(const Operator &a, const Operator &b) {
    Operator::check_same_dim(a, b);
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Operator &op, double tol = kDefaultTol) {
    return (op.matrix() - op.matrix().adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Ascending eigenvalues of the Hermitian part. This is the single spectral
/// primitive used by every positivity check.
inline Eigen::VectorXd hermitian_eigenvalues(const Operator &op) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.hermitian_part().matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct EigenDecomposition {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // columns
};

inline EigenDecomposition hermitian_eigen(const Operator &op) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.hermitian_part().matrix());
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const Operator &op) { return hermitian_eigenvalues(op).minCoeff(); }

inline bool is_positive(const Operator &op, double tol = kDefaultTol) {
    return is_hermitian(op, tol) && min_eigenvalue(op) >= -tol;
}

inline bool is_projector(const Operator &op, double tol = kDefaultTol) {
    if (!is_positive(op, tol)) {
        return false;
    }
    return (op.matrix() * op.matrix() - op.matrix()).norm() <= tol;
}

/// Number of eigenvalues above tol.
inline std::size_t rank(const Operator &op, double tol = kDefaultTol) {
    const auto ev = hermitian_eigenvalues(op);
    return static_cast<std::size_t>((ev.array() > tol).count());
}

inline bool is_unitary(const Operator &op, double tol = kDefaultTol) {
    const auto n = op.matrix().rows();
    return (op.matrix().adjoint() * op.matrix() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

/// Kronecker product; the first factor is the slow index.
inline Operator tensor(const Operator &a, const Operator &b) {
    const auto na = a.matrix().rows();
    const auto nb = b.matrix().rows();
    Matrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < na; ++j) {
            out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
        }
    }
    return Operator(std::move(out));
}

/// Bipartite dimensions (first, second) of a product space.
struct SubsystemDims {
    std::size_t first;
    std::size_t second;
};

/**
 * Trace out one factor of a bipartite operator.
 *
 * @param keep 0 keeps the first factor, 1 keeps the second.
 */
inline Operator partial_trace(const Operator &op, SubsystemDims dims, int keep) {
    if (dims.first == 0 || dims.second == 0 || dims.first * dims.second != op.dim()) {
        throw DimensionError("partial_trace: " + std::to_string(dims.first) + "x" + std::to_string(dims.second) +
                             " does not factor dimension " + std::to_string(op.dim()));
    }
    if (keep != 0 && keep != 1) {
        throw std::invalid_argument("partial_trace: keep must be 0 or 1");
    }
    const auto d0 = static_cast<Eigen::Index>(dims.first);
    const auto d1 = static_cast<Eigen::Index>(dims.second);
    const Matrix &m = op.matrix();
    if (keep == 0) {
        Matrix out = Matrix::Zero(d0, d0);
        for (Eigen::Index i = 0; i < d0; ++i)
            for (Eigen::Index j = 0; j < d0; ++j)
                for (Eigen::Index k = 0; k < d1; ++k)
                    out(i, j) += m(i * d1 + k, j * d1 + k);
        return Operator(std::move(out));
    }
    Matrix out = Matrix::Zero(d1, d1);
    for (Eigen::Index i = 0; i < d1; ++i)
        for (Eigen::Index j = 0; j < d1; ++j)
            for (Eigen::Index k = 0; k < d0; ++k)
                out(i, j) += m(k * d1 + i, k * d1 + j);
    return Operator(std::move(out));
}

/**
 * Density operator: Hermitian, positive semidefinite, unit trace.
 */
class State {
  public:
    explicit State(Operator op, double tol = kDefaultTol) : op_(std::move(op)) {
        if (!is_hermitian(op_, tol)) {
            throw ValidationError("state is not Hermitian");
        }
        const double lo = min_eigenvalue(op_);
        if (lo < -tol) {
            throw ValidationError("state has negative eigenvalue " + std::to_string(lo));
        }
        const Complex tr = op_.trace();
        if (std::abs(tr - Complex(1.0, 0.0)) > tol) {
            throw ValidationError("state trace is " + std::to_string(tr.real()) + ", expected 1");
        }
    }

    /// |psi><psi| / <psi|psi>
    static State pure(const Vector &psi) {
        const double n2 = psi.squaredNorm();
        if (n2 == 0.0) {
            throw ValidationError("pure state from zero vector");
        }
        return State(Operator(psi * psi.adjoint() / n2));
    }
    static State maximally_mixed(std::size_t dim) {
        return State((1.0 / static_cast<double>(dim)) * Operator::identity(dim));
    }

    [[nodiscard]] const Operator &op() const { return op_; }
    [[nodiscard]] std::size_t dim() const { return op_.dim(); }

  private:
    Operator op_;
};

/// Re Tr(rho A)
inline double expectation(const State &rho, const Operator &a) {
    Operator::check_same_dim(rho.op(), a);
    return (rho.op().matrix() * a.matrix()).trace().real();
}

inline double trace_distance(const State &a, const State &b) {
    const auto ev = hermitian_eigenvalues(a.op() - b.op());
    return 0.5 * ev.cwiseAbs().sum();
}

/// Uncertainty product Delta A * Delta B together with the commutator bound
/// |Tr rho [A,B]| / 2.
struct UncertaintyComparison {
    double product = 0.0;
    double bound = 0.0;
};

inline UncertaintyComparison commutator_bound(const Operator &a, const Operator &b, const State &rho,
                                              double tol = kDefaultTol) {
    if (!is_hermitian(a, tol) || !is_hermitian(b, tol)) {
        throw ValidationError("commutator_bound: observables must be Hermitian");
    }
    Operator::check_same_dim(a, b);
    Operator::check_same_dim(a, rho.op());

    const auto spread = [&](const Operator &x) {
        const double mean = expectation(rho, x);
        const double var = expectation(rho, x * x) - mean * mean;
        return std::sqrt(std::max(var, 0.0));
    };
    const Operator comm = a * b - b * a;
    const Complex c = (rho.op().matrix() * comm.matrix()).trace();

    UncertaintyComparison out{spread(a) * spread(b), 0.5 * std::abs(c)};
    if (out.product < out.bound - tol) {
        throw ConsistencyError("uncertainty product below commutator bound");
    }
    return out;
}

} // namespace povm

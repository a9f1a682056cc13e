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
 * Generalized (POVM) and standard (PVM) measures, the generalized Born rule,
 * POVM synthesis from an object-apparatus interaction and state
 * reconstruction from an informationally complete POVM.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "povm/core.hpp"
#include "povm/probability.hpp"

namespace povm {

/// Every invariant a candidate measure violates; empty means valid.
inline std::vector<std::string> measure_violations(const std::vector<std::string> &labels,
                                                   const std::vector<Operator> &elements,
                                                   const std::optional<Shape> &index_shape,
                                                   double tol = kDefaultTol) {
    std::vector<std::string> out;
    if (elements.empty()) {
        out.emplace_back("measure has no elements");
        return out;
    }
    if (labels.size() != elements.size()) {
        out.push_back("label count " + std::to_string(labels.size()) + " != element count " +
                      std::to_string(elements.size()));
    }
    if (index_shape && (index_shape->empty() || shape_size(*index_shape) != elements.size())) {
        out.push_back("index_shape does not cover " + std::to_string(elements.size()) + " elements");
    }
    const std::size_t dim = elements.front().dim();
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    bool dims_ok = true;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto &e = elements[i];
        const std::string name = i < labels.size() ? "'" + labels[i] + "'" : "#" + std::to_string(i);
        if (e.dim() != dim) {
            out.push_back("element " + name + " has dimension " + std::to_string(e.dim()) + ", expected " +
                          std::to_string(dim));
            dims_ok = false;
            continue;
        }
        if (!is_hermitian(e, tol)) {
            out.push_back("element " + name + " is not Hermitian");
        } else if (const double lo = min_eigenvalue(e); lo < -tol) {
            std::ostringstream os;
            os << "element " << name << " is not positive (min eigenvalue " << lo << ")";
            out.push_back(os.str());
        }
        sum += e.matrix();
    }
    if (dims_ok) {
        const double dev =
            (sum - Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))).cwiseAbs().maxCoeff();
        if (dev > tol) {
            std::ostringstream os;
            os << "elements do not sum to identity (max deviation " << dev << ")";
            out.push_back(os.str());
        }
    }
    return out;
}

inline std::string join_violations(const std::vector<std::string> &v) {
    std::string s;
    for (const auto &x : v) {
        if (!s.empty()) s += "; ";
        s += x;
    }
    return s;
}

/**
 * Positive operator-valued measure: positive elements summing to identity.
 *
 * Multi-index measures (bivariate, quadrivariate) are stored flat in row-major
 * order together with their index shape. Labels of multi-index elements are
 * the per-axis labels joined with ','.
 */
class PovmMeasure {
  public:
    PovmMeasure(std::vector<std::string> labels, std::vector<Operator> elements,
                std::optional<Shape> index_shape = std::nullopt, double tol = kDefaultTol)
        : labels_(std::move(labels)), elements_(std::move(elements)), index_shape_(std::move(index_shape)) {
        if (auto v = measure_violations(labels_, elements_, index_shape_, tol); !v.empty()) {
            throw ValidationError("invalid POVM: " + join_violations(v));
        }
    }

    /// Numeric labels "1".."n".
    static PovmMeasure from_elements(std::vector<Operator> elements, double tol = kDefaultTol) {
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < elements.size(); ++i) labels.push_back(std::to_string(i + 1));
        return PovmMeasure(std::move(labels), std::move(elements), std::nullopt, tol);
    }

    [[nodiscard]] std::size_t dim() const { return elements_.front().dim(); }
    [[nodiscard]] std::size_t size() const { return elements_.size(); }
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }
    [[nodiscard]] const std::vector<Operator> &elements() const { return elements_; }
    [[nodiscard]] const Operator &operator[](std::size_t i) const { return elements_.at(i); }
    [[nodiscard]] const std::optional<Shape> &index_shape() const { return index_shape_; }
    /// index_shape, or {size()} for a plain measure.
    [[nodiscard]] Shape shape() const { return index_shape_ ? *index_shape_ : Shape{elements_.size()}; }
    [[nodiscard]] const Operator &at(const std::vector<std::size_t> &idx) const {
        return elements_[flat_index(shape(), idx)];
    }

  private:
    std::vector<std::string> labels_;
    std::vector<Operator> elements_;
    std::optional<Shape> index_shape_;
};

/// POVM violations plus projector and pairwise-orthogonality checks.
inline std::vector<std::string> pvm_violations(const PovmMeasure &m, double tol = kDefaultTol) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!is_projector(m[i], tol)) {
            out.push_back("element '" + m.labels()[i] + "' is not a projector");
        }
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            if (std::abs(hs_inner(m[i], m[j])) > tol) {
                out.push_back("elements '" + m.labels()[i] + "' and '" + m.labels()[j] + "' are not orthogonal");
            }
        }
    }
    return out;
}

/// Projection-valued measure.
class PvmMeasure {
  public:
    explicit PvmMeasure(PovmMeasure m, double tol = kDefaultTol) : povm_(std::move(m)) {
        if (auto v = pvm_violations(povm_, tol); !v.empty()) {
            throw ValidationError("invalid PVM: " + join_violations(v));
        }
    }
    PvmMeasure(std::vector<std::string> labels, std::vector<Operator> elements, double tol = kDefaultTol)
        : PvmMeasure(PovmMeasure(std::move(labels), std::move(elements), std::nullopt, tol), tol) {}

    [[nodiscard]] const PovmMeasure &povm() const { return povm_; }
    operator const PovmMeasure &() const { return povm_; } // NOLINT(google-explicit-constructor)
    [[nodiscard]] std::size_t dim() const { return povm_.dim(); }
    [[nodiscard]] std::size_t size() const { return povm_.size(); }
    [[nodiscard]] const Operator &operator[](std::size_t i) const { return povm_[i]; }
    [[nodiscard]] const std::vector<std::string> &labels() const { return povm_.labels(); }

    /// All projectors rank one.
    [[nodiscard]] bool is_maximal(double tol = kDefaultTol) const {
        for (const auto &e : povm_.elements()) {
            if (rank(e, tol) != 1) return false;
        }
        return true;
    }

  private:
    PovmMeasure povm_;
};

/// PVM of the computational basis of dimension `dim`.
inline PvmMeasure computational_pvm(std::size_t dim) {
    std::vector<Operator> el;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> d(dim, 0.0);
        d[k] = 1.0;
        el.push_back(Operator::diagonal(d));
        labels.push_back(std::to_string(k));
    }
    return PvmMeasure(std::move(labels), std::move(el));
}

/**
 * Sum a multi-index measure over every axis not in `keep`.
 *
 * The result carries the kept axes as its index shape (or none, for a single
 * kept axis) and labels built from the kept per-axis label components.
 */
inline PovmMeasure marginal(const PovmMeasure &m, const std::vector<std::size_t> &keep) {
    const Shape shape = m.shape();
    Shape reduced;
    const auto map = marginal_map(shape, keep, reduced);
    const std::size_t n = shape_size(reduced);

    std::vector<Operator> el(n, Operator::zero(m.dim()));
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < m.size(); ++i) {
        el[map[i]] = el[map[i]] + m[i];
        if (labels[map[i]].empty()) {
            std::vector<std::string> parts;
            std::stringstream ss(m.labels()[i]);
            for (std::string tok; std::getline(ss, tok, ',');) parts.push_back(tok);
            std::string lab;
            const auto idx = unflatten(shape, i);
            for (auto ax : keep) {
                if (!lab.empty()) lab += ",";
                lab += parts.size() == shape.size() ? parts[ax] : std::to_string(idx[ax]);
            }
            labels[map[i]] = lab;
        }
    }
    std::optional<Shape> out_shape;
    if (reduced.size() > 1) out_shape = reduced;
    return PovmMeasure(std::move(labels), std::move(el), std::move(out_shape));
}

/// p_m = Tr(rho M_m), indexed like the measure.
inline ProbabilityTable born_probabilities(const PovmMeasure &measure, const State &rho, double tol = kDefaultTol) {
    if (measure.dim() != rho.dim()) {
        throw DimensionError("born_probabilities: measure dimension " + std::to_string(measure.dim()) +
                             " vs state dimension " + std::to_string(rho.dim()));
    }
    std::vector<double> p;
    p.reserve(measure.size());
    for (std::size_t i = 0; i < measure.size(); ++i) {
        const double v = expectation(rho, measure[i]);
        if (v < -tol) {
            throw ConsistencyError("negative probability " + std::to_string(v) + " for outcome '" +
                                   measure.labels()[i] + "'");
        }
        p.push_back(v);
    }
    return ProbabilityTable(measure.shape(), std::move(p), tol);
}

/**
 * Object-apparatus interaction: a coupling unitary U on object (x) apparatus,
 * the initial apparatus state and a pointer PVM on the apparatus. The object
 * is the first tensor factor. U stands for exp(-i H T / hbar).
 */
class InstrumentModel {
  public:
    InstrumentModel(State apparatus_state, Operator coupling, PvmMeasure pointer, std::size_t object_dim,
                    double tol = kDefaultTol)
        : apparatus_(std::move(apparatus_state)), coupling_(std::move(coupling)), pointer_(std::move(pointer)),
          object_dim_(object_dim) {
        const std::size_t adim = apparatus_.dim();
        if (pointer_.dim() != adim) {
            throw DimensionError("pointer PVM does not act on the apparatus dimension");
        }
        if (coupling_.dim() != object_dim_ * adim) {
            throw DimensionError("coupling dimension " + std::to_string(coupling_.dim()) + " != " +
                                 std::to_string(object_dim_) + "*" + std::to_string(adim));
        }
        if (!is_unitary(coupling_, tol)) {
            throw ValidationError("coupling is not unitary");
        }
    }

    [[nodiscard]] const State &apparatus_state() const { return apparatus_; }
    [[nodiscard]] const Operator &coupling() const { return coupling_; }
    [[nodiscard]] const PvmMeasure &pointer() const { return pointer_; }
    [[nodiscard]] std::size_t object_dim() const { return object_dim_; }
    [[nodiscard]] std::size_t apparatus_dim() const { return apparatus_.dim(); }

  private:
    State apparatus_;
    Operator coupling_;
    PvmMeasure pointer_;
    std::size_t object_dim_;
};

/// M_m = Tr_a[(I (x) rho_a) U^dagger (I (x) E_m) U].
inline PovmMeasure povm_from_instrument(const InstrumentModel &model, double tol = kDefaultTol) {
    const auto id_o = Operator::identity(model.object_dim());
    const Operator weight = tensor(id_o, model.apparatus_state().op());
    const Operator &u = model.coupling();
    const Operator u_dag = u.adjoint();
    const SubsystemDims dims{model.object_dim(), model.apparatus_dim()};

    std::vector<Operator> el;
    el.reserve(model.pointer().size());
    for (std::size_t m = 0; m < model.pointer().size(); ++m) {
        const Operator heis = u_dag * tensor(id_o, model.pointer()[m]) * u;
        el.push_back(partial_trace(weight * heis, dims, 0).hermitian_part());
    }
    return PovmMeasure(model.pointer().labels(), std::move(el), std::nullopt, tol);
}

namespace detail {

/// K x d^2 matrix whose row k, applied to the column-major vec(rho), gives
/// Tr(rho M_k).
inline Matrix frame_matrix(const PovmMeasure &m) {
    const auto d = static_cast<Eigen::Index>(m.dim());
    Matrix f(static_cast<Eigen::Index>(m.size()), d * d);
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Matrix &e = m[k].matrix();
        // Tr(rho E) = sum_{ij} rho_ij E_ji; vec index of rho_ij is j*d + i.
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index i = 0; i < d; ++i)
                f(static_cast<Eigen::Index>(k), j * d + i) = e(j, i);
    }
    return f;
}

} // namespace detail

/// Rank of the measure's elements as vectors in Hilbert-Schmidt space.
inline std::size_t frame_rank(const PovmMeasure &m, double tol = kDefaultTol) {
    Eigen::JacobiSVD<Matrix> svd(detail::frame_matrix(m));
    return static_cast<std::size_t>((svd.singularValues().array() > tol).count());
}

/// Informational completeness: elements span the d^2-dimensional operator space.
inline bool is_complete(const PovmMeasure &m, double tol = kDefaultTol) {
    return frame_rank(m, tol) == m.dim() * m.dim();
}

class IncompleteMeasureError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Probabilities that no density operator reproduces.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Linear-inversion state reconstruction from an informationally complete
 * POVM. The least-squares solution is Hermitized; a result that is not a
 * density operator, or that fails to reproduce the input, raises
 * InfeasibleError instead of being projected back.
 */
inline State reconstruct_state(const PovmMeasure &m, const ProbabilityTable &probs, double tol = kDefaultTol) {
    if (!is_complete(m, tol)) {
        throw IncompleteMeasureError("reconstruct_state: measure is not informationally complete");
    }
    if (probs.size() != m.size()) {
        throw DimensionError("reconstruct_state: probability count does not match the measure");
    }
    const auto d = static_cast<Eigen::Index>(m.dim());
    const Matrix f = detail::frame_matrix(m);
    Vector p(static_cast<Eigen::Index>(probs.size()));
    for (std::size_t k = 0; k < probs.size(); ++k) p(static_cast<Eigen::Index>(k)) = probs[k];

    const Vector vec_rho = f.completeOrthogonalDecomposition().solve(p);
    const double residual = (f * vec_rho - p).cwiseAbs().maxCoeff();
    if (residual > 1e-8) {
        throw InfeasibleError("reconstruct_state: probabilities are inconsistent with the measure (residual " +
                              std::to_string(residual) + ")");
    }
    const Matrix rho = Eigen::Map<const Matrix>(vec_rho.data(), d, d);
    const Operator herm = Operator(rho).hermitian_part();
    const double lo = min_eigenvalue(herm);
    if (lo < -tol) {
        throw InfeasibleError("reconstruct_state: inverted operator has negative eigenvalue " + std::to_string(lo));
    }
    return State(herm, std::max(tol, 1e-8));
}

} // namespace povm

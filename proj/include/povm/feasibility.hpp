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
 * Joint-distribution problem for four dichotomic variables A, A', B, B'
 * observed pairwise: does a table p(a, a', b, b') exist whose marginals are
 * the four given bivariate tables?
 *
 * Two independent deciders are kept side by side: a phase-1 simplex on the
 * 16-variable marginal equations, and the eight CHSH inequalities. They must
 * agree outside a boundary band of width tol around |S| = 2.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "povm/aspect.hpp"
#include "povm/core.hpp"
#include "povm/probability.hpp"

namespace povm::fine {

using aspect::BivariateQuad;
using aspect::ChshReport;

inline const std::array<std::string, 4> &pair_names() {
    static const std::array<std::string, 4> names{"AB", "AB'", "A'B", "A'B'"};
    return names;
}

/**
 * Four 2x2 tables for the pairs (A,B), (A,B'), (A',B), (A',B'). Axis 0 of each
 * table is the A-side variable, axis 1 the B-side variable.
 */
class MarginalSet {
  public:
    explicit MarginalSet(BivariateQuad tables) : tables_(std::move(tables)) {
        for (const auto &t : tables_) {
            if (t.shape() != Shape{2, 2}) {
                throw DimensionError("marginal set: every table must be 2x2");
            }
        }
    }
    [[nodiscard]] const BivariateQuad &tables() const { return tables_; }
    [[nodiscard]] const ProbabilityTable &operator[](std::size_t k) const { return tables_.at(k); }

  private:
    BivariateQuad tables_;
};

struct NoSignalingReport {
    /// Max discrepancy of the single-variable marginals of A, A', B, B'.
    std::array<double, 4> discrepancy{};
    double max_discrepancy = 0.0;
    bool pass = true;
};

inline NoSignalingReport check_no_signaling(const MarginalSet &m, double tol = kDefaultTol) {
    const auto first = [&](std::size_t k) { return m[k].marginal({0}); };
    const auto second = [&](std::size_t k) { return m[k].marginal({1}); };
    NoSignalingReport r;
    r.discrepancy[0] = first(0).max_abs_diff(first(1));   // A
    r.discrepancy[1] = first(2).max_abs_diff(first(3));   // A'
    r.discrepancy[2] = second(0).max_abs_diff(second(2)); // B
    r.discrepancy[3] = second(1).max_abs_diff(second(3)); // B'
    r.max_discrepancy = *std::max_element(r.discrepancy.begin(), r.discrepancy.end());
    r.pass = r.max_discrepancy <= tol;
    return r;
}

class SignalingError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

struct Phase1Result {
    bool feasible = false;
    double infeasibility = 0.0; ///< optimal sum of artificial variables
    Eigen::VectorXd x;
    int pivots = 0;
};

/**
 * Phase-1 simplex for {x >= 0 : A x = b} on a dense tableau with Bland's
 * rule. `A` must have full row rank.
 */
inline Phase1Result phase1_simplex(const Eigen::MatrixXd &a, const Eigen::VectorXd &b, double zero_tol = 1e-12) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const Eigen::Index rhs = n + m;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sign = b(i) < 0.0 ? -1.0 : 1.0;
        t.block(i, 0, 1, n) = sign * a.row(i);
        t(i, n + i) = 1.0;
        t(i, rhs) = sign * b(i);
        basis[static_cast<std::size_t>(i)] = n + i;
    }
    // Reduced costs of the phase-1 objective (sum of artificials).
    for (Eigen::Index i = 0; i < m; ++i) {
        t.block(m, 0, 1, n) -= t.block(i, 0, 1, n);
        t(m, rhs) -= t(i, rhs);
    }

    constexpr double pivot_eps = 1e-12;
    Phase1Result res;
    for (int iter = 0; iter < 10000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (t(m, j) < -pivot_eps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) <= pivot_eps) continue;
            const double ratio = t(i, rhs) / t(i, enter);
            if (leave < 0 || ratio < best - 1e-15 ||
                (std::abs(ratio - best) <= 1e-15 &&
                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break; // unbounded cannot happen for phase 1
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
        }
        basis[static_cast<std::size_t>(leave)] = enter;
        ++res.pivots;
    }
    res.infeasibility = -t(m, rhs);
    res.feasible = res.infeasibility <= zero_tol;
    res.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto j = basis[static_cast<std::size_t>(i)];
        if (j < n) res.x(j) = std::max(t(i, rhs), 0.0);
    }
    return res;
}

/// Positions of (A-side, B-side) variables within the joint index (a, a', b, b').
inline constexpr std::array<std::pair<std::size_t, std::size_t>, 4> kPairAxes{
    {{0, 2}, {0, 3}, {1, 2}, {1, 3}}};

/// The 16 marginal equations (rows) over the 16 joint entries, with targets.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> marginal_equations(const MarginalSet &m) {
    const Shape joint{2, 2, 2, 2};
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(16, 16);
    Eigen::VectorXd b(16);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto [ax, bx] = kPairAxes[k];
        for (std::size_t cell = 0; cell < 4; ++cell) {
            const auto row = static_cast<Eigen::Index>(4 * k + cell);
            b(row) = m[k][cell];
            for (std::size_t e = 0; e < 16; ++e) {
                const auto idx = unflatten(joint, e);
                if (idx[ax] * 2 + idx[bx] == cell) a(row, static_cast<Eigen::Index>(e)) = 1.0;
            }
        }
    }
    return {a, b};
}

/// Greedy maximal set of linearly independent rows, in order.
inline std::vector<Eigen::Index> independent_rows(const Eigen::MatrixXd &a) {
    std::vector<Eigen::Index> keep;
    Eigen::MatrixXd acc(0, a.cols());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        Eigen::MatrixXd trial(acc.rows() + 1, a.cols());
        trial << acc, a.row(i);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
        lu.setThreshold(1e-10);
        if (lu.rank() > r) {
            acc = std::move(trial);
            keep.push_back(i);
            r = lu.rank();
        }
    }
    return keep;
}

} // namespace detail

/// CHSH characterization: a joint exists iff every CHSH value lies in [-2, 2].
enum class Verdict { Feasible, Infeasible, Boundary };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Boundary: return "boundary";
    }
    return "?";
}

inline Verdict chsh_decision(const ChshReport &r, double tol = kDefaultTol) {
    if (std::abs(r.max_abs - 2.0) <= tol) return Verdict::Boundary;
    return r.max_abs < 2.0 ? Verdict::Feasible : Verdict::Infeasible;
}

struct ChshCertificate {
    /// Index into ChshReport::values of the violated inequality.
    std::size_t placement = 0;
    double value = 0.0;
};

struct JointDecision {
    Verdict verdict = Verdict::Feasible;
    /// Joint table over (a, a', b, b') when the simplex found one.
    std::optional<ProbabilityTable> witness;
    /// Max |marginal(witness) - given| over all 16 cells.
    double witness_residual = 0.0;
    std::optional<ChshCertificate> certificate;
    ChshReport chsh;
    double lp_infeasibility = 0.0;
    bool lp_feasible = false;
};

/**
 * Decide whether the four tables are marginals of one joint distribution.
 *
 * Throws SignalingError if the tables disagree on a shared single-variable
 * marginal (the question is then ill-posed), and ConsistencyError if the
 * simplex and the CHSH characterization disagree outside the boundary band.
 */
inline JointDecision joint_exists(const MarginalSet &m, double tol = kDefaultTol) {
    if (const auto ns = check_no_signaling(m, tol); !ns.pass) {
        throw SignalingError("joint_exists: no-signaling violated (discrepancy " +
                             std::to_string(ns.max_discrepancy) + ")");
    }
    JointDecision d;
    d.chsh = aspect::chsh_value(m.tables());
    const Verdict by_chsh = chsh_decision(d.chsh, tol);

    auto [a_full, b_full] = detail::marginal_equations(m);
    const auto rows = detail::independent_rows(a_full);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 16);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        a.row(static_cast<Eigen::Index>(k)) = a_full.row(rows[k]);
        b(static_cast<Eigen::Index>(k)) = b_full(rows[k]);
    }
    const auto lp = detail::phase1_simplex(a, b);
    d.lp_feasible = lp.feasible;
    d.lp_infeasibility = lp.infeasibility;

    if (by_chsh != Verdict::Boundary && (by_chsh == Verdict::Feasible) != lp.feasible) {
        throw ConsistencyError("joint_exists: simplex (" + std::string(lp.feasible ? "feasible" : "infeasible") +
                               ") disagrees with CHSH (max " + std::to_string(d.chsh.max_abs) + ")");
    }

    if (lp.feasible) {
        std::vector<double> p(lp.x.data(), lp.x.data() + lp.x.size());
        d.witness_residual = (a_full * lp.x - b_full).cwiseAbs().maxCoeff();
        d.witness = ProbabilityTable(Shape{2, 2, 2, 2}, std::move(p), std::max(tol, 1e-9));
    } else {
        d.certificate = ChshCertificate{d.chsh.argmax, d.chsh.values[d.chsh.argmax]};
    }
    d.verdict = by_chsh == Verdict::Boundary ? Verdict::Boundary
                                              : (lp.feasible ? Verdict::Feasible : Verdict::Infeasible);
    return d;
}

/// The four bivariate tables a joint (a, a', b, b') table induces.
inline MarginalSet marginals_of_joint(const ProbabilityTable &joint) {
    if (joint.shape() != Shape{2, 2, 2, 2}) {
        throw DimensionError("marginals_of_joint: expected a 2x2x2x2 table");
    }
    return MarginalSet(aspect::bivariate_marginals(joint));
}

/**
 * Random no-signaling box: uniform single-variable biases and, per pair, a
 * correlator drawn uniformly from the range that keeps all four cells
 * nonnegative. With probability `extreme` the correlator is pushed to an end
 * of its range, which populates the region of strong CHSH violation.
 */
template <class Rng>
MarginalSet sample_no_signaling(Rng &rng, double extreme = 0.25) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::array<double, 4> bias{}; // A, A', B, B'
    for (auto &x : bias) x = u01(rng) < 0.3 ? 0.0 : unit(rng);

    BivariateQuad tables{ProbabilityTable::uniform({2, 2}), ProbabilityTable::uniform({2, 2}),
                         ProbabilityTable::uniform({2, 2}), ProbabilityTable::uniform({2, 2})};
    constexpr std::array<std::pair<std::size_t, std::size_t>, 4> vars{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
    for (std::size_t k = 0; k < 4; ++k) {
        const double mx = bias[vars[k].first];
        const double my = bias[vars[k].second];
        const double lo = -1.0 + std::abs(mx + my);
        const double hi = 1.0 - std::abs(mx - my);
        double e = lo + (hi - lo) * u01(rng);
        if (u01(rng) < extreme) e = u01(rng) < 0.5 ? lo : hi;
        std::vector<double> p(4);
        for (std::size_t cell = 0; cell < 4; ++cell) {
            const double x = cell / 2 == 0 ? 1.0 : -1.0;
            const double y = cell % 2 == 0 ? 1.0 : -1.0;
            p[cell] = std::max(0.25 * (1.0 + x * mx + y * my + x * y * e), 0.0);
        }
        const double s = p[0] + p[1] + p[2] + p[3];
        for (auto &v : p) v /= s;
        tables[k] = ProbabilityTable({2, 2}, std::move(p));
    }
    return MarginalSet(std::move(tables));
}

} // namespace povm::fine

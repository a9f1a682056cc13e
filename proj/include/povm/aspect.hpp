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
 * Generalized Aspect experiment. Each photon of a pair meets a beam splitter
 * of transmissivity gamma_i; the transmitted beam goes to a polarizer at
 * theta_i with detector D_i, the reflected one to a polarizer at theta'_i
 * with detector D'_i.
 *
 * Conventions:
 *  - E^theta_+ projects onto (cos theta, sin theta), E^theta_- onto
 *    (-sin theta, cos theta).
 *  - Per arm, m = click at D_i and n = click at D'_i; index 0 is "+" (click),
 *    index 1 is "-" (no click). Outcome values for correlators are +1 / -1.
 *  - Quadrivariate index order is (m1, n1, m2, n2).
 *  - The default two-photon state is the singlet (|HV> - |VH>)/sqrt(2), whose
 *    polarization correlator is -cos 2(theta_1 - theta_2).
 */

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "povm/core.hpp"
#include "povm/measurement.hpp"
#include "povm/probability.hpp"

namespace povm::aspect {

struct Angles {
    double theta1 = 0.0;
    double theta1p = 0.0;
    double theta2 = 0.0;
    double theta2p = 0.0;
};

/// (0, pi/4, pi/8, 3 pi/8): maximal CHSH violation for the singlet.
inline Angles tsirelson_angles() {
    constexpr double pi = 3.14159265358979323846;
    return {0.0, pi / 4.0, pi / 8.0, 3.0 * pi / 8.0};
}

inline State singlet_state() {
    Vector psi = Vector::Zero(4);
    psi(1) = 1.0 / std::sqrt(2.0);
    psi(2) = -1.0 / std::sqrt(2.0);
    return State::pure(psi);
}

struct AspectConfig {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    Angles angles;
    State state = singlet_state();

    void validate() const {
        for (double g : {gamma1, gamma2}) {
            if (!(g >= 0.0 && g <= 1.0)) {
                throw std::out_of_range("mirror transmissivity must lie in [0, 1], got " + std::to_string(g));
            }
        }
        if (state.dim() != 4) {
            throw DimensionError("two-photon state must be 4-dimensional");
        }
    }
};

/// {E^theta_+, E^theta_-}
inline PvmMeasure polarization_pvm(double theta) {
    Vector plus(2), minus(2);
    plus << std::cos(theta), std::sin(theta);
    minus << -std::sin(theta), std::cos(theta);
    return PvmMeasure({"+", "-"}, {Operator::outer(plus), Operator::outer(minus)});
}

inline const std::vector<std::string> &arm_labels() {
    static const std::vector<std::string> labels{"+,+", "+,-", "-,+", "-,-"};
    return labels;
}

/**
 * Bivariate POVM of one arm:
 *   R = [[ O,                  gamma E^theta_+                            ],
 *        [ (1-gamma) E^theta'_+, gamma E^theta_- + (1-gamma) E^theta'_- ]]
 */
inline PovmMeasure arm_povm(double gamma, double theta, double theta_p) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::out_of_range("mirror transmissivity must lie in [0, 1], got " + std::to_string(gamma));
    }
    const auto e = polarization_pvm(theta);
    const auto ep = polarization_pvm(theta_p);
    return PovmMeasure(arm_labels(),
                       {Operator::zero(2), gamma * e[0], (1.0 - gamma) * ep[0], gamma * e[1] + (1.0 - gamma) * ep[1]},
                       Shape{2, 2});
}

/// Nonideality matrix of the m-marginal against {E^theta_+-}: [[g, 0], [1-g, 1]].
inline Eigen::MatrixXd expected_m_nonideality(double gamma) {
    Eigen::MatrixXd l(2, 2);
    l << gamma, 0.0, 1.0 - gamma, 1.0;
    return l;
}

/// Nonideality matrix of the n-marginal against {E^theta'_+-}: [[1-g, 0], [g, 1]].
inline Eigen::MatrixXd expected_n_nonideality(double gamma) {
    Eigen::MatrixXd l(2, 2);
    l << 1.0 - gamma, 0.0, gamma, 1.0;
    return l;
}

/// R_{m1 n1 m2 n2} = R^{gamma1}_{m1 n1} (x) R^{gamma2}_{m2 n2}
inline PovmMeasure quadrivariate_povm(const AspectConfig &cfg) {
    cfg.validate();
    const auto r1 = arm_povm(cfg.gamma1, cfg.angles.theta1, cfg.angles.theta1p);
    const auto r2 = arm_povm(cfg.gamma2, cfg.angles.theta2, cfg.angles.theta2p);
    std::vector<Operator> el;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            el.push_back(tensor(r1[i], r2[j]));
            labels.push_back(r1.labels()[i] + "," + r2.labels()[j]);
        }
    }
    return PovmMeasure(std::move(labels), std::move(el), Shape{2, 2, 2, 2});
}

/// p_{m1 n1 m2 n2} = Tr rho R^{gamma1}_{m1 n1} (x) R^{gamma2}_{m2 n2}
inline ProbabilityTable joint_probabilities(const AspectConfig &cfg) {
    return born_probabilities(quadrivariate_povm(cfg), cfg.state);
}

/// Axis positions in the quadrivariate table.
enum Axis : std::size_t { kM1 = 0, kN1 = 1, kM2 = 2, kN2 = 3 };

/// Four 2x2 tables in CHSH order (A,B), (A,B'), (A',B), (A',B').
using BivariateQuad = std::array<ProbabilityTable, 4>;

/**
 * Bivariate marginals of one quadrivariate table with A = m1, A' = n1,
 * B = m2, B' = n2.
 */
inline BivariateQuad bivariate_marginals(const ProbabilityTable &joint) {
    return {joint.marginal({kM1, kM2}), joint.marginal({kM1, kN2}), joint.marginal({kN1, kM2}),
            joint.marginal({kN1, kN2})};
}

/// Correlator sum_{xy} x y p(x, y) of a 2x2 table; index 0 -> +1, 1 -> -1.
inline double correlator(const ProbabilityTable &t) {
    if (t.shape() != Shape{2, 2}) {
        throw DimensionError("correlator: expected a 2x2 table");
    }
    return t[0] - t[1] - t[2] + t[3];
}

struct ChshReport {
    /// E(A,B), E(A,B'), E(A',B), E(A',B')
    std::array<double, 4> correlators{};
    /// E11 + E12 + E21 - E22
    double s = 0.0;
    /// Sign placements: entry k (k < 4) carries the minus sign on correlator
    /// 3 - k, entries 4..7 are their negations.
    std::array<double, 8> values{};
    double max_abs = 0.0;
    /// Index into `values` attaining max_abs.
    std::size_t argmax = 0;
};

inline ChshReport chsh_from_correlators(const std::array<double, 4> &e) {
    ChshReport r;
    r.correlators = e;
    const double total = e[0] + e[1] + e[2] + e[3];
    for (std::size_t k = 0; k < 4; ++k) {
        const double v = total - 2.0 * e[3 - k];
        r.values[k] = v;
        r.values[k + 4] = -v;
    }
    r.s = r.values[0];
    // values come in +- pairs, so the largest value is the largest magnitude
    for (std::size_t k = 1; k < 8; ++k)
        if (r.values[k] > r.values[r.argmax]) r.argmax = k;
    r.max_abs = r.values[r.argmax];
    return r;
}

/// CHSH combination of four bivariate tables in (A,B), (A,B'), (A',B), (A',B') order.
inline ChshReport chsh_value(const BivariateQuad &tables) {
    return chsh_from_correlators(
        {correlator(tables[0]), correlator(tables[1]), correlator(tables[2]), correlator(tables[3])});
}

/**
 * The four standard Aspect experiments, gamma pairs (1,1), (1,0), (0,1),
 * (0,0), each contributing the bivariate table of its two informative
 * detectors: (m1,m2), (m1,n2), (n1,m2), (n1,n2).
 */
inline BivariateQuad standard_composite(const Angles &angles, const State &state) {
    const auto table = [&](double g1, double g2, std::size_t ax1, std::size_t ax2) {
        return joint_probabilities(AspectConfig{g1, g2, angles, state}).marginal({ax1, ax2});
    };
    return {table(1.0, 1.0, kM1, kM2), table(1.0, 0.0, kM1, kN2), table(0.0, 1.0, kN1, kM2),
            table(0.0, 0.0, kN1, kN2)};
}

} // namespace povm::aspect

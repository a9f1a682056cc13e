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
 * Neutron interferometer with an absorber of transmissivity a in one path.
 * a = 1 is the pure interference measurement, a = 0 the pure which-path
 * measurement; in between the detectors realize a three-outcome POVM that
 * can be read as a joint nonideal measurement of the path and interference
 * observables.
 *
 * Representation: a two-dimensional path space with basis |+>, |->.
 * P_m projects onto the path states and Q_1, Q_2 onto
 * (|+> +- e^{i chi} |->) / sqrt(2).
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "povm/core.hpp"
#include "povm/measurement.hpp"
#include "povm/nonideality.hpp"

namespace povm::srt {

struct SrtConfig {
    double absorber = 1.0; ///< transmissivity a in [0, 1]
    double phase = 0.0;    ///< chi, radians

    void validate() const {
        if (!(absorber >= 0.0 && absorber <= 1.0)) {
            throw std::out_of_range("absorber transmissivity must lie in [0, 1], got " + std::to_string(absorber));
        }
        if (!std::isfinite(phase)) {
            throw std::out_of_range("phase must be finite");
        }
    }
};

inline PvmMeasure path_pvm() {
    return PvmMeasure({"+", "-"}, {Operator::diagonal({1.0, 0.0}), Operator::diagonal({0.0, 1.0})});
}

inline PvmMeasure interference_pvm(double chi) {
    const Complex ph = std::polar(1.0, chi);
    Vector q1(2), q2(2);
    q1 << 1.0, ph;
    q2 << 1.0, -ph;
    return PvmMeasure({"1", "2"}, {Operator::outer(q1 / std::sqrt(2.0)), Operator::outer(q2 / std::sqrt(2.0))});
}

/// {M_1, M_2, M_3}: detectors D_1, D_2 and absorption.
inline PovmMeasure srt_povm(const SrtConfig &cfg) {
    cfg.validate();
    const double a = cfg.absorber;
    const auto p = path_pvm();
    const auto q = interference_pvm(cfg.phase);
    const Operator common = p[0] + a * p[1];
    const Operator fringe = std::sqrt(a) * (q[0] - q[1]);
    return PovmMeasure({"1", "2", "3"},
                       {(0.5 * (common + fringe)).hermitian_part(), (0.5 * (common - fringe)).hermitian_part(),
                        (1.0 - a) * p[1]});
}

/**
 * R_mn with m in {+,-} (path-like) and n in {1,2} (interference-like):
 * R_{+n} = M_n, R_{-n} = M_3 / 2.
 */
inline PovmMeasure srt_bivariate(const SrtConfig &cfg) {
    const auto m = srt_povm(cfg);
    const Operator half3 = 0.5 * m[2];
    return PovmMeasure({"+,1", "+,2", "-,1", "-,2"}, {m[0], m[1], half3, half3}, Shape{2, 2});
}

/// J_lambda = [(1+a) ln(1+a) - a ln a] / 2
inline double closed_form_j_lambda(double a) { return 0.5 * (xlogx(1.0 + a) - xlogx(a)); }

/// J_mu = [2 ln 2 - (1+sqrt a) ln(1+sqrt a) - (1-sqrt a) ln(1-sqrt a)] / 2
inline double closed_form_j_mu(double a) {
    const double s = std::sqrt(a);
    return 0.5 * (2.0 * std::log(2.0) - xlogx(1.0 + s) - xlogx(1.0 - s));
}

struct TradeoffRow {
    double a = 0.0;
    double j_lambda = 0.0;
    double j_mu = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    double j_lambda_closed = 0.0;
    double j_mu_closed = 0.0;
};

/// One trade-off point through the generic pipeline (bivariate POVM ->
/// nonideality fit -> entropy), with the closed forms alongside.
inline TradeoffRow tradeoff_point(double a, double chi) {
    const SrtConfig cfg{a, chi};
    const auto biv = srt_bivariate(cfg);
    const auto report = check_martens(biv, path_pvm(), interference_pvm(chi));
    return {a, report.j_lambda, report.j_mu, report.bound, report.slack, closed_form_j_lambda(a), closed_form_j_mu(a)};
}

/// Evenly spaced grid over [0, 1].
inline std::vector<double> unit_grid(std::size_t points) {
    if (points < 2) {
        throw std::invalid_argument("grid needs at least 2 points");
    }
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k) g[k] = static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
}

/**
 * Evaluate the grid, optionally on `jobs` worker threads. Output order
 * follows the grid.
 */
inline std::vector<TradeoffRow> figure4_sweep(const std::vector<double> &grid, double chi, unsigned jobs = 1) {
    for (double a : grid) SrtConfig{a, chi}.validate();
    std::vector<TradeoffRow> rows(grid.size());
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
    if (jobs == 1) {
        for (std::size_t k = 0; k < grid.size(); ++k) rows[k] = tradeoff_point(grid[k], chi);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = next++; k < grid.size(); k = next++) rows[k] = tradeoff_point(grid[k], chi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

} // namespace povm::srt

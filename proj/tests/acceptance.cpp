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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "povm/povm.hpp"

using namespace povm;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double xlx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double max_entry_diff(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) { return (a - b).cwiseAbs().maxCoeff(); }

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

double brute_chsh(const aspect::BivariateQuad &t) {
    double e[4];
    for (std::size_t k = 0; k < 4; ++k) e[k] = t[k][0] - t[k][1] - t[k][2] + t[k][3];
    double best = 0.0;
    for (int minus = 0; minus < 4; ++minus) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += k == minus ? -e[k] : e[k];
        best = std::max(best, std::abs(s));
    }
    return best;
}

Outcome validity_sweep() {
    const auto start = std::chrono::steady_clock::now();
    const double chis[4] = {0.0, oracle::kPi / 4, oracle::kPi / 2, oracle::kPi};
    const aspect::Angles settings[4] = {
        aspect::tsirelson_angles(), {0.0, 0.0, 0.0, 0.0}, {0.3, 1.9, 2.4, 0.8}, {oracle::kPi / 2, 0.1, 1.0, 3.0}};
    int failures = 0, checked = 0;
    for (int s = 0; s < 4; ++s) {
        for (int k = 0; k <= 100; ++k) {
            const double x = k / 100.0;
            const auto m = srt::srt_povm({x, chis[s]});
            failures += !measure_violations(m.labels(), m.elements(), std::nullopt, 1e-9).empty();
            const auto q = aspect::quadrivariate_povm({x, 1.0 - x, settings[s], aspect::singlet_state()});
            failures += !measure_violations(q.labels(), q.elements(), q.index_shape(), 1e-9).empty();
            checked += 2;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {failures == 0 && secs < 1.0,
            fmt("%.0f measures, %.0f invalid, %.3f s", checked, failures, secs)};
}

Outcome instrument_agreement() {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const Matrix u = oracle::random_unitary(rng, 4);
        const Matrix rho_a = oracle::random_density(rng, 2);
        const Matrix basis = oracle::random_unitary(rng, 2);
        std::vector<Operator> pointer;
        for (Eigen::Index k = 0; k < 2; ++k) pointer.push_back(Operator::outer(basis.col(k)));
        const InstrumentModel model(State(Operator(rho_a)), Operator(u), PvmMeasure({"0", "1"}, pointer), 2);
        const auto m = povm_from_instrument(model);
        for (int s = 0; s < 10; ++s) {
            const Matrix rho_o = oracle::random_density(rng, 2);
            const auto p = born_probabilities(m, State(Operator(rho_o)));
            const Matrix fin = u * oracle::kron(rho_o, rho_a) * u.adjoint();
            for (std::size_t k = 0; k < 2; ++k) {
                const double full = oracle::tr_real(fin, oracle::kron(Matrix::Identity(2, 2), pointer[k].matrix()));
                worst = std::max(worst, std::abs(full - p[k]));
            }
        }
    }
    return {worst < 1e-10, fmt("max |dp| = %.3g over 1000 cases", worst)};
}

Outcome nonideality_recovery() {
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double a = k / 100.0;
        const double s = std::sqrt(a);
        for (double chi : {0.0, 1.3}) {
            const auto biv = srt::srt_bivariate({a, chi});
            const auto lam = solve_nonideality(marginal(biv, {0}), srt::path_pvm());
            const auto mu = solve_nonideality(marginal(biv, {1}), srt::interference_pvm(chi));
            worst = std::max(worst, max_entry_diff(lam.lambda.matrix(), mat2(1.0, a, 0.0, 1.0 - a)));
            worst = std::max(worst, max_entry_diff(mu.lambda.matrix(),
                                                   0.5 * mat2(1.0 + s, 1.0 - s, 1.0 - s, 1.0 + s)));
        }
        const double g = a;
        for (auto [t, tp] : {std::pair{0.0, oracle::kPi / 4}, std::pair{0.4, 2.2}}) {
            const auto r = aspect::arm_povm(g, t, tp);
            const auto lm = solve_nonideality(marginal(r, {0}), aspect::polarization_pvm(t));
            const auto ln = solve_nonideality(marginal(r, {1}), aspect::polarization_pvm(tp));
            worst = std::max(worst, max_entry_diff(lm.lambda.matrix(), mat2(g, 0.0, 1.0 - g, 1.0)));
            worst = std::max(worst, max_entry_diff(ln.lambda.matrix(), mat2(1.0 - g, 0.0, g, 1.0)));
        }
    }
    return {worst < 1e-8, fmt("max entry error %.3g", worst)};
}

Outcome martens_tradeoff() {
    double worst_j = 0.0, min_slack = 1e300, worst_end = 0.0, worst_bound = 0.0;
    const auto rows = srt::figure4_sweep(srt::unit_grid(101), 0.0);
    for (const auto &r : rows) {
        const double s = std::sqrt(r.a);
        const double jl = 0.5 * (xlx(1.0 + r.a) - xlx(r.a));
        const double jm = std::log(2.0) - 0.5 * (xlx(1.0 + s) + xlx(1.0 - s));
        worst_j = std::max({worst_j, std::abs(r.j_lambda - jl), std::abs(r.j_mu - jm)});
        min_slack = std::min(min_slack, r.slack);
        worst_bound = std::max(worst_bound, std::abs(r.bound - std::log(2.0)));
    }
    worst_end = std::max(std::abs(rows.front().slack), std::abs(rows.back().slack));
    for (int k = 0; k <= 100; ++k) {
        const double g = k / 100.0;
        const double t = 0.3, tp = 1.1;
        const auto rep = check_martens(aspect::arm_povm(g, t, tp), aspect::polarization_pvm(t),
                                       aspect::polarization_pvm(tp));
        min_slack = std::min(min_slack, rep.slack);
    }
    const bool ok = worst_j < 1e-8 && min_slack >= -1e-9 && worst_end <= 1e-9 && worst_bound <= 1e-12;
    return {ok, fmt("J error %.3g, min slack %.3g, endpoint slack %.3g", worst_j, min_slack, worst_end) +
                    fmt(", bound error %.3g", worst_bound)};
}

Outcome fine_soundness() {
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> u01(0.0, 1.0), ang(0.0, oracle::kPi);
    double worst_chsh = 0.0, worst_res = 0.0;
    int infeasible = 0;
    const int n = 600;
    for (int trial = 0; trial < n; ++trial) {
        const State rho = trial % 2 ? aspect::singlet_state()
                                    : (trial % 4 == 0 ? State::pure(oracle::random_ket(rng, 4))
                                                      : State(Operator(oracle::random_density(rng, 4))));
        const aspect::AspectConfig cfg{u01(rng), u01(rng), {ang(rng), ang(rng), ang(rng), ang(rng)}, rho};
        const auto joint = aspect::joint_probabilities(cfg);
        const auto quad = aspect::bivariate_marginals(joint);
        const auto r = aspect::chsh_value(quad);
        for (double v : r.values) worst_chsh = std::max(worst_chsh, std::abs(v));
        worst_chsh = std::max(worst_chsh, brute_chsh(quad));
        const auto d = fine::joint_exists(fine::MarginalSet(quad));
        if (d.verdict == fine::Verdict::Infeasible || !d.witness) {
            ++infeasible;
        } else {
            worst_res = std::max(worst_res, d.witness_residual);
        }
    }
    const bool ok = worst_chsh <= 2.0 + 1e-9 && infeasible == 0 && worst_res <= 1e-9;
    return {ok, fmt("%.0f configs, max |CHSH| %.12f, ", n, worst_chsh) +
                    fmt("%.0f without joint, max residual %.3g", infeasible, worst_res)};
}

Outcome limit_violation() {
    const auto quad = aspect::standard_composite(aspect::tsirelson_angles(), aspect::singlet_state());
    const auto r = aspect::chsh_value(quad);
    const double err = std::abs(r.max_abs - 2.0 * std::sqrt(2.0));
    const double oracle_err = std::abs(brute_chsh(quad) - 2.0 * std::sqrt(2.0));
    const auto d = fine::joint_exists(fine::MarginalSet(quad));
    const bool cert = d.verdict == fine::Verdict::Infeasible && d.certificate && d.certificate->value > 2.0;
    return {err <= 1e-9 && oracle_err <= 1e-9 && cert,
            fmt("|S| = %.15f, error %.3g, certificate ", r.max_abs, err) + (cert ? "yes" : "no")};
}

Outcome lp_chsh_equivalence() {
    std::mt19937_64 rng(1007);
    int decided = 0, band = 0, disagree = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        const auto m = fine::sample_no_signaling(rng);
        const double c = brute_chsh(m.tables());
        if (std::abs(c - 2.0) <= 1e-9) {
            ++band;
            continue;
        }
        try {
            const auto d = fine::joint_exists(m);
            disagree += d.lp_feasible != (c < 2.0);
        } catch (const ConsistencyError &) {
            ++disagree;
        }
        ++decided;
    }
    return {decided >= 1000 && disagree == 0,
            fmt("%.0f decided, %.0f in boundary band, %.0f disagreements", decided, band, disagree)};
}

Outcome reconstruction() {
    std::vector<Operator> el;
    for (const auto &m : oracle::tetrahedral_elements()) el.emplace_back(m);
    const auto povm = PovmMeasure::from_elements(std::move(el));
    std::mt19937_64 rng(1008);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const State rho = trial % 2 ? State::pure(oracle::random_ket(rng, 2))
                                    : State(Operator(oracle::random_density(rng, 2)));
        const auto rec = reconstruct_state(povm, born_probabilities(povm, rho));
        const Eigen::SelfAdjointEigenSolver<Matrix> es(rec.op().matrix() - rho.op().matrix());
        worst = std::max(worst, 0.5 * es.eigenvalues().cwiseAbs().sum());
    }
    return {worst < 1e-8, fmt("max trace distance %.3g", worst)};
}

Outcome uncertainty() {
    std::mt19937_64 rng(1009);
    double worst = 1e300, worst_agree = 0.0;
    int errors = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Matrix a = oracle::random_hermitian(rng, 2);
        const Matrix b = oracle::random_hermitian(rng, 2);
        const Vector psi = oracle::random_ket(rng, 2);
        const Matrix rho = trial % 3 == 0 ? Matrix(psi * psi.adjoint()) : oracle::random_density(rng, 2);
        const auto var = [&](const Matrix &x) {
            const double m = oracle::tr_real(rho, x);
            return oracle::tr_real(rho, x * x) - m * m;
        };
        const double product = std::sqrt(std::max(var(a), 0.0) * std::max(var(b), 0.0));
        const double bound = 0.5 * std::abs((rho * (a * b - b * a)).trace());
        try {
            const auto r = commutator_bound(Operator(a), Operator(b), State(Operator(rho)));
            worst = std::min(worst, r.product - (r.bound - 1e-9));
            worst_agree = std::max({worst_agree, std::abs(r.product - product), std::abs(r.bound - bound)});
        } catch (const std::exception &) {
            ++errors;
        }
    }
    return {errors == 0 && worst >= 0.0 && worst_agree < 1e-9,
            fmt("min margin %.3g, oracle disagreement %.3g, errors %.0f", worst, worst_agree, errors)};
}

} // namespace

int main() {
    const std::pair<const char *, std::function<Outcome()>> criteria[] = {
        {"POVM validity sweep", validity_sweep},
        {"instrument POVM matches full-space probabilities", instrument_agreement},
        {"nonideality matrix recovery", nonideality_recovery},
        {"Martens trade-off", martens_tradeoff},
        {"joint measurement admits a joint distribution", fine_soundness},
        {"violation at the limiting arrangements", limit_violation},
        {"LP and CHSH decisions agree", lp_chsh_equivalence},
        {"state reconstruction round trip", reconstruction},
        {"uncertainty comparison", uncertainty},
    };
    int failed = 0;
    int n = 0;
    for (const auto &[name, check] : criteria) {
        ++n;
        Outcome o{false, ""};
        try {
            o = check();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}

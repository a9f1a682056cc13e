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
 * `povm` command line: srt, aspect, martens, fine and measure subcommands.
 *
 * Exit codes: 0 success, 1 domain failure (invalid measure, decomposition
 * not found, ...), 2 no joint distribution, 3 no-signaling violation,
 * 64 unknown subcommand, 65 invalid flags or input files.
 */

#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "povm/aspect.hpp"
#include "povm/feasibility.hpp"
#include "povm/io.hpp"
#include "povm/measurement.hpp"
#include "povm/nonideality.hpp"
#include "povm/srt.hpp"

namespace povm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitSignaling = 3;
inline constexpr int kExitUnknownCommand = 64;
inline constexpr int kExitUsage = 65;

using io::json;

namespace detail {

struct Globals {
    double tol = kDefaultTol;
    unsigned seed = 20260101u;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out;
};

/// Input-side failure that maps to the usage exit code.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline const std::set<std::string> &subcommands() {
    static const std::set<std::string> s{"srt", "aspect", "martens", "fine", "measure"};
    return s;
}

/// First positional token, skipping global flags and their values.
inline std::string first_command(const std::vector<std::string> &args) {
    static const std::set<std::string> valued{"--tol", "--seed", "--jobs", "--out"};
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto &a = args[i];
        if (valued.count(a)) {
            ++i;
            continue;
        }
        if (a.rfind("-", 0) == 0) continue;
        return a;
    }
    return {};
}

inline std::string csv_row(std::initializer_list<double> values) {
    std::string s;
    for (double v : values) {
        if (!s.empty()) s += ",";
        s += io::format_double(v);
    }
    return s;
}

template <class F> auto load(const std::string &path, F &&parse) {
    try {
        return parse(io::read_json_file(path));
    } catch (const io::FormatError &e) {
        throw InputError(e.what());
    } catch (const ValidationError &e) {
        throw InputError("'" + path + "': " + e.what());
    } catch (const DimensionError &e) {
        throw InputError("'" + path + "': " + e.what());
    }
}

inline State load_state(const std::string &spec, double tol) {
    if (spec == "bell" || spec == "singlet") return aspect::singlet_state();
    return load(spec, [&](const json &j) { return io::state_from_json(j, tol); });
}

} // namespace detail

/**
 * Run one command line. Data goes to `out` (or the --out file), diagnostics
 * to `err`. Never throws.
 */
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    using detail::Globals;
    using detail::InputError;

    const std::string cmd = detail::first_command(args);
    if (cmd.empty() || !detail::subcommands().count(cmd)) {
        const bool help = std::any_of(args.begin(), args.end(), [](const auto &a) { return a == "-h" || a == "--help"; });
        if (!help) {
            err << (cmd.empty() ? std::string("missing subcommand") : "unknown subcommand '" + cmd + "'")
                << "; expected one of: srt, aspect, martens, fine, measure\n";
            return kExitUnknownCommand;
        }
    }

    CLI::App app{"Generalized quantum measurement toolkit", "povm"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--tol", g.tol, "predicate tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for randomized checks");
    app.add_option("--jobs", g.jobs, "worker threads for sweeps")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", g.out, "write data to this file instead of standard output");

    // measure validate <file>
    auto *measure = app.add_subcommand("measure", "measure utilities")->fallthrough();
    measure->require_subcommand(1);
    std::string measure_file;
    auto *validate = measure->add_subcommand("validate", "check a measure file against the POVM invariants");
    validate->add_option("file", measure_file, "measure JSON")->required();

    // martens
    auto *martens = app.add_subcommand("martens", "Martens inequality for a bivariate POVM")->fallthrough();
    std::string biv_file, pvm1_file, pvm2_file, martens_format = "json";
    martens->add_option("--bivariate", biv_file, "bivariate measure JSON (2 x k index shape)")->required();
    martens->add_option("--pvm1", pvm1_file, "PVM for the first marginal")->required();
    martens->add_option("--pvm2", pvm2_file, "PVM for the second marginal")->required();
    martens->add_option("--format", martens_format)->check(CLI::IsMember({"json", "csv"}));

    // srt [sweep]
    auto *srt = app.add_subcommand("srt", "neutron interferometer with absorber")->fallthrough();
    double absorber = 1.0, phase = 0.0;
    std::string srt_emit = "povm", srt_state, srt_format = "json";
    srt->add_option("--absorber", absorber, "absorber transmissivity a")->check(CLI::Range(0.0, 1.0));
    srt->add_option("--phase", phase, "phase shift chi (radians)");
    srt->add_option("--emit", srt_emit)->check(CLI::IsMember({"povm", "bivariate", "probabilities"}));
    srt->add_option("--state", srt_state, "path-space state JSON (for --emit probabilities)");
    srt->add_option("--format", srt_format)->check(CLI::IsMember({"json", "csv"}));
    auto *sweep = srt->add_subcommand("sweep", "J_lambda / J_mu trade-off over a grid of a")->fallthrough();
    std::size_t points = 101;
    std::string sweep_format = "csv";
    sweep->add_option("--format", sweep_format)->check(CLI::IsMember({"json", "csv"}));
    sweep->add_option("--points", points, "grid points on [0, 1]")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));

    // aspect [standard-composite]
    auto *asp = app.add_subcommand("aspect", "generalized Aspect experiment")->fallthrough();
    double gamma1 = 1.0, gamma2 = 1.0;
    std::vector<double> angles;
    std::string asp_state = "bell", asp_emit = "joint", asp_format = "json";
    asp->add_option("--gamma1", gamma1)->check(CLI::Range(0.0, 1.0));
    asp->add_option("--gamma2", gamma2)->check(CLI::Range(0.0, 1.0));
    asp->add_option("--angles", angles, "theta1,theta1',theta2,theta2' (radians)")->delimiter(',')->expected(4);
    asp->add_option("--state", asp_state, "'bell' or a 4x4 state JSON");
    asp->add_option("--emit", asp_emit)->check(CLI::IsMember({"joint", "marginals", "chsh"}));
    asp->add_option("--format", asp_format)->check(CLI::IsMember({"json", "csv"}));
    auto *composite =
        asp->add_subcommand("standard-composite", "combine the four limiting experiments and evaluate CHSH")
            ->fallthrough();

    // fine [selfcheck]
    auto *fine_cmd = app.add_subcommand("fine", "joint-distribution existence for four bivariate tables")->fallthrough();
    std::string marginals_file;
    fine_cmd->add_option("--marginals", marginals_file, "marginal set JSON");
    auto *selfcheck = fine_cmd->add_subcommand("selfcheck", "simplex vs CHSH on random no-signaling boxes")->fallthrough();
    std::size_t samples = 1000;
    selfcheck->add_option("--samples", samples)->check(CLI::PositiveNumber);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    std::unique_ptr<std::ofstream> file_out;
    std::ostream *dst = &out;
    if (!g.out.empty()) {
        file_out = std::make_unique<std::ofstream>(g.out);
        if (!*file_out) {
            err << "cannot open '" << g.out << "' for writing\n";
            return kExitUsage;
        }
        dst = file_out.get();
    }
    std::ostream &o = *dst;
    o.imbue(std::locale::classic());
    const double tol = g.tol;

    try {
        if (*measure) {
            auto fields = detail::load(measure_file, [](const json &j) { return io::measure_fields_from_json(j); });
            const auto v = measure_violations(fields.labels, fields.elements, fields.index_shape, tol);
            json report{{"file", measure_file}, {"valid", v.empty()}, {"violations", v}};
            if (v.empty()) {
                const PovmMeasure m(fields.labels, fields.elements, fields.index_shape, tol);
                report["dim"] = m.dim();
                report["outcomes"] = m.size();
                report["projective"] = pvm_violations(m, tol).empty();
                report["complete"] = is_complete(m, tol);
            }
            o << report.dump(2) << "\n";
            return v.empty() ? kExitOk : kExitDomain;
        }

        if (*martens) {
            const auto biv = detail::load(biv_file, [&](const json &j) { return io::measure_from_json(j, tol); });
            const auto p = detail::load(pvm1_file, [&](const json &j) { return io::pvm_from_json(j, tol); });
            const auto q = detail::load(pvm2_file, [&](const json &j) { return io::pvm_from_json(j, tol); });
            const auto r = check_martens(biv, p, q, tol);
            if (martens_format == "json") {
                o << io::to_json(r).dump(2) << "\n";
            } else {
                o << "J_lambda,J_mu,bound,slack\n" << detail::csv_row({r.j_lambda, r.j_mu, r.bound, r.slack}) << "\n";
            }
            return kExitOk;
        }

        if (*srt) {
            if (*sweep) {
                const auto rows = srt::figure4_sweep(srt::unit_grid(points), phase, g.jobs);
                if (sweep_format == "json") {
                    json arr = json::array();
                    for (const auto &r : rows)
                        arr.push_back({{"a", r.a}, {"J_lambda", r.j_lambda}, {"J_mu", r.j_mu}, {"bound", r.bound},
                                       {"slack", r.slack}});
                    o << arr.dump(2) << "\n";
                } else {
                    o << "a,J_lambda,J_mu,bound,slack\n";
                    for (const auto &r : rows) o << detail::csv_row({r.a, r.j_lambda, r.j_mu, r.bound, r.slack}) << "\n";
                }
                return kExitOk;
            }
            const srt::SrtConfig cfg{absorber, phase};
            if (srt_emit == "povm" || srt_emit == "bivariate") {
                const auto m = srt_emit == "povm" ? srt::srt_povm(cfg) : srt::srt_bivariate(cfg);
                o << io::to_json(m).dump(2) << "\n";
                return kExitOk;
            }
            if (srt_state.empty()) throw InputError("--emit probabilities requires --state");
            const auto rho = detail::load_state(srt_state, tol);
            const auto p = born_probabilities(srt::srt_povm(cfg), rho, tol);
            if (srt_format == "json") {
                o << io::to_json(p).dump(2) << "\n";
            } else {
                o << "outcome,probability\n";
                for (std::size_t k = 0; k < p.size(); ++k) o << (k + 1) << "," << io::format_double(p[k]) << "\n";
            }
            return kExitOk;
        }

        if (*asp) {
            aspect::Angles ang = aspect::tsirelson_angles();
            if (!angles.empty()) ang = {angles[0], angles[1], angles[2], angles[3]};
            const State rho = detail::load_state(asp_state, tol);
            if (*composite) {
                const auto tables = aspect::standard_composite(ang, rho);
                const auto chsh = aspect::chsh_value(tables);
                if (asp_format == "json") {
                    o << json{{"tables", io::to_json(fine::MarginalSet(tables))}, {"chsh", io::to_json(chsh)}}.dump(2)
                      << "\n";
                } else {
                    o << "placement,value\n";
                    for (std::size_t k = 0; k < 8; ++k) o << k << "," << io::format_double(chsh.values[k]) << "\n";
                }
                return kExitOk;
            }
            const aspect::AspectConfig cfg{gamma1, gamma2, ang, rho};
            const auto joint = aspect::joint_probabilities(cfg);
            if (asp_emit == "joint") {
                if (asp_format == "json") {
                    o << io::to_json(joint).dump(2) << "\n";
                } else {
                    o << "m1,n1,m2,n2,p\n";
                    for (std::size_t k = 0; k < joint.size(); ++k) {
                        const auto idx = unflatten(joint.shape(), k);
                        for (auto i : idx) o << (i == 0 ? "+" : "-") << ",";
                        o << io::format_double(joint[k]) << "\n";
                    }
                }
                return kExitOk;
            }
            const fine::MarginalSet marg(aspect::bivariate_marginals(joint));
            if (asp_emit == "marginals") {
                if (asp_format == "json") {
                    o << io::to_json(marg).dump(2) << "\n";
                } else {
                    o << "pair,x,y,p\n";
                    for (std::size_t k = 0; k < 4; ++k)
                        for (std::size_t c = 0; c < 4; ++c)
                            o << fine::pair_names()[k] << "," << (c / 2 == 0 ? "+" : "-") << ","
                              << (c % 2 == 0 ? "+" : "-") << "," << io::format_double(marg[k][c]) << "\n";
                }
                return kExitOk;
            }
            const auto chsh = aspect::chsh_value(marg.tables());
            if (asp_format == "json") {
                o << io::to_json(chsh).dump(2) << "\n";
            } else {
                o << "placement,value\n";
                for (std::size_t k = 0; k < 8; ++k) o << k << "," << io::format_double(chsh.values[k]) << "\n";
            }
            return kExitOk;
        }

        if (*fine_cmd) {
            if (*selfcheck) {
                std::mt19937_64 rng(g.seed);
                std::size_t agree = 0, boundary = 0, disagree = 0;
                for (std::size_t s = 0; s < samples; ++s) {
                    const auto m = fine::sample_no_signaling(rng);
                    try {
                        const auto d = fine::joint_exists(m, tol);
                        (d.verdict == fine::Verdict::Boundary ? boundary : agree)++;
                    } catch (const ConsistencyError &) {
                        ++disagree;
                    }
                }
                o << json{{"samples", samples}, {"seed", g.seed}, {"agree", agree}, {"boundary", boundary},
                          {"disagree", disagree}}
                         .dump(2)
                  << "\n";
                return disagree == 0 ? kExitOk : kExitDomain;
            }
            if (marginals_file.empty()) throw InputError("fine requires --marginals <file>");
            const auto m = detail::load(marginals_file, [&](const json &j) { return io::marginals_from_json(j, tol); });
            const auto ns = fine::check_no_signaling(m, tol);
            json report{{"no_signaling", {{"pass", ns.pass}, {"discrepancy", ns.discrepancy}}}};
            if (!ns.pass) {
                report["verdict"] = "no-signaling violation";
                o << report.dump(2) << "\n";
                return kExitSignaling;
            }
            const auto d = fine::joint_exists(m, tol);
            report["verdict"] = fine::to_string(d.verdict);
            report["chsh"] = io::to_json(d.chsh);
            report["lp_infeasibility"] = d.lp_infeasibility;
            report["witness"] = d.witness ? io::to_json(*d.witness) : json(nullptr);
            report["witness_residual"] = d.witness ? json(d.witness_residual) : json(nullptr);
            report["certificate"] = d.certificate ? json{{"placement", d.certificate->placement},
                                                         {"value", d.certificate->value}}
                                                  : json(nullptr);
            o << report.dump(2) << "\n";
            return d.witness ? kExitOk : kExitInfeasible;
        }
    } catch (const InputError &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    err << app.help();
    return kExitUsage;
}

} // namespace povm::cli

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


#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "povm/io.hpp"
#include "povm/srt.hpp"
#include "povm_cli.hpp"

using namespace povm;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("povm_test_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string write(const std::string &name, const std::string &content) const {
        const auto p = path_ / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string file(const std::string &name) const { return (path_ / name).string(); }

  private:
    fs::path path_;
};

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string &text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

bool same_bits(const Operator &a, const Operator &b) {
    if (a.dim() != b.dim()) return false;
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t c = 0; c < a.dim(); ++c)
            if (a(r, c) != b(r, c)) return false;
    return true;
}

} // namespace

TEST(JsonRoundTrip, OperatorsAndStatesBitExact) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const Operator op(oracle::random_ginibre(rng, 1 + trial % 4));
        const auto text = io::to_json(op).dump();
        EXPECT_TRUE(same_bits(io::operator_from_json(io::json::parse(text)), op));
        const State rho(Operator(oracle::random_density(rng, 3)));
        EXPECT_TRUE(same_bits(io::state_from_json(io::json::parse(io::to_json(rho).dump())).op(), rho.op()));
    }
}

TEST(JsonRoundTrip, MeasuresBitExact) {
    for (double a : {0.0, 0.123456789, 0.5, 1.0}) {
        const auto m = srt::srt_bivariate({a, 0.77});
        const auto back = io::measure_from_json(io::json::parse(io::to_json(m).dump()));
        EXPECT_EQ(back.labels(), m.labels());
        EXPECT_EQ(back.index_shape(), m.index_shape());
        for (std::size_t k = 0; k < m.size(); ++k) EXPECT_TRUE(same_bits(back[k], m[k]));
    }
}

TEST(JsonRoundTrip, ReportsBitExact) {
    const auto chsh = aspect::chsh_from_correlators({0.1, -0.7071067811865476, 1.0 / 3.0, 0.9});
    const auto c2 = io::chsh_from_json(io::json::parse(io::to_json(chsh).dump()));
    EXPECT_EQ(c2.values, chsh.values);
    EXPECT_EQ(c2.max_abs, chsh.max_abs);
    const auto row = srt::tradeoff_point(0.37, 0.0);
    const MartensReport r{row.j_lambda, row.j_mu, row.bound, row.slack, true};
    const auto r2 = io::martens_from_json(io::json::parse(io::to_json(r).dump()));
    EXPECT_EQ(r2.j_lambda, r.j_lambda);
    EXPECT_EQ(r2.j_mu, r.j_mu);
    EXPECT_EQ(r2.slack, r.slack);
}

TEST(JsonReaders, RejectMalformedInput) {
    EXPECT_THROW(io::operator_from_json(io::json::parse(R"({"dim": 2, "entries": [[1, 0]]})")), io::FormatError);
    EXPECT_THROW(io::table_from_json(io::json::parse("[[0.5, 0.5]]")), io::FormatError);
}

TEST(FormatDouble, SeventeenDigitsRoundTrip) {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const double v = u(rng);
        EXPECT_EQ(std::stod(io::format_double(v)), v);
    }
    EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Cli, SrtSweepThreePoints) {
    const auto r = run({"srt", "sweep", "--points", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "J_lambda", "J_mu", "bound", "slack"}));
    const double as[3] = {0.0, 0.5, 1.0};
    for (std::size_t k = 0; k < 3; ++k) {
        ASSERT_EQ(rows[k + 1].size(), 5u);
        EXPECT_EQ(std::stod(rows[k + 1][0]), as[k]);
        EXPECT_GE(std::stod(rows[k + 1][4]), -1e-9);
    }
    EXPECT_NEAR(std::stod(rows[1][4]), 0.0, 1e-9);
    EXPECT_NEAR(std::stod(rows[3][4]), 0.0, 1e-9);
    EXPECT_GT(std::stod(rows[2][4]), 0.1);
}

TEST(Cli, SweepIsDeterministicAcrossJobCounts) {
    EXPECT_EQ(run({"--jobs", "1", "srt", "sweep", "--points", "21"}).out,
              run({"--jobs", "3", "srt", "sweep", "--points", "21"}).out);
}

TEST(Cli, SweepWritesOutFile) {
    TempDir dir;
    const auto path = dir.file("figure.csv");
    const auto r = run({"--out", path, "srt", "sweep", "--points", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(parse_csv(slurp(path)).size(), 6u);
}

TEST(Cli, StandardCompositeReportsTsirelson) {
    const auto r = run({"aspect", "standard-composite", "--angles", "0,0.7853981634,0.3926990817,1.1780972451"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("2.828427"), std::string::npos);
    const auto j = io::json::parse(r.out);
    EXPECT_NEAR(j.at("chsh").at("max_abs").get<double>(), 2.0 * std::sqrt(2.0), 1e-9);
    EXPECT_EQ(j.at("chsh").at("values").size(), 8u);
}

TEST(Cli, FineOnExtractedMarginalsIsFeasible) {
    TempDir dir;
    const auto r = run({"aspect", "--gamma1", "0.5", "--gamma2", "0.5", "--emit", "marginals"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto path = dir.write("marginals.json", r.out);
    const auto before = slurp(path);
    const auto f = run({"fine", "--marginals", path});
    EXPECT_EQ(f.code, 0) << f.err;
    const auto j = io::json::parse(f.out);
    EXPECT_FALSE(j.at("witness").is_null());
    EXPECT_EQ(slurp(path), before);
}

TEST(Cli, FineExitCodes) {
    TempDir dir;
    const auto composite = io::json::parse(run({"aspect", "standard-composite"}).out).at("tables");
    EXPECT_EQ(run({"fine", "--marginals", dir.write("bell.json", composite.dump())}).code, 2);
    io::json skew = composite;
    skew["AB'"] = io::json::array({io::json::array({0.35, 0.35}), io::json::array({0.15, 0.15})});
    skew["AB"] = io::json::array({io::json::array({0.25, 0.25}), io::json::array({0.25, 0.25})});
    EXPECT_EQ(run({"fine", "--marginals", dir.write("skew.json", skew.dump())}).code, 3);
    EXPECT_EQ(run({"fine", "--marginals", dir.file("missing.json")}).code, 65);
}

TEST(Cli, FineSelfcheckAgrees) {
    const auto r = run({"--seed", "7", "fine", "selfcheck", "--samples", "200"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::json::parse(r.out).at("disagree").get<int>(), 0);
}

TEST(Cli, UsageAndUnknownCommands) {
    EXPECT_EQ(run({"frobnicate"}).code, 64);
    EXPECT_EQ(run({}).code, 64);
    EXPECT_EQ(run({"srt", "--absorber", "1.5"}).code, 65);
    EXPECT_EQ(run({"srt", "--emit", "nonsense"}).code, 65);
    EXPECT_EQ(run({"aspect", "--angles", "0,1"}).code, 65);
    EXPECT_EQ(run({"srt", "--emit", "probabilities"}).code, 65);
}

TEST(Cli, MeasureValidate) {
    TempDir dir;
    const auto good = dir.write("good.json", io::to_json(srt::srt_povm({0.4, 0.0})).dump());
    const auto r = run({"measure", "validate", good});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(io::json::parse(r.out).at("valid").get<bool>());

    auto bad = io::to_json(srt::srt_povm({0.4, 0.0}));
    bad["elements"].erase(2);
    bad["labels"].erase(2);
    const auto b = run({"measure", "validate", dir.write("bad.json", bad.dump())});
    EXPECT_EQ(b.code, 1);
    EXPECT_FALSE(io::json::parse(b.out).at("violations").empty());
}

TEST(Cli, EmittedJsonReparsesBitExact) {
    const auto povm_out = run({"srt", "--absorber", "0.3", "--phase", "0.1", "--emit", "bivariate"});
    ASSERT_EQ(povm_out.code, 0);
    const auto m = io::measure_from_json(io::json::parse(povm_out.out));
    const auto ref = srt::srt_bivariate({0.3, 0.1});
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_TRUE(same_bits(m[k], ref[k]));

    const auto joint_out = run({"aspect", "--gamma1", "0.3", "--gamma2", "0.9", "--emit", "joint"});
    const auto joint = io::table_from_json(io::json::parse(joint_out.out));
    const auto joint_ref = aspect::joint_probabilities(
        {0.3, 0.9, aspect::tsirelson_angles(), aspect::singlet_state()});
    EXPECT_EQ(joint.values(), joint_ref.values());

    const auto chsh_out = run({"aspect", "--gamma1", "0.3", "--gamma2", "0.9", "--emit", "chsh"});
    EXPECT_EQ(io::chsh_from_json(io::json::parse(chsh_out.out)).values,
              aspect::chsh_value(aspect::bivariate_marginals(joint_ref)).values);

    const auto marg_out = run({"aspect", "--gamma1", "0.3", "--gamma2", "0.9", "--emit", "marginals"});
    const auto marg = io::marginals_from_json(io::json::parse(marg_out.out));
    const auto marg_ref = aspect::bivariate_marginals(joint_ref);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(marg[k].values(), marg_ref[k].values());
}

TEST(Cli, MartensFromFilesLeavesInputsUntouched) {
    TempDir dir;
    const auto biv = dir.write("biv.json", io::to_json(srt::srt_bivariate({0.5, 0.0})).dump());
    const auto p = dir.write("p.json", io::to_json(static_cast<const PovmMeasure &>(srt::path_pvm())).dump());
    const auto q = dir.write("q.json", io::to_json(static_cast<const PovmMeasure &>(srt::interference_pvm(0.0))).dump());
    const auto before = slurp(biv) + slurp(p) + slurp(q);
    const auto r = run({"martens", "--bivariate", biv, "--pvm1", p, "--pvm2", q});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rep = io::martens_from_json(io::json::parse(r.out));
    const auto row = srt::tradeoff_point(0.5, 0.0);
    EXPECT_EQ(rep.j_lambda, row.j_lambda);
    EXPECT_EQ(rep.j_mu, row.j_mu);
    EXPECT_EQ(slurp(biv) + slurp(p) + slurp(q), before);

    const auto csv = run({"martens", "--bivariate", biv, "--pvm1", p, "--pvm2", q, "--format", "csv"});
    EXPECT_EQ(parse_csv(csv.out)[0], (std::vector<std::string>{"J_lambda", "J_mu", "bound", "slack"}));
}

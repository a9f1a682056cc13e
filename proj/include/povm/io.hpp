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
 * JSON encodings.
 *
 *   matrix:   { "dim": n, "entries": [[re, im], ...] }          (row-major, n*n pairs)
 *   measure:  { "labels": [...], "index_shape": [...] | null, "elements": [matrix, ...] }
 *   table:    { "shape": [...], "values": [...] }                (row-major)
 *   marginals:{ "AB": [[p++, p+-], [p-+, p--]], "AB'": ..., "A'B": ..., "A'B'": ... }
 *
 * Doubles are written in shortest round-trip form, so decode(encode(x))
 * reproduces x bit for bit.
 */

#pragma once

#include <array>
#include <fstream>
#include <locale>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "povm/aspect.hpp"
#include "povm/core.hpp"
#include "povm/feasibility.hpp"
#include "povm/measurement.hpp"
#include "povm/nonideality.hpp"
#include "povm/probability.hpp"

namespace povm::io {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline json to_json(const Operator &op) {
    json entries = json::array();
    for (std::size_t r = 0; r < op.dim(); ++r)
        for (std::size_t c = 0; c < op.dim(); ++c) entries.push_back({op(r, c).real(), op(r, c).imag()});
    return {{"dim", op.dim()}, {"entries", std::move(entries)}};
}

inline Operator operator_from_json(const json &j) {
    try {
        const auto dim = j.at("dim").get<std::size_t>();
        const auto &entries = j.at("entries");
        if (dim == 0 || entries.size() != dim * dim) {
            throw FormatError("matrix: expected " + std::to_string(dim * dim) + " entries");
        }
        Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto &e = entries[k];
            if (!e.is_array() || e.size() != 2) {
                throw FormatError("matrix: entries must be [re, im] pairs");
            }
            m(static_cast<Eigen::Index>(k / dim), static_cast<Eigen::Index>(k % dim)) =
                Complex(e[0].get<double>(), e[1].get<double>());
        }
        return Operator(std::move(m));
    } catch (const json::exception &e) {
        throw FormatError(std::string("matrix: ") + e.what());
    }
}

inline json to_json(const State &s) { return to_json(s.op()); }
inline State state_from_json(const json &j, double tol = kDefaultTol) { return State(operator_from_json(j), tol); }

inline json to_json(const PovmMeasure &m) {
    json el = json::array();
    for (const auto &e : m.elements()) el.push_back(to_json(e));
    json shape = nullptr;
    if (m.index_shape()) shape = *m.index_shape();
    return {{"labels", m.labels()}, {"index_shape", std::move(shape)}, {"elements", std::move(el)}};
}

/// Raw measure fields, before validation.
struct MeasureFields {
    std::vector<std::string> labels;
    std::vector<Operator> elements;
    std::optional<Shape> index_shape;
};

inline MeasureFields measure_fields_from_json(const json &j) {
    try {
        MeasureFields f;
        for (const auto &e : j.at("elements")) f.elements.push_back(operator_from_json(e));
        if (j.contains("labels")) {
            f.labels = j.at("labels").get<std::vector<std::string>>();
        } else {
            for (std::size_t i = 0; i < f.elements.size(); ++i) f.labels.push_back(std::to_string(i + 1));
        }
        if (j.contains("index_shape") && !j.at("index_shape").is_null()) {
            f.index_shape = j.at("index_shape").get<Shape>();
        }
        return f;
    } catch (const json::exception &e) {
        throw FormatError(std::string("measure: ") + e.what());
    }
}

inline PovmMeasure measure_from_json(const json &j, double tol = kDefaultTol) {
    auto f = measure_fields_from_json(j);
    return PovmMeasure(std::move(f.labels), std::move(f.elements), std::move(f.index_shape), tol);
}

inline PvmMeasure pvm_from_json(const json &j, double tol = kDefaultTol) {
    return PvmMeasure(measure_from_json(j, tol), tol);
}

inline json to_json(const ProbabilityTable &t) { return {{"shape", t.shape()}, {"values", t.values()}}; }

inline ProbabilityTable table_from_json(const json &j, double tol = kDefaultTol) {
    try {
        if (j.is_array()) {
            // nested 2x2 form [[p00, p01], [p10, p11]]
            std::vector<double> v;
            for (const auto &row : j) {
                if (!row.is_array() || row.size() != 2) throw FormatError("table: expected a 2x2 nested array");
                for (const auto &x : row) v.push_back(x.get<double>());
            }
            if (v.size() != 4) throw FormatError("table: expected a 2x2 nested array");
            return ProbabilityTable(Shape{2, 2}, std::move(v), tol);
        }
        return ProbabilityTable(j.at("shape").get<Shape>(), j.at("values").get<std::vector<double>>(), tol);
    } catch (const json::exception &e) {
        throw FormatError(std::string("table: ") + e.what());
    }
}

inline json to_json(const fine::MarginalSet &m) {
    json out = json::object();
    for (std::size_t k = 0; k < 4; ++k) {
        const auto &t = m[k];
        out[fine::pair_names()[k]] = json::array({json::array({t[0], t[1]}), json::array({t[2], t[3]})});
    }
    return out;
}

inline fine::MarginalSet marginals_from_json(const json &j, double tol = kDefaultTol) {
    std::vector<ProbabilityTable> t;
    for (const auto &name : fine::pair_names()) {
        if (!j.contains(name)) throw FormatError("marginals: missing table '" + name + "'");
        t.push_back(table_from_json(j.at(name), tol));
    }
    return fine::MarginalSet({t[0], t[1], t[2], t[3]});
}

inline json to_json(const aspect::ChshReport &r) {
    return {{"correlators", r.correlators}, {"S", r.s},           {"values", r.values},
            {"max_abs", r.max_abs},         {"argmax", r.argmax}};
}

inline aspect::ChshReport chsh_from_json(const json &j) {
    try {
        aspect::ChshReport r;
        r.correlators = j.at("correlators").get<std::array<double, 4>>();
        r.s = j.at("S").get<double>();
        r.values = j.at("values").get<std::array<double, 8>>();
        r.max_abs = j.at("max_abs").get<double>();
        r.argmax = j.at("argmax").get<std::size_t>();
        return r;
    } catch (const json::exception &e) {
        throw FormatError(std::string("chsh report: ") + e.what());
    }
}

inline json to_json(const MartensReport &r) {
    return {{"J_lambda", r.j_lambda}, {"J_mu", r.j_mu}, {"bound", r.bound}, {"slack", r.slack}};
}

inline MartensReport martens_from_json(const json &j) {
    try {
        MartensReport r;
        r.j_lambda = j.at("J_lambda").get<double>();
        r.j_mu = j.at("J_mu").get<double>();
        r.bound = j.at("bound").get<double>();
        r.slack = j.at("slack").get<double>();
        r.satisfied = r.slack >= -kDefaultTol;
        return r;
    } catch (const json::exception &e) {
        throw FormatError(std::string("martens report: ") + e.what());
    }
}

inline json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw FormatError("'" + path + "': " + e.what());
    }
}

/// %.17g, independent of the global locale.
inline std::string format_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace povm::io

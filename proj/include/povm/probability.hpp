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

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "povm/core.hpp"

namespace povm {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape &shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

/// Row-major multi-index -> flat offset.
inline std::size_t flat_index(const Shape &shape, const std::vector<std::size_t> &idx) {
    if (idx.size() != shape.size()) {
        throw DimensionError("multi-index rank does not match shape");
    }
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (idx[k] >= shape[k]) {
            throw DimensionError("multi-index out of range");
        }
        off = off * shape[k] + idx[k];
    }
    return off;
}

inline std::vector<std::size_t> unflatten(const Shape &shape, std::size_t off) {
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t k = shape.size(); k-- > 0;) {
        idx[k] = off % shape[k];
        off /= shape[k];
    }
    return idx;
}

/**
 * Flat offsets of the reduced table obtained by keeping `keep` axes (in the
 * given order). Entry i is the reduced offset the i-th full entry sums into.
 */
inline std::vector<std::size_t> marginal_map(const Shape &shape, const std::vector<std::size_t> &keep,
                                             Shape &reduced) {
    reduced.clear();
    for (auto ax : keep) {
        if (ax >= shape.size()) {
            throw DimensionError("marginal axis out of range");
        }
        reduced.push_back(shape[ax]);
    }
    const std::size_t n = shape_size(shape);
    std::vector<std::size_t> map(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = unflatten(shape, i);
        std::vector<std::size_t> sub;
        sub.reserve(keep.size());
        for (auto ax : keep) sub.push_back(idx[ax]);
        map[i] = flat_index(reduced, sub);
    }
    return map;
}

/**
 * Nonnegative multi-index table summing to one.
 *
 * Entries in [-tol, 0) are accepted and clamped to zero; anything more
 * negative is rejected.
 */
class ProbabilityTable {
  public:
    ProbabilityTable(Shape shape, std::vector<double> values, double tol = kDefaultTol)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (shape_.empty() || shape_size(shape_) != values_.size()) {
            throw DimensionError("probability table: shape does not match value count");
        }
        double total = 0.0;
        for (auto &v : values_) {
            if (!std::isfinite(v) || v < -tol) {
                throw ValidationError("probability table: entry " + std::to_string(v) + " is not a probability");
            }
            if (v < 0.0) v = 0.0;
            total += v;
        }
        if (std::abs(total - 1.0) > tol) {
            throw ValidationError("probability table: entries sum to " + std::to_string(total));
        }
    }

    /// Uniform table.
    static ProbabilityTable uniform(Shape shape) {
        const std::size_t n = shape_size(shape);
        return ProbabilityTable(std::move(shape), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    [[nodiscard]] const Shape &shape() const { return shape_; }
    [[nodiscard]] const std::vector<double> &values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t flat) const { return values_.at(flat); }
    [[nodiscard]] double at(const std::vector<std::size_t> &idx) const { return values_[flat_index(shape_, idx)]; }

    /// Sum out every axis not listed in `keep`; the result's axes follow `keep`.
    [[nodiscard]] ProbabilityTable marginal(const std::vector<std::size_t> &keep) const {
        Shape reduced;
        const auto map = marginal_map(shape_, keep, reduced);
        std::vector<double> out(shape_size(reduced), 0.0);
        for (std::size_t i = 0; i < values_.size(); ++i) out[map[i]] += values_[i];
        return ProbabilityTable(std::move(reduced), std::move(out));
    }

    [[nodiscard]] double max_abs_diff(const ProbabilityTable &other) const {
        if (other.shape_ != shape_) {
            throw DimensionError("probability tables have different shapes");
        }
        double d = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) d = std::max(d, std::abs(values_[i] - other.values_[i]));
        return d;
    }

  private:
    Shape shape_;
    std::vector<double> values_;
};

} // namespace povm

// SPDX-License-Identifier: Apache-2.0
//
// stochid: identifiability of stochastic operators on finite time-frequency grids
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Support patterns: a cell set Gamma in Z_L x Z_L and an admissible index set
// Lambda of pairs of cells, closed under
//   (g, g') in Lambda  =>  (g, g), (g', g'), (g', g) in Lambda.

#include "types.hpp"
#include "util.hpp"

#include <compare>
#include <optional>
#include <set>
#include <vector>

namespace stochid
{

// Time-frequency cell (k, l): k time shift, l frequency shift.
struct Cell
{
    int k = 0;
    int l = 0;

    auto operator<=>(const Cell&) const = default;
};

// Index tuple (k, l, k', l') of the 4D pattern; ordered lexicographically.
struct Quad
{
    Cell first;
    Cell second;

    auto operator<=>(const Quad&) const = default;

    Quad swapped() const { return {second, first}; }
    bool diagonal() const { return first == second; }
};

using QuadSet = std::set<Quad>;

inline bool is_admissible(const QuadSet& lambda)
{
    for (const auto& q : lambda)
    {
        if (!lambda.contains({q.first, q.first}) || !lambda.contains({q.second, q.second}) ||
            !lambda.contains(q.swapped()))
            return false;
    }
    return true;
}

// Smallest admissible superset. One pass suffices: the tuples forced by a
// member are diagonal or swapped, and those force nothing new.
inline QuadSet admissible_closure(const QuadSet& lambda)
{
    QuadSet out = lambda;
    for (const auto& q : lambda)
    {
        out.insert({q.first, q.first});
        out.insert({q.second, q.second});
        out.insert(q.swapped());
    }
    return out;
}

class Pattern
{
public:
    Pattern(int L, QuadSet lambda) : L_(L), lambda_(std::move(lambda))
    {
        if (L_ < 1)
            throw InputError("pattern: L must be positive");
        for (const auto& q : lambda_)
            for (const Cell& c : {q.first, q.second})
                if (c.k < 0 || c.k >= L_ || c.l < 0 || c.l >= L_)
                    throw InputError("pattern: cell index outside Z_L x Z_L");
        if (!is_admissible(lambda_))
            throw InputError("pattern: index set is not admissible");
        for (const auto& q : lambda_)
            if (q.diagonal())
                gamma_.push_back(q.first);
    }

    int L() const { return L_; }
    const QuadSet& lambda() const { return lambda_; }
    // Projection of Lambda, sorted; defines the row/column order of covariance matrices.
    const std::vector<Cell>& gamma() const { return gamma_; }
    std::size_t size() const { return lambda_.size(); }

    bool contains(const Cell& a, const Cell& b) const { return lambda_.contains({a, b}); }

    std::optional<std::size_t> gamma_index(const Cell& c) const
    {
        auto it = std::lower_bound(gamma_.begin(), gamma_.end(), c);
        if (it == gamma_.end() || *it != c)
            return std::nullopt;
        return static_cast<std::size_t>(it - gamma_.begin());
    }

    bool operator==(const Pattern& other) const { return L_ == other.L_ && lambda_ == other.lambda_; }

private:
    int L_;
    QuadSet lambda_;
    std::vector<Cell> gamma_;
};

inline std::vector<Cell> full_grid(int L)
{
    std::vector<Cell> cells;
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            cells.push_back({k, l});
    return cells;
}

// Lambda = Gamma x Gamma.
inline Pattern tensor_square(int L, const std::vector<Cell>& gamma)
{
    QuadSet lambda;
    for (const auto& a : gamma)
        for (const auto& b : gamma)
            lambda.insert({a, b});
    return Pattern(L, std::move(lambda));
}

// WSSUS support: Lambda = {(g, g)}.
inline Pattern wssus_diagonal(int L, const std::vector<Cell>& gamma)
{
    QuadSet lambda;
    for (const auto& a : gamma)
        lambda.insert({a, a});
    return Pattern(L, std::move(lambda));
}

// Admissible closure of a Bernoulli(density) sample of Gamma x Gamma.
inline Pattern random_admissible(int L, double density, Rng& rng, const std::vector<Cell>& gamma)
{
    std::bernoulli_distribution keep(std::clamp(density, 0.0, 1.0));
    QuadSet sample;
    for (const auto& a : gamma)
        for (const auto& b : gamma)
            if (keep(rng))
                sample.insert({a, b});
    return Pattern(L, admissible_closure(sample));
}

inline Pattern random_admissible(int L, double density, std::uint64_t seed)
{
    Rng rng(mix64(seed));
    return random_admissible(L, density, rng, full_grid(L));
}

// Union of two square blocks Gamma1^2 and Gamma2^2 (two-squares defect).
inline Pattern two_squares_pattern(int L, const std::vector<Cell>& g1, const std::vector<Cell>& g2)
{
    QuadSet lambda;
    for (const auto* g : {&g1, &g2})
        for (const auto& a : *g)
            for (const auto& b : *g)
                lambda.insert({a, b});
    return Pattern(L, std::move(lambda));
}

// Diagonal on Gamma1 u Gamma2 plus the cross blocks (butterfly defect).
inline Pattern butterfly_pattern(int L, const std::vector<Cell>& g1, const std::vector<Cell>& g2)
{
    QuadSet lambda;
    for (const auto& a : g1)
        for (const auto& b : g2)
        {
            lambda.insert({a, b});
            lambda.insert({b, a});
        }
    return Pattern(L, admissible_closure(lambda));
}

// Defective L = 5 examples: K_2 disjoint-union K_4, and K_{3,3}.
inline Pattern example_two_squares()
{
    return two_squares_pattern(5, {{0, 0}, {0, 1}}, {{2, 2}, {2, 3}, {3, 2}, {3, 3}});
}

inline Pattern example_butterfly()
{
    return butterfly_pattern(5, {{0, 0}, {0, 1}, {0, 2}}, {{3, 0}, {3, 1}, {3, 2}});
}

} // namespace stochid

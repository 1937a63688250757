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

// Exhaustive detection of the two defective configurations of an admissible
// pattern. The pattern is read as a graph on Gamma with adjacency 1_Lambda
// (self-loops ignored):
//   two squares: disjoint cliques Gamma1, Gamma2 with |Gamma1| + |Gamma2| > L
//   butterfly:   disjoint Gamma1, Gamma2 with Gamma1 x Gamma2 inside Lambda and
//                |Gamma1| + |Gamma2| > L

#include "pattern.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stochid
{

enum class DefectKind
{
    two_squares,
    butterfly
};

inline std::string to_string(DefectKind kind)
{
    return kind == DefectKind::two_squares ? "two_squares" : "butterfly";
}

inline DefectKind defect_kind_from_string(const std::string& s)
{
    if (s == "two_squares")
        return DefectKind::two_squares;
    if (s == "butterfly")
        return DefectKind::butterfly;
    throw InputError("unknown defect kind: " + s);
}

struct DefectWitness
{
    DefectKind kind = DefectKind::two_squares;
    std::vector<Cell> gamma1;
    std::vector<Cell> gamma2;

    bool operator==(const DefectWitness&) const = default;

    // Checks disjointness, the size condition and the required blocks of Lambda.
    bool valid_for(const Pattern& p) const
    {
        if (gamma1.empty() || gamma2.empty())
            return false;
        if (static_cast<int>(gamma1.size() + gamma2.size()) <= p.L())
            return false;
        for (const auto& a : gamma1)
            if (std::find(gamma2.begin(), gamma2.end(), a) != gamma2.end())
                return false;
        auto block = [&](const std::vector<Cell>& rows, const std::vector<Cell>& cols) {
            for (const auto& a : rows)
                for (const auto& b : cols)
                    if (!p.contains(a, b))
                        return false;
            return true;
        };
        if (kind == DefectKind::two_squares)
            return block(gamma1, gamma1) && block(gamma2, gamma2);
        return block(gamma1, gamma2) && block(gamma2, gamma1);
    }
};

inline constexpr std::uint64_t default_node_budget = 10'000'000;

namespace detail
{

struct Graph
{
    std::vector<Cell> cells;
    std::vector<std::vector<char>> adj;

    explicit Graph(const Pattern& p) : cells(p.gamma())
    {
        const std::size_t n = cells.size();
        adj.assign(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                adj[i][j] = (i != j && p.contains(cells[i], cells[j])) ? 1 : 0;
    }

    std::size_t size() const { return cells.size(); }

    std::vector<Cell> to_cells(const std::vector<int>& idx) const
    {
        std::vector<Cell> out;
        for (int i : idx)
            out.push_back(cells[i]);
        std::sort(out.begin(), out.end());
        return out;
    }
};

class NodeCounter
{
public:
    NodeCounter(std::uint64_t budget, const char* what) : budget_(budget), what_(what) {}

    void tick()
    {
        if (++nodes_ > budget_)
            throw BudgetExceeded(std::string(what_) + ": node budget of " + std::to_string(budget_) + " exhausted");
    }

    std::uint64_t nodes() const { return nodes_; }

private:
    std::uint64_t budget_;
    std::uint64_t nodes_ = 0;
    const char* what_;
};

// Bron-Kerbosch with pivoting. `visit` returns true to stop the enumeration.
template <class Visit>
bool maximal_cliques(const Graph& g, std::vector<int>& r, std::vector<int> p, std::vector<int> x, NodeCounter& counter,
                     Visit&& visit)
{
    counter.tick();
    if (p.empty() && x.empty())
    {
        std::vector<int> clique = r;
        std::sort(clique.begin(), clique.end());
        return visit(clique);
    }
    int pivot = -1;
    std::size_t best = 0;
    for (const auto* set : {&p, &x})
        for (int u : *set)
        {
            std::size_t deg = 0;
            for (int v : p)
                deg += g.adj[u][v];
            if (pivot < 0 || deg > best)
            {
                pivot = u;
                best = deg;
            }
        }
    std::vector<int> branch;
    for (int v : p)
        if (!g.adj[pivot][v])
            branch.push_back(v);
    for (int v : branch)
    {
        std::vector<int> p2, x2;
        for (int u : p)
            if (g.adj[v][u])
                p2.push_back(u);
        for (int u : x)
            if (g.adj[v][u])
                x2.push_back(u);
        r.push_back(v);
        if (maximal_cliques(g, r, std::move(p2), std::move(x2), counter, visit))
            return true;
        r.pop_back();
        p.erase(std::find(p.begin(), p.end(), v));
        x.push_back(v);
    }
    return false;
}

} // namespace detail

// Any two disjoint cliques lie inside two maximal cliques Q1, Q2, and the best
// split of Q1 u Q2 into disjoint cliques has |Q1 u Q2| vertices; so a witness
// exists iff some pair of maximal cliques covers more than L vertices.
inline std::optional<DefectWitness> detect_two_squares(const Pattern& p,
                                                       std::uint64_t node_budget = default_node_budget)
{
    const detail::Graph g(p);
    detail::NodeCounter counter(node_budget, "detect_two_squares");
    const std::size_t need = static_cast<std::size_t>(p.L()) + 1;

    std::vector<std::vector<int>> seen;
    std::optional<DefectWitness> found;
    auto visit = [&](const std::vector<int>& q) {
        seen.push_back(q);
        for (const auto& other : seen)
        {
            std::vector<int> uni;
            std::set_union(other.begin(), other.end(), q.begin(), q.end(), std::back_inserter(uni));
            if (uni.size() < need)
                continue;
            std::vector<int> g1, g2;
            if (other == q)
            {
                g1.assign(q.begin(), q.begin() + 1);
                g2.assign(q.begin() + 1, q.end());
            }
            else
            {
                g1 = other;
                std::set_difference(q.begin(), q.end(), other.begin(), other.end(), std::back_inserter(g2));
            }
            found = DefectWitness{DefectKind::two_squares, g.to_cells(g1), g.to_cells(g2)};
            return true;
        }
        return false;
    };

    std::vector<int> r, all(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        all[i] = static_cast<int>(i);
    detail::maximal_cliques(g, r, all, {}, counter, visit);
    return found;
}

// Depth-first search over Gamma1 in increasing vertex order, carrying the
// common neighbourhood C(Gamma1); Gamma2 = C(Gamma1) is optimal for fixed Gamma1.
inline std::optional<DefectWitness> detect_butterfly(const Pattern& p,
                                                     std::uint64_t node_budget = default_node_budget)
{
    const detail::Graph g(p);
    detail::NodeCounter counter(node_budget, "detect_butterfly");
    const int n = static_cast<int>(g.size());
    const std::size_t need = static_cast<std::size_t>(p.L()) + 1;

    std::vector<int> side;
    std::optional<DefectWitness> found;

    auto search = [&](auto&& self, const std::vector<int>& common) -> bool {
        counter.tick();
        if (side.size() + common.size() >= need)
        {
            found = DefectWitness{DefectKind::butterfly, g.to_cells(side), g.to_cells(common)};
            return true;
        }
        const int last = side.back();
        std::size_t outside = 0;
        std::vector<char> in_common(n, 0);
        for (int v : common)
            in_common[v] = 1;
        for (int u = last + 1; u < n; ++u)
            outside += !in_common[u];
        if (side.size() + common.size() + outside < need)
            return false;
        for (int u = last + 1; u < n; ++u)
        {
            std::vector<int> next;
            for (int v : common)
                if (v != u && g.adj[u][v])
                    next.push_back(v);
            if (next.empty())
                continue;
            side.push_back(u);
            if (self(self, next))
                return true;
            side.pop_back();
        }
        return false;
    };

    for (int v = 0; v < n; ++v)
    {
        std::vector<int> common;
        for (int u = 0; u < n; ++u)
            if (g.adj[v][u])
                common.push_back(u);
        if (common.empty())
            continue;
        side.assign(1, v);
        if (search(search, common))
            return found;
    }
    return std::nullopt;
}

inline std::optional<DefectWitness> detect_defect(const Pattern& p, std::uint64_t node_budget = default_node_budget)
{
    if (auto w = detect_two_squares(p, node_budget))
        return w;
    return detect_butterfly(p, node_budget);
}

} // namespace stochid

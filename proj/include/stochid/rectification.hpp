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

// Lattice covers of box unions. A 2D set is covered by cells
// [a k, a(k+1)) x [b l, b(l+1)) with a b = 1/L; a 4D set by products of two
// such cells, followed by admissible closure.

#include "pattern.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace stochid
{

struct Box
{
    std::vector<double> lo;
    std::vector<double> len;

    bool operator==(const Box&) const = default;
};

class BoxSet
{
public:
    BoxSet(int dim, std::vector<Box> boxes) : dim_(dim), boxes_(std::move(boxes))
    {
        if (dim_ != 2 && dim_ != 4)
            throw InputError("box set: dim must be 2 or 4");
        for (const auto& b : boxes_)
        {
            if (static_cast<int>(b.lo.size()) != dim_ || static_cast<int>(b.len.size()) != dim_)
                throw InputError("box set: box dimension mismatch");
            for (int i = 0; i < dim_; ++i)
            {
                if (!std::isfinite(b.lo[i]) || !std::isfinite(b.len[i]))
                    throw InputError("box set: unbounded box");
                if (!(b.len[i] > 0.0))
                    throw InputError("box set: side lengths must be positive");
            }
        }
    }

    int dim() const { return dim_; }
    const std::vector<Box>& boxes() const { return boxes_; }

    double volume_upper_bound() const
    {
        double v = 0.0;
        for (const auto& b : boxes_)
        {
            double bv = 1.0;
            for (double s : b.len)
                bv *= s;
            v += bv;
        }
        return v;
    }

    bool operator==(const BoxSet&) const = default;

private:
    int dim_;
    std::vector<Box> boxes_;
};

struct Rectification
{
    double a = 0.0;
    double b = 0.0;
    int L = 0;
    int dim = 2;
    // Lattice origin (time, frequency) shared by all axes of the same kind.
    double t0 = 0.0;
    double f0 = 0.0;
    Pattern pattern;
    std::size_t raw_size = 0; // cover size before admissible closure (4D)

    // |Gamma| / L in 2D, |Lambda| / L^2 in 4D.
    double volume_estimate() const
    {
        if (dim == 2)
            return static_cast<double>(pattern.gamma().size()) / L;
        return static_cast<double>(pattern.size()) / (static_cast<double>(L) * L);
    }

    bool volume_exceeds_one() const { return dim == 4 && pattern.size() > static_cast<std::size_t>(L) * L; }

    // Cell containing the point (t, f), if it lies inside the L x L window.
    std::optional<Cell> cell_of(double t, double f) const
    {
        const auto k = static_cast<int>(std::floor((t - t0) / a));
        const auto l = static_cast<int>(std::floor((f - f0) / b));
        if (k < 0 || k >= L || l < 0 || l >= L)
            return std::nullopt;
        return Cell{k, l};
    }
};

namespace detail
{

// Cell index range [first, last] along one axis for the half-open [lo, lo+len).
inline std::pair<int, int> cell_range(double lo, double len, double origin, double step, int L)
{
    constexpr double slack = 1e-9;
    const double s = (lo - origin) / step;
    const double e = (lo + len - origin) / step;
    const int first = static_cast<int>(std::floor(s + slack));
    const int last = static_cast<int>(std::ceil(e - slack)) - 1;
    if (first < 0 || last >= L)
        throw InputError("rectify: set does not fit in the L x L lattice window; increase a or L");
    return {first, std::max(first, last)};
}

inline void check_lattice(int L, double a)
{
    if (!is_prime(L))
        throw InputError("rectify: L must be prime");
    if (!(a > 0.0) || !std::isfinite(a))
        throw InputError("rectify: cell width a must be positive");
}

inline double default_width(int L) { return 1.0 / std::sqrt(static_cast<double>(L)); }

} // namespace detail

// Cells meeting the 2D set, on the lattice anchored at the bounding-box lower
// corner. b = 1 / (a L); a defaults to 1 / sqrt(L).
inline Rectification rectify_2d(const BoxSet& s, int L, std::optional<double> a_opt = std::nullopt)
{
    if (s.dim() != 2)
        throw InputError("rectify_2d: expected a 2D box set");
    const double a = a_opt.value_or(detail::default_width(L));
    detail::check_lattice(L, a);
    const double b = 1.0 / (a * L);
    double t0 = std::numeric_limits<double>::infinity(), f0 = t0;
    for (const auto& box : s.boxes())
    {
        t0 = std::min(t0, box.lo[0]);
        f0 = std::min(f0, box.lo[1]);
    }
    QuadSet lambda;
    for (const auto& box : s.boxes())
    {
        const auto [k0, k1] = detail::cell_range(box.lo[0], box.len[0], t0, a, L);
        const auto [l0, l1] = detail::cell_range(box.lo[1], box.len[1], f0, b, L);
        for (int k = k0; k <= k1; ++k)
            for (int l = l0; l <= l1; ++l)
                lambda.insert(Quad{{k, l}, {k, l}});
    }
    if (s.boxes().empty())
        t0 = f0 = 0.0;
    const std::size_t raw = lambda.size();
    return {a, b, L, 2, t0, f0, Pattern(L, std::move(lambda)), raw};
}

// 4D cover (t, f, t', f') with both cell pairs on the same lattice, then
// admissible closure. raw_size keeps the cover before closure.
inline Rectification rectify_4d_symmetric(const BoxSet& m, int L, std::optional<double> a_opt = std::nullopt)
{
    if (m.dim() != 4)
        throw InputError("rectify_4d_symmetric: expected a 4D box set");
    const double a = a_opt.value_or(detail::default_width(L));
    detail::check_lattice(L, a);
    const double b = 1.0 / (a * L);
    double t0 = std::numeric_limits<double>::infinity(), f0 = t0;
    for (const auto& box : m.boxes())
    {
        t0 = std::min({t0, box.lo[0], box.lo[2]});
        f0 = std::min({f0, box.lo[1], box.lo[3]});
    }
    if (m.boxes().empty())
        t0 = f0 = 0.0;
    QuadSet raw;
    for (const auto& box : m.boxes())
    {
        const auto rk = detail::cell_range(box.lo[0], box.len[0], t0, a, L);
        const auto rl = detail::cell_range(box.lo[1], box.len[1], f0, b, L);
        const auto rkp = detail::cell_range(box.lo[2], box.len[2], t0, a, L);
        const auto rlp = detail::cell_range(box.lo[3], box.len[3], f0, b, L);
        for (int k = rk.first; k <= rk.second; ++k)
            for (int l = rl.first; l <= rl.second; ++l)
                for (int kp = rkp.first; kp <= rkp.second; ++kp)
                    for (int lp = rlp.first; lp <= rlp.second; ++lp)
                        raw.insert(Quad{{k, l}, {kp, lp}});
    }
    const std::size_t raw_size = raw.size();
    QuadSet closed = admissible_closure(raw);
    if (closed.size() > 4 * raw_size)
        throw Error("rectify_4d_symmetric: closure grew beyond four times the raw cover");
    return {a, b, L, 4, t0, f0, Pattern(L, std::move(closed)), raw_size};
}

// Support of a WSSUS autocorrelation, {(x, x) : x in S}: diagonal Lambda over the 2D cover.
inline Rectification rectify_diagonal(const BoxSet& s, int L, std::optional<double> a = std::nullopt)
{
    Rectification r = rectify_2d(s, L, a);
    r.dim = 4;
    return r;
}

// S x S: tensor square of the 2D cover.
inline Rectification rectify_tensor_square(const BoxSet& s, int L, std::optional<double> a = std::nullopt)
{
    Rectification r = rectify_2d(s, L, a);
    r.pattern = tensor_square(L, r.pattern.gamma());
    r.raw_size = r.pattern.size();
    r.dim = 4;
    return r;
}

inline double volume_estimate(const Rectification& r) { return r.volume_estimate(); }

} // namespace stochid

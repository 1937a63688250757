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

#include <catch2/catch_amalgamated.hpp>

#include <stochid/rectification.hpp>

#include <random>
#include <set>

using namespace stochid;

namespace
{

Box box2(double t, double f, double lt, double lf) { return {{t, f}, {lt, lf}}; }

// [0,1) x [0,1) minus [0.6,1) x [0.5,1): area 0.8.
BoxSet l_shape()
{
    return BoxSet(2, {box2(0.0, 0.0, 1.0, 0.5), box2(0.0, 0.5, 0.6, 0.5)});
}

bool in_box(const Box& b, const std::vector<double>& x)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < b.lo[i] || x[i] >= b.lo[i] + b.len[i])
            return false;
    return true;
}

// Cells hit by raster pixel centres lying in the set, on the lattice of r.
// Pixel pitch is far below the cell size, so for box unions this recovers
// every cell whose interior meets the set.
std::set<Cell> raster_cells(const BoxSet& s, const Rectification& r, int res)
{
    std::set<Cell> out;
    double tmax = 0.0, fmax = 0.0;
    for (const auto& b : s.boxes())
    {
        tmax = std::max(tmax, b.lo[0] + b.len[0]);
        fmax = std::max(fmax, b.lo[1] + b.len[1]);
    }
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j)
        {
            const double t = r.t0 + (i + 0.5) * (tmax - r.t0) / res;
            const double f = r.f0 + (j + 0.5) * (fmax - r.f0) / res;
            for (const auto& b : s.boxes())
                if (in_box(b, {t, f}))
                {
                    out.insert({static_cast<int>(std::floor((t - r.t0) / r.a)),
                                static_cast<int>(std::floor((f - r.f0) / r.b))});
                    break;
                }
        }
    return out;
}

// Each box meets at most (len/a + 2) cells per axis: content plus a boundary term.
double boundary_bound(const BoxSet& s, const Rectification& r)
{
    double cells = 0.0;
    for (const auto& b : s.boxes())
        cells += (b.len[0] / r.a + 2.0) * (b.len[1] / r.b + 2.0);
    return cells / r.L;
}

} // namespace

TEST_CASE("BoxSet validation", "[rectification]")
{
    CHECK_THROWS_AS(BoxSet(3, {}), InputError);
    CHECK_THROWS_AS(BoxSet(2, {Box{{0.0}, {1.0}}}), InputError);
    CHECK_THROWS_AS(BoxSet(2, {box2(0, 0, 0.0, 1)}), InputError);
    CHECK_THROWS_AS(BoxSet(2, {box2(0, 0, -1.0, 1)}), InputError);
    CHECK_THROWS_AS(BoxSet(2, {box2(0, 0, std::numeric_limits<double>::infinity(), 1)}), InputError);
    CHECK_THROWS_AS(BoxSet(2, {box2(std::nan(""), 0, 1, 1)}), InputError);
    CHECK(l_shape().volume_upper_bound() == Catch::Approx(0.8));
}

TEST_CASE("single lattice box gives one cell", "[rectification]")
{
    for (int L : {2, 5, 7, 13})
    {
        const double a = 1.0 / std::sqrt(static_cast<double>(L));
        const double b = 1.0 / (a * L);
        const Rectification r = rectify_2d(BoxSet(2, {box2(0.0, 0.0, a, b)}), L);
        CHECK(r.pattern.gamma().size() == 1);
        CHECK(r.a * r.b * L == Catch::Approx(1.0));
        CHECK(volume_estimate(r) == Catch::Approx(1.0 / L));
        // Shifted copy on an explicit width.
        const Rectification s = rectify_2d(BoxSet(2, {box2(3.0, -2.0, 0.25, 1.0 / (0.25 * L))}), L, 0.25);
        CHECK(s.pattern.gamma().size() == 1);
        CHECK(s.t0 == 3.0);
        CHECK(s.f0 == -2.0);
    }
    const Rectification one = rectify_diagonal(BoxSet(2, {box2(0.0, 0.0, 0.1, 0.1)}), 7);
    CHECK(volume_estimate(one) == Catch::Approx(1.0 / 49.0));
}

TEST_CASE("unit square cover inequality", "[rectification]")
{
    const Rectification r = rectify_2d(BoxSet(2, {box2(0.0, 0.0, 1.0, 1.0)}), 5);
    CHECK(r.a == Catch::Approx(1.0 / std::sqrt(5.0)));
    CHECK(r.b == Catch::Approx(1.0 / std::sqrt(5.0)));
    // ceil(sqrt 5) = 3 cells per axis.
    CHECK(r.pattern.gamma().size() == 9);
    CHECK(static_cast<double>(r.pattern.gamma().size()) * r.a * r.b >= 1.0);
    CHECK(r.pattern.size() == r.pattern.gamma().size());
}

TEST_CASE("L-shape: raster oracle and convergence to the content", "[rectification]")
{
    const BoxSet s = l_shape();
    std::vector<double> est;
    for (int L : {5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 97, 199, 401})
    {
        const Rectification r = rectify_2d(s, L);
        const std::set<Cell> oracle = raster_cells(s, r, 1200);
        const std::set<Cell> got(r.pattern.gamma().begin(), r.pattern.gamma().end());
        CHECK(got == oracle);
        est.push_back(volume_estimate(r));
        CHECK(est.back() >= 0.8);
        CHECK(est.back() <= boundary_bound(s, r));
    }
    // Alignment makes the sequence wiggle; the tail sits below 1 and the
    // bound forces convergence to 0.8.
    CHECK(est.back() < 1.0);
    CHECK(est.back() - 0.8 < 0.15);
    CHECK(est.back() < est.front());
}

TEST_CASE("refinement never adds more than the boundary term", "[rectification]")
{
    const std::vector<BoxSet> sets{l_shape(), BoxSet(2, {box2(0.1, 0.2, 0.7, 0.9)}),
                                   BoxSet(2, {box2(0.0, 0.0, 0.3, 0.3), box2(0.5, 0.5, 0.4, 0.2)})};
    for (const auto& s : sets)
        for (int L = 5; L < 400; L = next_prime(2 * L))
        {
            const Rectification coarse = rectify_2d(s, L);
            const Rectification fine = rectify_2d(s, next_prime(2 * L));
            CHECK(volume_estimate(fine) <= boundary_bound(s, coarse));
            CHECK(volume_estimate(fine) >= s.volume_upper_bound() - 1e-12);
        }
}

TEST_CASE("cover correctness on sampled points", "[rectification]")
{
    std::mt19937_64 rng(21);
    const std::vector<BoxSet> sets{l_shape(), BoxSet(2, {box2(-0.3, 0.4, 0.9, 0.35), box2(0.2, -0.1, 0.1, 1.2)})};
    for (const auto& s : sets)
        for (int L : {5, 11, 31})
        {
            const Rectification r = rectify_2d(s, L);
            for (const auto& b : s.boxes())
            {
                std::uniform_real_distribution<double> ut(b.lo[0], b.lo[0] + b.len[0]);
                std::uniform_real_distribution<double> uf(b.lo[1], b.lo[1] + b.len[1]);
                int missed = 0;
                for (int i = 0; i < 10000; ++i)
                {
                    const auto c = r.cell_of(ut(rng), uf(rng));
                    if (!c || !r.pattern.gamma_index(*c))
                        ++missed;
                }
                // Corners, which uniform sampling never hits exactly.
                for (const auto& c : {r.cell_of(b.lo[0], b.lo[1]), r.cell_of(b.lo[0], b.lo[1] + b.len[1] * (1 - 1e-12))})
                    if (!c || !r.pattern.gamma_index(*c))
                        ++missed;
                CHECK(missed == 0);
            }
        }
}

TEST_CASE("4D covers: tensor square, diagonal, closure", "[rectification]")
{
    const BoxSet s = l_shape();
    for (int L : {5, 7, 13})
    {
        const Rectification r2 = rectify_2d(s, L);
        const std::size_t m = r2.pattern.gamma().size();
        const Rectification sq = rectify_tensor_square(s, L);
        CHECK(sq.pattern.size() == m * m);
        CHECK(volume_estimate(sq) == Catch::Approx(static_cast<double>(m * m) / (L * L)));
        const Rectification dg = rectify_diagonal(s, L);
        CHECK(dg.pattern.size() == m);
        CHECK(dg.pattern.gamma() == r2.pattern.gamma());

        // The same product through the generic 4D path.
        std::vector<Box> boxes;
        for (const auto& b1 : s.boxes())
            for (const auto& b2 : s.boxes())
                boxes.push_back({{b1.lo[0], b1.lo[1], b2.lo[0], b2.lo[1]}, {b1.len[0], b1.len[1], b2.len[0], b2.len[1]}});
        const Rectification g = rectify_4d_symmetric(BoxSet(4, boxes), L);
        CHECK(g.pattern == sq.pattern);
        CHECK(g.raw_size == g.pattern.size());
    }
}

TEST_CASE("4D box of volume 1.2 raises the flag", "[rectification]")
{
    const int L = 7;
    const BoxSet m(4, {Box{{0.0, 0.0, 0.0, 0.0}, {1.2, 1.0, 1.0, 1.0}}});
    const Rectification r = rectify_4d_symmetric(m, L);
    // Raster oracle: cells met by a fine sample of the box, then symmetrized.
    QuadSet raster;
    const int res = 24;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j)
            for (int u = 0; u < res; ++u)
                for (int v = 0; v < res; ++v)
                {
                    const auto c1 = r.cell_of((i + 0.5) * 1.2 / res, (j + 0.5) / res);
                    const auto c2 = r.cell_of((u + 0.5) / res, (v + 0.5) / res);
                    REQUIRE(c1);
                    REQUIRE(c2);
                    raster.insert(Quad{*c1, *c2});
                }
    CHECK(r.raw_size == raster.size());
    CHECK(r.pattern.lambda() == admissible_closure(raster));
    CHECK(r.pattern.size() <= 4 * r.raw_size);
    CHECK(volume_estimate(r) >= 1.2);
    CHECK(r.volume_exceeds_one());
    CHECK(r.pattern.size() > static_cast<std::size_t>(L * L));

    const Rectification small = rectify_4d_symmetric(BoxSet(4, {Box{{0, 0, 0, 0}, {0.3, 0.3, 0.3, 0.3}}}), L);
    CHECK_FALSE(small.volume_exceeds_one());
}

TEST_CASE("closure at most quadruples random 4D covers", "[rectification]")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> lo(0.0, 1.0), len(0.05, 0.6);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<Box> boxes;
        const int nb = 1 + trial % 3;
        for (int i = 0; i < nb; ++i)
            boxes.push_back({{lo(rng), lo(rng), lo(rng), lo(rng)}, {len(rng), len(rng), len(rng), len(rng)}});
        const Rectification r = rectify_4d_symmetric(BoxSet(4, boxes), 11);
        CHECK(r.pattern.size() <= 4 * r.raw_size);
        CHECK(r.pattern.size() >= r.raw_size);
        CHECK(is_admissible(r.pattern.lambda()));
    }
}

TEST_CASE("rectification errors", "[rectification]")
{
    const BoxSet s = l_shape();
    CHECK_THROWS_AS(rectify_2d(s, 6), InputError);
    CHECK_THROWS_AS(rectify_2d(s, 1), InputError);
    CHECK_THROWS_AS(rectify_2d(s, 5, 0.0), InputError);
    CHECK_THROWS_AS(rectify_2d(s, 5, -1.0), InputError);
    CHECK_THROWS_AS(rectify_4d_symmetric(s, 5), InputError);
    CHECK_THROWS_AS(rectify_2d(BoxSet(4, {}), 5), InputError);
    // Too wide for the aL = sqrt(L) window.
    CHECK_THROWS_AS(rectify_2d(BoxSet(2, {box2(0, 0, 10.0, 0.1)}), 5), InputError);
    CHECK(rectify_2d(BoxSet(2, {}), 5).pattern.size() == 0);
}

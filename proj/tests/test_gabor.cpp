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

#include <stochid/gabor.hpp>

#include <array>
#include <cmath>
#include <numeric>

using namespace stochid;

namespace
{

CVector random_vector(int n, Rng& rng)
{
    CVector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = complex_normal(rng);
    return v;
}

// Direct triple loop with angles from std::exp, independent of unit_root.
CMatrix gabor_oracle(const CVector& c)
{
    const int L = static_cast<int>(c.size());
    CMatrix G(L, L * L);
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            for (int j = 0; j < L; ++j)
                G(j, k * L + l) = std::exp(cx(0.0, 2.0 * M_PI * l * j / L)) * c(((j - k) % L + L) % L);
    return G;
}

// Rank via SVD with a relative threshold.
int svd_rank(const CMatrix& m)
{
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        r += s(i) > 1e-10 * s(0);
    return r;
}

} // namespace

TEST_CASE("translate - delta shifts and identity")
{
    CVector e0(3);
    e0 << 1.0, 0.0, 0.0;
    CHECK(translate(e0, 0) == e0);
    CVector e1(3);
    e1 << 0.0, 1.0, 0.0;
    CHECK(translate(e0, 1) == e1);
    CHECK(translate(e0, 4) == e1); // reduced mod L
    CHECK(translate(e0, -2) == e1);
}

TEST_CASE("translate - group inverse")
{
    Rng rng(11);
    for (int L : {1, 2, 5, 8, 13})
    {
        const CVector c = random_vector(L, rng);
        for (int k = 0; k < L; ++k)
            CHECK(translate(translate(c, k), L - k) == c);
    }
}

TEST_CASE("modulate - identity, sign flip, unimodular phase")
{
    Rng rng(12);
    const CVector c = random_vector(7, rng);
    CHECK(modulate(c, 0) == c);

    CVector ones(2);
    ones << 1.0, 1.0;
    const CVector flipped = modulate(ones, 1);
    CHECK(std::abs(flipped(0) - cx(1.0)) < 1e-15);
    CHECK(std::abs(flipped(1) - cx(-1.0)) < 1e-15);

    for (int l = 0; l < 7; ++l)
    {
        const CVector m = modulate(c, l);
        for (int p = 0; p < 7; ++p)
            CHECK(std::abs(std::abs(m(p)) - std::abs(c(p))) < 1e-14);
    }
}

TEST_CASE("Heisenberg commutation relation on Z_L")
{
    Rng rng(13);
    for (int L : {2, 3, 5, 6, 11})
    {
        const CVector c = random_vector(L, rng);
        for (int k = 0; k < L; ++k)
            for (int l = 0; l < L; ++l)
            {
                const CVector lhs = modulate(translate(c, k), l);
                const CVector rhs = std::exp(cx(0.0, 2.0 * M_PI * l * k / L)) * translate(modulate(c, l), k);
                CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
            }
    }
}

TEST_CASE("Window - rejects zero and empty vectors")
{
    CHECK_THROWS_AS(Window(CVector::Zero(4)), InputError);
    CHECK_THROWS_AS(Window(CVector()), InputError);
    CHECK_NOTHROW(delta_window(3));
}

TEST_CASE("gabor_matrix - closed form equals modulate o translate and the triple-loop oracle")
{
    Rng rng(14);
    for (int L : {1, 3, 4, 5, 7})
    {
        const Window w(random_vector(L, rng));
        const GaborSystem sys = gabor_matrix(w);
        REQUIRE(sys.G.rows() == L);
        REQUIRE(sys.G.cols() == L * L);
        CHECK((sys.G - gabor_oracle(w.c())).cwiseAbs().maxCoeff() < 1e-13);
        for (int k = 0; k < L; ++k)
            for (int l = 0; l < L; ++l)
            {
                CHECK((sys.atom(k, l) - modulate(translate(w.c(), k), l)).cwiseAbs().maxCoeff() < 1e-14);
                CHECK(std::abs(sys.atom(k, l).norm() - w.c().norm()) < 1e-12);
            }
    }
}

TEST_CASE("gabor_matrix - delta window has one nonzero per column")
{
    const GaborSystem sys = gabor_matrix(delta_window(3));
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
        {
            const auto col = sys.atom(k, l);
            int nonzero = 0;
            for (int j = 0; j < 3; ++j)
                nonzero += std::abs(col(j)) > 0.0;
            CHECK(nonzero == 1);
            CHECK(std::abs(col(k) - std::exp(cx(0.0, 2.0 * M_PI * l * k / 3.0))) < 1e-15);
        }
}

TEST_CASE("gabor_matrix - all-ones window, unmodulated columns are all ones")
{
    const GaborSystem sys = gabor_matrix(Window(CVector::Ones(4)));
    for (int k = 0; k < 4; ++k)
        CHECK((sys.atom(k, 0) - CVector::Ones(4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gabor_matrix - random unimodular window L=5 spot check of full spark")
{
    Rng rng(15);
    const GaborSystem sys = gabor_matrix(random_unimodular_window(5, rng));
    std::vector<int> cols(25);
    std::iota(cols.begin(), cols.end(), 0);
    for (int trial = 0; trial < 100; ++trial)
    {
        std::shuffle(cols.begin(), cols.end(), rng);
        CMatrix sub(5, 5);
        for (int i = 0; i < 5; ++i)
            sub.col(i) = sys.G.col(cols[i]);
        CHECK(svd_rank(sub) == 5);
    }
}

// The Alltop window is not full spark at L = 5; the count was obtained by
// exhaustive enumeration of all C(25, 5) column subsets.
TEST_CASE("gabor_matrix - Alltop window L=5 has 5125 singular 5-subsets")
{
    const GaborSystem sys = gabor_matrix(alltop_window(5));
    int singular = 0, total = 0;
    std::array<int, 5> idx{};
    for (idx[0] = 0; idx[0] < 25; ++idx[0])
        for (idx[1] = idx[0] + 1; idx[1] < 25; ++idx[1])
            for (idx[2] = idx[1] + 1; idx[2] < 25; ++idx[2])
                for (idx[3] = idx[2] + 1; idx[3] < 25; ++idx[3])
                    for (idx[4] = idx[3] + 1; idx[4] < 25; ++idx[4])
                    {
                        CMatrix sub(5, 5);
                        for (int i = 0; i < 5; ++i)
                            sub.col(i) = sys.G.col(idx[i]);
                        singular += svd_rank(sub) < 5;
                        ++total;
                    }
    CHECK(total == 53130);
    CHECK(singular == 5125);

    // Pure modulations: diag(c) times a DFT matrix, always invertible.
    CMatrix mods(5, 5);
    for (int l = 0; l < 5; ++l)
        mods.col(l) = sys.atom(0, l);
    CHECK(svd_rank(mods) == 5);
}

TEST_CASE("discrete_zak - single impulse")
{
    CVector f = CVector::Zero(4);
    f(0) = 1.0;
    const CMatrix Z = discrete_zak(f, 2);
    CHECK(Z.rows() == 2);
    CHECK(Z.cols() == 2);
    CHECK((Z.row(0) - Eigen::RowVector2cd(1.0, 1.0)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(Z.row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("discrete_zak - naive double loop oracle, M=3, N=5")
{
    Rng rng(16);
    const CVector f = random_vector(15, rng);
    const CMatrix Z = discrete_zak(f, 3);
    for (int j = 0; j < 3; ++j)
        for (int m = 0; m < 5; ++m)
        {
            cx acc = 0.0;
            for (int r = 0; r < 5; ++r)
                acc += f(j + 3 * r) * std::exp(cx(0.0, 2.0 * M_PI * r * m / 5.0));
            CHECK(std::abs(Z(j, m) - acc) < 1e-13);
        }
}

TEST_CASE("discrete_zak - invertible, round trip up to length 1e4")
{
    Rng rng(17);
    for (auto [M, N] : std::vector<std::pair<int, int>>{{1, 7}, {4, 4}, {3, 5}, {100, 100}, {10, 1000}})
    {
        const CVector f = random_vector(M * N, rng);
        const CVector back = inverse_zak(discrete_zak(f, M));
        CHECK((back - f).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("discrete_zak - rejects lengths not divisible by M")
{
    CHECK_THROWS_AS(discrete_zak(CVector::Ones(7), 3), InputError);
    CHECK_THROWS_AS(discrete_zak(CVector::Ones(6), 0), InputError);
}

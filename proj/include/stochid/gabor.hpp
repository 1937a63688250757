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

// Finite time-frequency shifts on Z_L, the Gabor synthesis matrix of a window
// and the discrete (non-normalized) Zak transform.
//
// Column convention used by every module: the atom M^l T^k c sits in column
// k*L + l of the synthesis matrix.

#include "types.hpp"
#include "util.hpp"

#include <span>
#include <vector>

namespace stochid
{

// Cyclic translation: out[p] = c[(p - k) mod L].
inline CVector translate(const CVector& c, std::int64_t k)
{
    const std::int64_t L = c.size();
    CVector out(L);
    for (std::int64_t p = 0; p < L; ++p)
        out(p) = c(mod(p - k, L));
    return out;
}

// Modulation: out[p] = exp(2 pi i l p / L) c[p].
inline CVector modulate(const CVector& c, std::int64_t l)
{
    const std::int64_t L = c.size();
    CVector out(L);
    for (std::int64_t p = 0; p < L; ++p)
        out(p) = unit_root(l * p, L) * c(p);
    return out;
}

// Sounding window: weights c of length L of a periodic delta train.
class Window
{
public:
    explicit Window(CVector c) : c_(std::move(c))
    {
        if (c_.size() == 0)
            throw InputError("window: empty coefficient vector");
        if (c_.squaredNorm() == 0.0)
            throw InputError("window: coefficient vector is zero");
        for (Eigen::Index i = 0; i < c_.size(); ++i)
            if (!std::isfinite(c_(i).real()) || !std::isfinite(c_(i).imag()))
                throw InputError("window: non-finite coefficient");
    }

    int L() const { return static_cast<int>(c_.size()); }
    const CVector& c() const { return c_; }

    bool operator==(const Window& other) const { return c_ == other.c_; }

private:
    CVector c_;
};

// Alltop window c_p = exp(2 pi i p^3 / L).
inline Window alltop_window(int L)
{
    CVector c(L);
    for (std::int64_t p = 0; p < L; ++p)
        c(p) = unit_root(p * p * p, L);
    return Window(std::move(c));
}

// Unit-modulus entries with independent uniform phases.
inline Window random_unimodular_window(int L, Rng& rng)
{
    std::uniform_real_distribution<double> phase(0.0, two_pi);
    CVector c(L);
    for (int p = 0; p < L; ++p)
        c(p) = std::polar(1.0, phase(rng));
    return Window(std::move(c));
}

// Circular complex Gaussian entries, rescaled to ||c||^2 = L.
inline Window random_gaussian_window(int L, Rng& rng)
{
    CVector c(L);
    for (int p = 0; p < L; ++p)
        c(p) = complex_normal(rng);
    c *= std::sqrt(static_cast<double>(L)) / c.norm();
    return Window(std::move(c));
}

inline Window delta_window(int L, int position = 0)
{
    CVector c = CVector::Zero(L);
    c(mod(position, L)) = 1.0;
    return Window(std::move(c));
}

struct GaborSystem
{
    int L = 0;
    CMatrix G; // L x L^2

    static constexpr Eigen::Index column(int L, int k, int l) { return static_cast<Eigen::Index>(k) * L + l; }

    auto atom(int k, int l) const { return G.col(column(L, k, l)); }
};

// G[j, kL + l] = exp(2 pi i l j / L) c[(j - k) mod L].
inline GaborSystem gabor_matrix(const Window& w)
{
    const int L = w.L();
    const CVector& c = w.c();
    GaborSystem sys{L, CMatrix(L, static_cast<Eigen::Index>(L) * L)};
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
        {
            const Eigen::Index col = GaborSystem::column(L, k, l);
            for (int j = 0; j < L; ++j)
                sys.G(j, col) = unit_root(static_cast<std::int64_t>(l) * j, L) * c(mod(j - k, L));
        }
    return sys;
}

// Non-normalized discrete Zak transform of f (length M*N):
//   Z[j, m] = sum_r f[j + r M] exp(2 pi i r m / N).
inline CMatrix discrete_zak(const CVector& f, int M)
{
    if (M <= 0 || f.size() == 0 || f.size() % M != 0)
        throw InputError("discrete_zak: length must be a positive multiple of M");
    const int N = static_cast<int>(f.size() / M);
    CMatrix Z(M, N);
    // Twiddles by exact residue r*m mod N.
    std::vector<cx> roots(N);
    for (int q = 0; q < N; ++q)
        roots[q] = unit_root(q, N);
    for (int j = 0; j < M; ++j)
        for (int m = 0; m < N; ++m)
        {
            cx acc = 0.0;
            for (int r = 0; r < N; ++r)
                acc += f(j + static_cast<Eigen::Index>(r) * M) * roots[(static_cast<std::int64_t>(r) * m) % N];
            Z(j, m) = acc;
        }
    return Z;
}

// Inverse of discrete_zak: f[j + r M] = (1/N) sum_m Z[j, m] exp(-2 pi i r m / N).
inline CVector inverse_zak(const CMatrix& Z)
{
    const Eigen::Index M = Z.rows(), N = Z.cols();
    if (M == 0 || N == 0)
        throw InputError("inverse_zak: empty input");
    std::vector<cx> roots(N);
    for (Eigen::Index q = 0; q < N; ++q)
        roots[q] = std::conj(unit_root(q, N));
    CVector f(M * N);
    for (Eigen::Index j = 0; j < M; ++j)
        for (Eigen::Index r = 0; r < N; ++r)
        {
            cx acc = 0.0;
            for (Eigen::Index m = 0; m < N; ++m)
                acc += Z(j, m) * roots[(r * m) % N];
            f(j + r * M) = acc / static_cast<double>(N);
        }
    return f;
}

} // namespace stochid

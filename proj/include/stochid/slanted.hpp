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

// Truncations of bi-infinite matrices M : l^p1(Z^d1) -> l^p2(Z^d2) whose
// entries decay away from the lambda-slanted diagonal,
//   |M(z2, z1)| <= w(lambda |z2| - |z1|) (1 + |z1|)^r1 (1 + |z2|)^r2,
// with w(x) = scale (1 + max(x, 0))^-r and |.| the sup norm. Entries are
// produced lazily from a hash of the indices. Singular slanted minors are
// planted by making one column of the minor, restricted to its rows, the
// average of two other columns.

#include "types.hpp"
#include "util.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace stochid
{

using Index = std::vector<int>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

// 1/p with 1/inf = 0.
inline double reciprocal(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// Conjugate exponent q with 1/p + 1/q = 1.
inline double conjugate_exponent(double p)
{
    if (p == 1.0)
        return inf;
    if (std::isinf(p))
        return 1.0;
    return p / (p - 1.0);
}

inline int sup_norm(const Index& z)
{
    int m = 0;
    for (int v : z)
        m = std::max(m, std::abs(v));
    return m;
}

inline double p_norm(const CVector& v, double p)
{
    if (std::isinf(p))
        return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += std::pow(std::abs(v(i)), p);
    return std::pow(s, 1.0 / p);
}

// All z in Z^d with |z| <= n, lexicographic (first coordinate most significant).
inline std::vector<Index> cube_indices(int d, int n)
{
    std::vector<Index> out;
    Index z(d, -n);
    if (n < 0)
        return out;
    while (true)
    {
        out.push_back(z);
        int i = d - 1;
        while (i >= 0 && z[i] == n)
            z[i--] = -n;
        if (i < 0)
            break;
        ++z[i];
    }
    return out;
}

inline std::size_t cube_size(int d, int n)
{
    std::size_t s = 1;
    for (int i = 0; i < d; ++i)
        s *= static_cast<std::size_t>(2 * n + 1);
    return s;
}

class SlantedFamily
{
public:
    int d1 = 1;
    int d2 = 1;
    double lambda = 1.0;
    double r = 3.0;
    double scale = 1.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double p1 = 2.0;
    double p2 = 2.0;
    std::uint64_t seed = 7;
    // Minors planted singular: (N2, plant_slant) for each N2 listed.
    std::vector<int> planted;
    double plant_slant = 0.5;

    // Throws InputError unless r > d1/q1 + d2/p2 + r1 + r2 and the planted
    // shells floor(plant_slant * N2) are distinct and >= 1.
    void validate() const
    {
        if (d1 < 1 || d2 < 1)
            throw InputError("slanted family: dimensions must be >= 1");
        if (!(lambda > 0.0) || !(scale > 0.0) || r1 < 0.0 || r2 < 0.0)
            throw InputError("slanted family: lambda, scale must be positive and r1, r2 nonnegative");
        if (p1 < 1.0 || p2 < 1.0)
            throw InputError("slanted family: norm exponents must lie in [1, inf]");
        if (!(r > exponent_threshold()))
            throw InputError("slanted family: decay exponent r must exceed d1/q1 + d2/p2 + r1 + r2");
        std::vector<int> shells;
        for (int n2 : planted)
        {
            const int n1 = shell(n2);
            if (n2 < 1 || n1 < 1)
                throw InputError("slanted family: planted minor has an empty shell");
            if (std::find(shells.begin(), shells.end(), n1) != shells.end())
                throw InputError("slanted family: planted minors share a column shell");
            shells.push_back(n1);
        }
    }

    double q1() const { return conjugate_exponent(p1); }

    double exponent_threshold() const { return d1 * reciprocal(q1()) + d2 * reciprocal(p2) + r1 + r2; }

    int shell(int n2) const { return static_cast<int>(std::floor(plant_slant * n2)); }

    double envelope(double x) const { return scale * std::pow(1.0 + std::max(x, 0.0), -r); }

    double bound(const Index& z2, const Index& z1) const
    {
        const int n1 = sup_norm(z1), n2 = sup_norm(z2);
        return envelope(lambda * n2 - n1) * std::pow(1.0 + n1, r1) * std::pow(1.0 + n2, r2);
    }

    cx entry(const Index& z2, const Index& z1) const
    {
        if (z1[0] > 0 && std::all_of(z1.begin() + 1, z1.end(), [](int v) { return v == 0; }))
        {
            for (int n2 : planted)
                if (shell(n2) == z1[0] && sup_norm(z2) <= n2)
                {
                    const auto [c1, c2] = plant_partners(z1[0]);
                    return 0.5 * (base(z2, c1) + base(z2, c2));
                }
        }
        return base(z2, z1);
    }

    // Unit p1-norm kernel vector of the minor at n2, if planted there. Keyed
    // by column multi-index; all other coordinates are zero.
    std::optional<std::vector<std::pair<Index, cx>>> planted_kernel(int n2, double slant) const
    {
        if (slant != plant_slant || std::find(planted.begin(), planted.end(), n2) == planted.end())
            return std::nullopt;
        const int n1 = shell(n2);
        Index c0(d1, 0);
        c0[0] = n1;
        const auto [c1, c2] = plant_partners(n1);
        std::vector<std::pair<Index, cx>> x{{c0, 1.0}, {c1, -0.5}, {c2, -0.5}};
        CVector v(3);
        v << 1.0, -0.5, -0.5;
        const double nrm = p_norm(v, p1);
        for (auto& e : x)
            e.second /= nrm;
        return x;
    }

private:
    std::pair<Index, Index> plant_partners(int n1) const
    {
        Index c1(d1, 0), c2(d1, 0);
        c1[0] = -n1;
        return {c1, c2};
    }

    cx base(const Index& z2, const Index& z1) const
    {
        std::uint64_t h = mix64(seed);
        for (int v : z2)
            h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
        h = mix64(h ^ 0xa5a5a5a5ULL);
        for (int v : z1)
            h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
        const double u1 = static_cast<double>(h >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
        return std::polar(bound(z2, z1) * (0.5 + 0.5 * u1), two_pi * u2);
    }
};

// d1 = d2 = 1, p1 = p2 = 2, r1 = r2 = 0, r = d1/q1 + d2/p2 + r1 + r2 + 2,
// planted minors at N2 = 4..128 with slant lambda/2.
inline SlantedFamily default_family(double lambda, double p = 2.0)
{
    SlantedFamily f;
    f.lambda = lambda;
    f.p1 = p;
    f.p2 = p;
    f.r = f.exponent_threshold() + 2.0;
    f.plant_slant = lambda / 2.0;
    f.planted = {4, 8, 16, 32, 64, 128};
    f.validate();
    return f;
}

inline constexpr std::size_t max_minor_entries = 100'000'000;

struct Minor
{
    std::vector<Index> rows; // z2, |z2| <= N2
    std::vector<Index> cols; // z1, |z1| <= floor(slant N2)
    CMatrix matrix;
};

inline Minor truncate(const SlantedFamily& fam, int n2, double slant)
{
    if (n2 < 1)
        throw InputError("truncate: N2 must be >= 1");
    if (slant > fam.lambda || !(slant > 0.0))
        throw InputError("truncate: slant must lie in (0, lambda]");
    const int n1 = static_cast<int>(std::floor(slant * n2));
    const std::size_t nr = cube_size(fam.d2, n2), nc = cube_size(fam.d1, n1);
    if (static_cast<double>(nr) * static_cast<double>(nc) > static_cast<double>(max_minor_entries))
        throw InputError("truncate: minor exceeds 1e8 entries");
    Minor m{cube_indices(fam.d2, n2), cube_indices(fam.d1, n1), {}};
    m.matrix.resize(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
    for (std::size_t j = 0; j < nc; ++j)
        for (std::size_t i = 0; i < nr; ++i)
            m.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fam.entry(m.rows[i], m.cols[j]);
    return m;
}

struct ProbeRow
{
    int n2 = 0;
    std::size_t minor_rows = 0;
    std::size_t minor_cols = 0;
    double sigma_min = std::numeric_limits<double>::quiet_NaN();
    double ratio = 0.0;
};

// Above this many entries the minor is not materialized for its SVD.
inline constexpr std::size_t probe_svd_limit = 4'000'000;

// For each N2: a unit p1-norm kernel vector of the slanted minor, padded with
// zeros, applied to the truncation with rows |z2| <= 4 N2; ratio = ||M x||_p2.
inline std::vector<ProbeRow> instability_probe(const SlantedFamily& fam, const std::vector<int>& n2_list, double slant,
                                               unsigned threads = 1)
{
    fam.validate();
    std::vector<ProbeRow> out(n2_list.size());
    parallel_for(n2_list.size(), threads, [&](std::size_t idx) {
        const int n2 = n2_list[idx];
        if (n2 < 1 || slant > fam.lambda || !(slant > 0.0))
            throw InputError("instability_probe: need N2 >= 1 and slant in (0, lambda]");
        const int n1 = static_cast<int>(std::floor(slant * n2));
        ProbeRow row;
        row.n2 = n2;
        row.minor_rows = cube_size(fam.d2, n2);
        row.minor_cols = cube_size(fam.d1, n1);

        std::vector<std::pair<Index, cx>> x;
        const bool small = row.minor_rows * row.minor_cols <= probe_svd_limit;
        std::optional<Minor> minor;
        if (small)
        {
            minor = truncate(fam, n2, slant);
            const bool tall = minor->matrix.rows() >= minor->matrix.cols();
            // Wide minors need the full V: their nullspace is not in the thin factor.
            Eigen::BDCSVD<CMatrix> svd(minor->matrix, tall ? Eigen::ComputeThinV : Eigen::ComputeFullV);
            const RVector& s = svd.singularValues();
            row.sigma_min = tall ? s(s.size() - 1) : 0.0;
            if (auto planted = fam.planted_kernel(n2, slant))
                x = *planted;
            else if (!tall || row.sigma_min <= 1e-12 * s(0))
            {
                const CVector v = svd.matrixV().col(minor->matrix.cols() - 1);
                const double nrm = p_norm(v, fam.p1);
                for (Eigen::Index j = 0; j < v.size(); ++j)
                    if (v(j) != cx(0.0))
                        x.push_back({minor->cols[j], v(j) / nrm});
            }
        }
        else if (auto planted = fam.planted_kernel(n2, slant))
            x = *planted;
        if (x.empty())
            throw MinorNotSingular("instability_probe: slanted minor at N2 = " + std::to_string(n2) +
                                   " has no kernel vector");

        // Kernel check on the minor's own rows.
        double inside = 0.0;
        for (const auto& z2 : cube_indices(fam.d2, n2))
        {
            cx acc = 0.0;
            for (const auto& [z1, v] : x)
                acc += fam.entry(z2, z1) * v;
            inside = std::max(inside, std::abs(acc));
        }
        double col_scale = 0.0;
        for (const auto& [z1, v] : x)
            col_scale = std::max(col_scale, fam.bound(Index(fam.d2, 0), z1));
        if (inside > 1e-10 * std::max(col_scale, 1e-300))
            throw MinorNotSingular("instability_probe: kernel vector fails on the minor at N2 = " + std::to_string(n2));

        const auto big_rows = cube_indices(fam.d2, 4 * n2);
        CVector mx(static_cast<Eigen::Index>(big_rows.size()));
        for (std::size_t i = 0; i < big_rows.size(); ++i)
        {
            cx acc = 0.0;
            for (const auto& [z1, v] : x)
                acc += fam.entry(big_rows[i], z1) * v;
            mx(static_cast<Eigen::Index>(i)) = acc;
        }
        row.ratio = p_norm(mx, fam.p2);
        out[idx] = row;
    });
    return out;
}

// Decay exponent of ||M x||_p2 in N2 from the proof, written through
// B = -p2 r2 - d2 + (p2 / q1)(s + 1), s = q1 r - d1:
//   r1 + 1/q1 - B/p2.
// The closed form r1 + r2 + d2/p2 + d1/q1 - r is returned alongside; the
// claim of decay needs both negative and equal.
struct DecayExponent
{
    double via_b = 0.0;
    double closed_form = 0.0;
    bool consistent = false;
    bool decays = false;
};

inline DecayExponent predicted_decay_exponent(const SlantedFamily& f)
{
    const double iq1 = reciprocal(f.q1()), ip2 = reciprocal(f.p2);
    // (p2 / q1)(s + 1) / p2 = (s + 1) / q1 = r - (d1 - 1) / q1, finite for q1 = inf.
    const double b_over_p2 = -f.r2 - f.d2 * ip2 + (f.r - (f.d1 - 1) * iq1);
    DecayExponent e;
    e.via_b = f.r1 + iq1 - b_over_p2;
    e.closed_form = f.r1 + f.r2 + f.d2 * ip2 + f.d1 * iq1 - f.r;
    e.consistent = std::abs(e.via_b - e.closed_form) <= 1e-12 * std::max(1.0, std::abs(e.closed_form));
    e.decays = e.via_b < 0.0 && e.closed_form < 0.0;
    return e;
}

// Least-squares slope of log(ratio) against log(N2).
inline double loglog_slope(const std::vector<ProbeRow>& rows)
{
    const auto n = static_cast<double>(rows.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows)
    {
        const double x = std::log(static_cast<double>(r.n2)), y = std::log(r.ratio);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct FaceCount
{
    long long exact = 0;
    long long formula = 0; // d 2^d K^(d-1)
};

// Number of z in Z^d with |z|_inf = K.
inline FaceCount face_count(int d, long long K)
{
    if (d < 1 || K < 1)
        throw InputError("face_count: need d >= 1 and K >= 1");
    auto ipow = [](long long b, int e) {
        long long v = 1;
        for (int i = 0; i < e; ++i)
            v *= b;
        return v;
    };
    return {ipow(2 * K + 1, d) - ipow(2 * K - 1, d), d * ipow(2, d) * ipow(K, d - 1)};
}

// (lambda (x - 1) - N1 - 1)^-r - (lambda (x - 1))^-r; zero for N1 = -1.
inline double convex_gap_lhs(double lambda, double x, long long n1, double r)
{
    const double a = lambda * (x - 1.0);
    const double b = static_cast<double>(n1 + 1);
    return std::pow(a - b, -r) - std::pow(a, -r);
}

struct ConvexGapResult
{
    double max_ratio = 0.0;
    // Bound on the ratio implied by the convexity argument for N2 >= N0.
    double convexity_constant = 0.0;
    long long n0 = 0;
    std::vector<std::pair<int, double>> per_n2; // (N2, max ratio over x)
    std::size_t skipped = 0;                    // grid points below N0
};

// Sweeps x over [N2 + 1, 10 N2] (geometric, `samples` points) for every
// N2 >= N0 = 2 ceil(1 / (lambda - pambda)) in the grid and returns
// max LHS / (x^(-r-1) (N1 + 1)) with N1 = floor(pambda N2).
inline ConvexGapResult convex_gap_check(double lambda, double pambda, double r, const std::vector<int>& n2_grid,
                                        int samples = 64)
{
    if (!(pambda > 0.0 && pambda < lambda) || !(r > 0.0))
        throw InputError("convex_gap_check: need 0 < pambda < lambda and r > 0");
    ConvexGapResult res;
    res.n0 = 2 * static_cast<long long>(std::ceil(1.0 / (lambda - pambda)));
    const double t0 = (lambda + pambda) / (2.0 * lambda);
    const double slope = (std::pow(1.0 - t0, -r) - 1.0) / t0;
    res.convexity_constant =
        slope * std::pow(lambda, -r - 1.0) * std::pow(1.0 - 1.0 / (static_cast<double>(res.n0) + 1.0), -r - 1.0);
    for (int n2 : n2_grid)
    {
        if (n2 < res.n0)
        {
            ++res.skipped;
            continue;
        }
        const auto n1 = static_cast<long long>(std::floor(pambda * n2));
        double best = 0.0;
        for (int i = 0; i < samples; ++i)
        {
            const double x = (n2 + 1.0) * std::pow(10.0 * n2 / (n2 + 1.0), static_cast<double>(i) / (samples - 1));
            const double ratio = convex_gap_lhs(lambda, x, n1, r) / (std::pow(x, -r - 1.0) * (n1 + 1.0));
            best = std::max(best, ratio);
        }
        res.per_n2.push_back({n2, best});
        res.max_ratio = std::max(res.max_ratio, best);
    }
    return res;
}

// f(t) = (1 - t)^-r - 1 is convex with f(0) = 0, so f(t)/t is nondecreasing on (0, t0].
inline bool convex_slope_monotone(double r, double t0, int samples = 1000)
{
    double prev = 0.0;
    for (int i = 1; i <= samples; ++i)
    {
        const double t = t0 * i / samples;
        const double v = (std::pow(1.0 - t, -r) - 1.0) / t;
        if (v < prev * (1.0 - 1e-12))
            return false;
        prev = v;
    }
    return true;
}

} // namespace stochid

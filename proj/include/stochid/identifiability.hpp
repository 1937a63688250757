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

// Decision procedure for identifiability of a pattern by a delta-train window:
// the restricted tensor (conj(G) (x) G) on Lambda, its singular values, and
// hermitian matrices N supported on Lambda with G N G^* = 0.

#include "defects.hpp"
#include "gabor.hpp"
#include "pattern.hpp"

#include <Eigen/SVD>
#include <Eigen/LU>
#include <Eigen/Eigenvalues>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace stochid
{

inline constexpr double default_tol = 1e-10;

// Columns of G belonging to Gamma, in pattern order.
inline CMatrix gamma_columns(const GaborSystem& sys, const Pattern& p)
{
    CMatrix out(sys.L, static_cast<Eigen::Index>(p.gamma().size()));
    for (std::size_t i = 0; i < p.gamma().size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = sys.atom(p.gamma()[i].k, p.gamma()[i].l);
    return out;
}

// Lambda-restricted tensor square. Row j*L + j', column = position of (g, g')
// in sorted Lambda; entry G[j, g] * conj(G[j', g']). Applied to vec_Lambda(X)
// it yields vec(G X G^*) in row-major order.
struct RestrictedTensor
{
    int L = 0;
    std::vector<Quad> order;
    CMatrix matrix;
};

inline RestrictedTensor restricted_tensor(const GaborSystem& sys, const Pattern& p)
{
    if (sys.L != p.L())
        throw InputError("restricted_tensor: window and pattern disagree on L");
    const int L = sys.L;
    RestrictedTensor t{L, std::vector<Quad>(p.lambda().begin(), p.lambda().end()), {}};
    t.matrix.resize(static_cast<Eigen::Index>(L) * L, static_cast<Eigen::Index>(t.order.size()));
    for (std::size_t c = 0; c < t.order.size(); ++c)
    {
        const auto& q = t.order[c];
        const auto a = sys.atom(q.first.k, q.first.l);
        const auto b = sys.atom(q.second.k, q.second.l);
        for (int j = 0; j < L; ++j)
            for (int jp = 0; jp < L; ++jp)
                t.matrix(static_cast<Eigen::Index>(j) * L + jp, static_cast<Eigen::Index>(c)) = a(j) * std::conj(b(jp));
    }
    return t;
}

inline RestrictedTensor restricted_tensor(const Window& w, const Pattern& p)
{
    return restricted_tensor(gabor_matrix(w), p);
}

// Gamma-indexed matrix -> coordinates on sorted Lambda.
inline CVector vec_lambda(const Pattern& p, const CMatrix& X)
{
    CVector v(static_cast<Eigen::Index>(p.size()));
    Eigen::Index c = 0;
    for (const auto& q : p.lambda())
        v(c++) = X(static_cast<Eigen::Index>(*p.gamma_index(q.first)), static_cast<Eigen::Index>(*p.gamma_index(q.second)));
    return v;
}

// Inverse of vec_lambda; entries off Lambda are zero.
inline CMatrix unvec_lambda(const Pattern& p, const CVector& v)
{
    const auto n = static_cast<Eigen::Index>(p.gamma().size());
    CMatrix X = CMatrix::Zero(n, n);
    Eigen::Index c = 0;
    for (const auto& q : p.lambda())
        X(static_cast<Eigen::Index>(*p.gamma_index(q.first)), static_cast<Eigen::Index>(*p.gamma_index(q.second))) = v(c++);
    return X;
}

// Row-major vectorization matching the row order of RestrictedTensor.
inline CVector vec_rows(const CMatrix& D)
{
    CVector v(D.size());
    for (Eigen::Index j = 0; j < D.rows(); ++j)
        for (Eigen::Index jp = 0; jp < D.cols(); ++jp)
            v(j * D.cols() + jp) = D(j, jp);
    return v;
}

inline CMatrix unvec_rows(const CVector& v, Eigen::Index n)
{
    CMatrix D(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index jp = 0; jp < n; ++jp)
            D(j, jp) = v(j * n + jp);
    return D;
}

// Largest |X - X^*| entry relative to the largest |X| entry.
inline double hermitian_defect(const CMatrix& X)
{
    const double scale = X.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    return (X - X.adjoint()).cwiseAbs().maxCoeff() / scale;
}

struct IdentifiabilityReport
{
    int rank = 0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool invertible = false;
    // sigma_max / sigma_min; infinite when sigma_min == 0.
    double condition = std::numeric_limits<double>::infinity();
    // Empty when invertible; "dimension" for |Lambda| > L^2, "rank" otherwise.
    std::string reason;

    bool operator==(const IdentifiabilityReport&) const = default;
};

inline IdentifiabilityReport check_identifiable(const RestrictedTensor& t, double tol = default_tol)
{
    const Eigen::Index cols = t.matrix.cols();
    if (cols == 0)
        throw InputError("check_identifiable: empty pattern");
    Eigen::BDCSVD<CMatrix> svd(t.matrix);
    const RVector& s = svd.singularValues();
    IdentifiabilityReport r;
    r.sigma_max = s.size() > 0 ? s(0) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        r.rank += s(i) > tol * r.sigma_max ? 1 : 0;
    const bool wide = cols > t.matrix.rows();
    r.sigma_min = wide ? 0.0 : s(s.size() - 1);
    r.invertible = !wide && r.sigma_min > tol * r.sigma_max;
    if (r.sigma_min > 0.0)
        r.condition = r.sigma_max / r.sigma_min;
    if (!r.invertible)
        r.reason = wide ? "dimension" : "rank";
    return r;
}

inline IdentifiabilityReport check_identifiable(const Window& w, const Pattern& p, double tol = default_tol)
{
    return check_identifiable(restricted_tensor(w, p), tol);
}

namespace detail
{

// Real parametrization of hermitian matrices supported on Lambda: one real
// coordinate per diagonal member, (re, im) of the entry at (g, g') for each
// swap pair with g < g'.
struct HermitianChart
{
    struct Coord
    {
        std::size_t row, col; // Gamma indices
        bool imaginary;
    };
    std::vector<Coord> coords;

    explicit HermitianChart(const Pattern& p)
    {
        for (const auto& q : p.lambda())
        {
            const auto a = *p.gamma_index(q.first), b = *p.gamma_index(q.second);
            if (a == b)
                coords.push_back({a, b, false});
            else if (a < b)
            {
                coords.push_back({a, b, false});
                coords.push_back({a, b, true});
            }
        }
    }

    CMatrix to_matrix(const RVector& x, std::size_t n) const
    {
        CMatrix N = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < coords.size(); ++i)
        {
            const auto& c = coords[i];
            const auto r = static_cast<Eigen::Index>(c.row), s = static_cast<Eigen::Index>(c.col);
            const cx v = c.imaginary ? cx(0.0, x(static_cast<Eigen::Index>(i))) : cx(x(static_cast<Eigen::Index>(i)), 0.0);
            N(r, s) += v;
            if (r != s)
                N(s, r) += std::conj(v);
        }
        return N;
    }
};

} // namespace detail

// Hermitian N supported on Lambda with G N G^* = 0 and ||N||_F = 1, found as
// the smallest right singular vector of the realified map; none if the map
// is injective at relative tolerance tol.
inline std::optional<CMatrix> hermitian_kernel(const Window& w, const Pattern& p, double tol = default_tol)
{
    const GaborSystem sys = gabor_matrix(w);
    const CMatrix Gg = gamma_columns(sys, p);
    const detail::HermitianChart chart(p);
    const std::size_t n = p.gamma().size();
    const auto L2 = static_cast<Eigen::Index>(sys.L) * sys.L;
    const auto P = static_cast<Eigen::Index>(chart.coords.size());
    if (P == 0)
        return std::nullopt;

    RMatrix R(2 * L2, P);
    for (Eigen::Index i = 0; i < P; ++i)
    {
        RVector e = RVector::Zero(P);
        e(i) = 1.0;
        const CVector y = vec_rows(Gg * chart.to_matrix(e, n) * Gg.adjoint());
        R.col(i).head(L2) = y.real();
        R.col(i).tail(L2) = y.imag();
    }

    Eigen::BDCSVD<RMatrix> svd(R, Eigen::ComputeFullV);
    const RVector& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    const bool wide = P > R.rows();
    if (!wide && s(s.size() - 1) > tol * smax)
        return std::nullopt;
    CMatrix N = chart.to_matrix(svd.matrixV().col(P - 1), n);
    const double nf = N.norm();
    if (nf == 0.0)
        return std::nullopt;
    N /= nf;
    return N;
}

// Constructive kernel element for a defect witness. With b1, b2 from the
// nullspace of [G|Gamma1  G|Gamma2] (so G1 b1 = -G2 b2):
//   two squares: N = blockdiag(b1 b1^*, -b2 b2^*)
//   butterfly:   N = i (b2 b1^* - b1 b2^*) on the cross blocks
// Gamma-indexed, normalized to ||N||_F = 1.
inline CMatrix witness_kernel(const Window& w, const Pattern& p, const DefectWitness& witness)
{
    if (!witness.valid_for(p))
        throw InputError("witness_kernel: witness does not match pattern");
    const GaborSystem sys = gabor_matrix(w);
    const auto n1 = static_cast<Eigen::Index>(witness.gamma1.size());
    const auto n2 = static_cast<Eigen::Index>(witness.gamma2.size());
    CMatrix stacked(sys.L, n1 + n2);
    for (Eigen::Index i = 0; i < n1; ++i)
        stacked.col(i) = sys.atom(witness.gamma1[i].k, witness.gamma1[i].l);
    for (Eigen::Index i = 0; i < n2; ++i)
        stacked.col(n1 + i) = sys.atom(witness.gamma2[i].k, witness.gamma2[i].l);

    // n1 + n2 > L columns, so the nullspace is nontrivial. Pick a nullspace
    // combination with both halves nonzero when one exists.
    Eigen::BDCSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
    const Eigen::Index rank = std::min<Eigen::Index>(svd.rank(), stacked.rows());
    const CMatrix null = svd.matrixV().rightCols(n1 + n2 - rank);
    CVector b = null.col(0);
    for (Eigen::Index c = 1; c < null.cols() && (b.head(n1).norm() < 1e-8 || b.tail(n2).norm() < 1e-8); ++c)
        b += cx(1.0 / (c + 1.0), 0.5 / (c + 1.0)) * null.col(c);
    const CVector b1 = b.head(n1), b2 = b.tail(n2);

    const std::size_t n = p.gamma().size();
    CMatrix N = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<Eigen::Index> i1(n1), i2(n2);
    for (Eigen::Index i = 0; i < n1; ++i)
        i1[i] = static_cast<Eigen::Index>(*p.gamma_index(witness.gamma1[i]));
    for (Eigen::Index i = 0; i < n2; ++i)
        i2[i] = static_cast<Eigen::Index>(*p.gamma_index(witness.gamma2[i]));

    if (witness.kind == DefectKind::two_squares)
    {
        for (Eigen::Index a = 0; a < n1; ++a)
            for (Eigen::Index c = 0; c < n1; ++c)
                N(i1[a], i1[c]) = b1(a) * std::conj(b1(c));
        for (Eigen::Index a = 0; a < n2; ++a)
            for (Eigen::Index c = 0; c < n2; ++c)
                N(i2[a], i2[c]) = -b2(a) * std::conj(b2(c));
    }
    else
    {
        const cx I(0.0, 1.0);
        for (Eigen::Index a = 0; a < n2; ++a)
            for (Eigen::Index c = 0; c < n1; ++c)
            {
                N(i2[a], i1[c]) = I * b2(a) * std::conj(b1(c));
                N(i1[c], i2[a]) = -I * b1(c) * std::conj(b2(a));
            }
    }
    const double nf = N.norm();
    if (nf == 0.0)
        throw Error("witness_kernel: degenerate nullspace, both halves cannot be made nonzero");
    return N / nf;
}

// G|Gamma X G|Gamma^*.
inline CMatrix sandwich(const Window& w, const Pattern& p, const CMatrix& X)
{
    const CMatrix Gg = gamma_columns(gabor_matrix(w), p);
    return Gg * X * Gg.adjoint();
}

struct WindowSearchResult
{
    Window window;
    IdentifiabilityReport report;
    // Best candidate still has sigma_min <= tol * sigma_max.
    bool likely_defective = false;
    std::size_t candidates = 0;
};

// Best of the Alltop window (prime L >= 5) and `trials` random Gaussian
// windows (all with ||c||^2 = L), ranked by sigma_min of the restricted
// tensor. Unimodular windows alone are not enough: their ambiguity function
// vanishes at (0, l != 0), so e.g. the full WSSUS diagonal is never invertible.
inline WindowSearchResult search_window(const Pattern& p, int trials, std::uint64_t seed, unsigned threads = 1,
                                        double tol = default_tol)
{
    const int L = p.L();
    if (p.size() > static_cast<std::size_t>(L) * L)
        throw InputError("search_window: |Lambda| exceeds L^2, no window can be invertible");
    std::vector<Window> candidates;
    if (L >= 5 && is_prime(L))
        candidates.push_back(alltop_window(L));
    for (int t = 0; t < trials; ++t)
    {
        Rng rng = substream(seed, static_cast<std::uint64_t>(t));
        candidates.push_back(random_gaussian_window(L, rng));
    }
    if (candidates.empty())
        candidates.push_back(alltop_window(L));

    std::vector<IdentifiabilityReport> reports(candidates.size());
    parallel_for(candidates.size(), threads,
                 [&](std::size_t i) { reports[i] = check_identifiable(candidates[i], p, tol); });

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (reports[i].sigma_min > reports[best].sigma_min)
            best = i;
    const auto& rep = reports[best];
    return {candidates[best], rep, !(rep.sigma_min > tol * rep.sigma_max), candidates.size()};
}

// Random positive definite matrix supported on Lambda (Gamma-indexed):
// a random hermitian part on the off-diagonal members plus a diagonal shift.
inline CMatrix random_pd_on_pattern(const Pattern& p, Rng& rng)
{
    const auto n = static_cast<Eigen::Index>(p.gamma().size());
    CMatrix H = CMatrix::Zero(n, n);
    for (const auto& q : p.lambda())
    {
        const auto a = static_cast<Eigen::Index>(*p.gamma_index(q.first));
        const auto b = static_cast<Eigen::Index>(*p.gamma_index(q.second));
        if (a < b)
        {
            H(a, b) = complex_normal(rng);
            H(b, a) = std::conj(H(a, b));
        }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(H, Eigen::EigenvaluesOnly);
    // Diagonal >= rho + 1/2 beats the off-diagonal spectral radius rho.
    const double shift = 2.0 * (n > 0 ? eig.eigenvalues().cwiseAbs().maxCoeff() : 0.0) + 1.0;
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (Eigen::Index i = 0; i < n; ++i)
        H(i, i) = shift * u(rng);
    return H;
}

// Agreement of the three equivalent conditions:
//  (i)   every psd Y in the image has exactly one psd Lambda-supported preimage
//        (probed on `trials` random positive definite X);
//  (ii)  no nonzero hermitian Lambda-supported N has G N G^* = 0;
//  (iii) the restricted tensor has a left inverse.
struct EquivalenceReport
{
    bool unique_psd_solution = false; // (i)
    bool no_hermitian_kernel = false; // (ii)
    bool left_invertible = false;     // (iii)
    int trials = 0;
    double max_residual = 0.0;

    bool i_ii() const { return unique_psd_solution == no_hermitian_kernel; }
    bool ii_iii() const { return no_hermitian_kernel == left_invertible; }
    bool i_iii() const { return unique_psd_solution == left_invertible; }
    bool agree() const { return i_ii() && ii_iii() && i_iii(); }
};

inline EquivalenceReport equivalence_check(const Window& w, const Pattern& p, int trials, std::uint64_t seed,
                                 double tol = default_tol)
{
    EquivalenceReport rep;
    rep.trials = trials;
    const GaborSystem sys = gabor_matrix(w);
    const RestrictedTensor t = restricted_tensor(sys, p);
    const CMatrix Gg = gamma_columns(sys, p);

    rep.left_invertible = check_identifiable(t, tol).invertible;
    rep.no_hermitian_kernel = !hermitian_kernel(w, p, tol).has_value();

    // (i): rank-revealing LU, independent of the SVD used by (ii) and (iii).
    Eigen::FullPivLU<CMatrix> lu(t.matrix);
    lu.setThreshold(tol);
    const CMatrix kernel = lu.dimensionOfKernel() > 0 ? CMatrix(lu.kernel()) : CMatrix();

    bool unique = true;
    for (int trial = 0; trial < trials; ++trial)
    {
        Rng rng = substream(seed, static_cast<std::uint64_t>(trial));
        const CMatrix X = random_pd_on_pattern(p, rng);
        const CMatrix Y = Gg * X * Gg.adjoint();
        const double ynorm = Y.norm();

        if (kernel.cols() == 0)
        {
            const CMatrix Xs = unvec_lambda(p, lu.solve(vec_rows(Y)));
            const double res = (Gg * Xs * Gg.adjoint() - Y).norm() / ynorm;
            rep.max_residual = std::max(rep.max_residual, res);
            if (res > 1e-8 || (Xs - X).norm() > 1e-6 * X.norm())
                unique = false;
            continue;
        }

        // A complex kernel vector n yields hermitian kernel elements
        // mat(n) + mat(n)^* and i(mat(n) - mat(n)^*); at least one is nonzero.
        const CMatrix K = unvec_lambda(p, kernel.col(0));
        CMatrix N = K + K.adjoint();
        const CMatrix N2 = cx(0.0, 1.0) * (K - K.adjoint());
        if (N2.norm() > N.norm())
            N = N2;
        Eigen::SelfAdjointEigenSolver<CMatrix> ex(X, Eigen::EigenvaluesOnly), en(N, Eigen::EigenvaluesOnly);
        const double step = 0.5 * ex.eigenvalues().minCoeff() / en.eigenvalues().cwiseAbs().maxCoeff();
        const CMatrix Xalt = X + step * N;
        Eigen::SelfAdjointEigenSolver<CMatrix> ealt(Xalt, Eigen::EigenvaluesOnly);
        const double res = (Gg * Xalt * Gg.adjoint() - Y).norm() / ynorm;
        rep.max_residual = std::max(rep.max_residual, res);
        if (ealt.eigenvalues().minCoeff() >= 0.0 && res <= 1e-8 && (Xalt - X).norm() > 0.0)
            unique = false;
    }
    rep.unique_psd_solution = unique;
    return rep;
}

} // namespace stochid

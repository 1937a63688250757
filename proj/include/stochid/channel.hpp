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

// Discrete stochastic channel sounding. A spreading vector eta on Gamma with
// covariance A (Gamma x Gamma, supported on Lambda) produces the received
// vector Z = G|Gamma eta with covariance D = G|Gamma A G|Gamma^*.

#include "identifiability.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <utility>

namespace stochid
{

class CovarianceModel
{
public:
    CovarianceModel(Pattern pattern, CMatrix A) : pattern_(std::move(pattern)), A_(std::move(A))
    {
        const auto n = static_cast<Eigen::Index>(pattern_.gamma().size());
        if (A_.rows() != n || A_.cols() != n)
            throw InputError("covariance model: A must be |Gamma| x |Gamma|");
        const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
        if ((A_ - A_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw InputError("covariance model: A is not hermitian");
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (A_(i, j) != cx(0.0) && !pattern_.contains(pattern_.gamma()[i], pattern_.gamma()[j]))
                    throw InputError("covariance model: A has support outside Lambda");
        if (n > 0)
        {
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(A_, Eigen::EigenvaluesOnly);
            const double trace = A_.trace().real();
            if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1e-300))
                throw InputError("covariance model: A is not positive semidefinite");
        }
    }

    const Pattern& pattern() const { return pattern_; }
    const CMatrix& A() const { return A_; }

    bool operator==(const CovarianceModel& o) const { return pattern_ == o.pattern_ && A_ == o.A_; }

private:
    Pattern pattern_;
    CMatrix A_;
};

// Sum over cells of eta[k, l] M^l T^k c; eta is L x L indexed by (k, l).
inline CVector apply_channel(const CMatrix& eta, const Window& w)
{
    const int L = w.L();
    if (eta.rows() != L || eta.cols() != L)
        throw InputError("apply_channel: eta must be L x L");
    CVector out = CVector::Zero(L);
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            if (eta(k, l) != cx(0.0))
                out += eta(k, l) * modulate(translate(w.c(), k), l);
    return out;
}

inline CMatrix output_covariance(const CovarianceModel& m, const Window& w)
{
    if (m.pattern().L() != w.L())
        throw InputError("output_covariance: window and pattern disagree on L");
    return sandwich(w, m.pattern(), m.A());
}

// Same quantity through the restricted tensor: vec(D) = T vec_Lambda(A).
inline CMatrix output_covariance_tensor(const CovarianceModel& m, const Window& w)
{
    const RestrictedTensor t = restricted_tensor(w, m.pattern());
    return unvec_rows(t.matrix * vec_lambda(m.pattern(), m.A()), w.L());
}

struct PsdRoot
{
    CMatrix B;
    // Negative eigenvalue mass removed, relative to trace.
    double clipped = 0.0;
};

// Hermitian square root with negative eigenvalues clipped to zero.
inline PsdRoot psd_sqrt(const CMatrix& A)
{
    if (A.size() == 0)
        return {A, 0.0};
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (A + A.adjoint()));
    RVector ev = eig.eigenvalues();
    double clipped = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) < 0.0)
        {
            clipped += -ev(i);
            ev(i) = 0.0;
        }
    const double trace = std::abs(A.trace().real());
    const CMatrix& V = eig.eigenvectors();
    return {V * ev.cwiseSqrt().asDiagonal() * V.adjoint(), trace > 0.0 ? clipped / trace : clipped};
}

struct EmpiricalOutput
{
    CMatrix D;
    double clipped = 0.0;
    // Clipped mass exceeded 1e-8 of the trace.
    bool clip_warning = false;
};

// Sample covariance of Z = G|Gamma B xi over nsamples draws, B = sqrt(A),
// xi iid standard circular complex normal.
inline EmpiricalOutput sample_output(const CovarianceModel& m, const Window& w, int nsamples, std::uint64_t seed)
{
    if (nsamples < 1)
        throw InputError("sample_output: nsamples must be >= 1");
    if (m.pattern().L() != w.L())
        throw InputError("sample_output: window and pattern disagree on L");
    const PsdRoot root = psd_sqrt(m.A());
    const CMatrix mix = gamma_columns(gabor_matrix(w), m.pattern()) * root.B;
    Rng rng = substream(seed, 0);
    const CMatrix xi = random_complex_matrix(mix.cols(), nsamples, rng);
    const CMatrix Z = mix * xi;
    EmpiricalOutput out;
    out.D = (Z * Z.adjoint()) / static_cast<double>(nsamples);
    out.clipped = root.clipped;
    out.clip_warning = root.clipped > 1e-8;
    return out;
}

struct Recovery
{
    Pattern pattern;
    CMatrix A; // Gamma-indexed, hermitian
    double residual = 0.0;
    // residual > 1e-6 ||D||_F: D is not produced by any Lambda-supported A.
    bool model_mismatch = false;
};

// Least-squares inverse of the restricted tensor, symmetrized to hermitian.
// Throws NotIdentifiable when the tensor has no left inverse, and
// ModelMismatch on an inconsistent D when `strict`.
inline Recovery recover_covariance(const CMatrix& D, const Window& w, const Pattern& p, bool strict = false,
                                   double tol = default_tol)
{
    if (D.rows() != w.L() || D.cols() != w.L())
        throw InputError("recover_covariance: D must be L x L");
    const RestrictedTensor t = restricted_tensor(w, p);
    const IdentifiabilityReport rep = check_identifiable(t, tol);
    if (!rep.invertible)
        throw NotIdentifiable("recover_covariance: pattern not identifiable by this window (sigma_min = " +
                              std::to_string(rep.sigma_min) + ", reason " + rep.reason + ")");
    const CVector d = vec_rows(D);
    const CVector x = t.matrix.colPivHouseholderQr().solve(d);
    CMatrix A = unvec_lambda(p, x);
    A = 0.5 * (A + A.adjoint());
    const double residual = (t.matrix * vec_lambda(p, A) - d).norm();
    Recovery r{p, std::move(A), residual, residual > 1e-6 * D.norm()};
    if (strict && r.model_mismatch)
        throw ModelMismatch("recover_covariance: residual " + std::to_string(residual) +
                            " exceeds 1e-6 ||D||; D is not generated by a Lambda-supported covariance");
    return r;
}

struct Counterexample
{
    CovarianceModel A1;
    CovarianceModel A2;
    CMatrix D1;
    CMatrix D2;
    double K = 1.0;
    double gap = 0.0;    // ||A1 - A2||_F
    double d_diff = 0.0; // ||D1 - D2||_F / ||D1||_F
};

// Two psd covariances on Lambda with identical output covariance:
//   K = max(1, 2 ||N||_2), A1 = (K + 1) I_Gamma, A2 = A1 + N / K.
inline Counterexample build_counterexample(const Window& w, const Pattern& p, const CMatrix& N)
{
    const auto n = static_cast<Eigen::Index>(p.gamma().size());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(N, Eigen::EigenvaluesOnly);
    const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double K = std::max(1.0, 2.0 * spectral);
    CMatrix a1 = (K + 1.0) * CMatrix::Identity(n, n);
    CMatrix a2 = a1 + N / K;
    a2 = 0.5 * (a2 + a2.adjoint());
    CovarianceModel m1(p, std::move(a1));
    CovarianceModel m2(p, std::move(a2));
    CMatrix d1 = output_covariance(m1, w);
    CMatrix d2 = output_covariance(m2, w);
    const double gap = (m1.A() - m2.A()).norm();
    const double diff = (d1 - d2).norm() / d1.norm();
    return {std::move(m1), std::move(m2), std::move(d1), std::move(d2), K, gap, diff};
}

inline Counterexample build_counterexample(const Window& w, const Pattern& p, double tol = default_tol)
{
    auto N = hermitian_kernel(w, p, tol);
    if (!N)
        throw NoKernel("build_counterexample: pattern is identifiable by this window, no hermitian kernel");
    return build_counterexample(w, p, *N);
}

} // namespace stochid

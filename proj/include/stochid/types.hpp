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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stochid
{

using cx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Error hierarchy. The CLI maps each class to a fixed exit code.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-range input (exit code 2).
class InputError : public Error
{
public:
    using Error::Error;
};

// Exhaustive search exceeded its node budget (exit code 3).
class BudgetExceeded : public Error
{
public:
    using Error::Error;
};

// Recovery requested on a (window, pattern) pair that is not identifiable (exit code 4).
class NotIdentifiable : public Error
{
public:
    using Error::Error;
};

// Counterexample requested on an identifiable pair (exit code 4).
class NoKernel : public Error
{
public:
    using Error::Error;
};

// Observed covariance is not in the range of the restricted tensor.
class ModelMismatch : public Error
{
public:
    using Error::Error;
};

// Instability probe called on a minor that has no kernel.
class MinorNotSingular : public Error
{
public:
    using Error::Error;
};

// Non-negative residue of n modulo m (m > 0).
inline constexpr std::int64_t mod(std::int64_t n, std::int64_t m)
{
    const std::int64_t r = n % m;
    return r < 0 ? r + m : r;
}

// exp(2*pi*i*n/L), with the angle reduced exactly before conversion to double.
inline cx unit_root(std::int64_t n, std::int64_t L)
{
    const double angle = two_pi * static_cast<double>(mod(n, L)) / static_cast<double>(L);
    return std::polar(1.0, angle);
}

inline bool is_prime(std::int64_t n)
{
    if (n < 2)
        return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

inline std::int64_t next_prime(std::int64_t n)
{
    while (!is_prime(n))
        ++n;
    return n;
}

} // namespace stochid

// Copyright 2026 The distcheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace distcheck {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// The double's exact binary value.
inline Rational exact_rational(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("exact_rational: non-finite value");
    return Rational(x);
}

/// Simplest continued-fraction convergent within `tol` of x. Falls back to
/// the exact binary value when no convergent with a modest denominator fits.
inline Rational snap_rational(double x, double tol = 1e-12) {
    if (!std::isfinite(x)) throw std::invalid_argument("snap_rational: non-finite value");
    const bool negative = x < 0;
    long double r = std::fabs(static_cast<long double>(x));
    const long double target = r;
    // Convergents h/k with (h_{-1}, k_{-1}) = (1, 0), (h_{-2}, k_{-2}) = (0, 1).
    BigInt h_prev2 = 0, h_prev = 1, k_prev2 = 1, k_prev = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const long double a_ld = std::floor(r);
        if (a_ld > 1e18L) break;
        const auto a = static_cast<std::uint64_t>(a_ld);
        const BigInt h = BigInt(a) * h_prev + h_prev2;
        const BigInt k = BigInt(a) * k_prev + k_prev2;
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
        if (k > BigInt(1000000000000000ULL)) break;
        const long double approx = static_cast<long double>(h) / static_cast<long double>(k);
        if (std::fabs(approx - target) <= tol) {
            Rational out(h, k);
            return negative ? Rational(-out) : out;
        }
        const long double frac = r - a_ld;
        if (frac <= 0) break;
        r = 1.0L / frac;
    }
    return exact_rational(x);
}

inline std::vector<Rational> snap_pmf(std::span<const double> probs, double tol = 1e-12) {
    std::vector<Rational> out;
    out.reserve(probs.size());
    Rational total = 0;
    for (double p : probs) {
        out.push_back(snap_rational(p, tol));
        total += out.back();
    }
    if (total <= 0) throw std::invalid_argument("snap_pmf: total mass is zero");
    if (total != 1)
        for (auto& r : out) r /= total;
    return out;
}

/// floor of a nonnegative rational.
inline BigInt floor_rational(const Rational& x) {
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x);
    BigInt q = num / den;
    if (num < 0 && q * den != num) --q;
    return q;
}

}  // namespace distcheck

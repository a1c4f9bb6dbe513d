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

// Reference implementations used only by tests. They are written directly
// from the defining formulas, deliberately without sharing code with the
// library: sequences instead of compositions, long double instead of
// compensated sums, dense loops instead of sparse tables.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Q = boost::multiprecision::cpp_rational;

inline long double tv(const std::vector<double>& p, const std::vector<double>& q) {
    long double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(static_cast<long double>(p[i]) - q[i]);
    return s / 2;
}

inline long double hellinger_sq(const std::vector<double>& p, const std::vector<double>& q) {
    long double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double d = std::sqrt(static_cast<long double>(p[i])) - std::sqrt(static_cast<long double>(q[i]));
        s += d * d;
    }
    return s;
}

inline long double kl(const std::vector<double>& p, const std::vector<double>& q) {
    long double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) s += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
    return s;
}

inline long double chi_sq(const std::vector<double>& p, const std::vector<double>& q) {
    long double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double d = static_cast<long double>(p[i]) - q[i];
        s += d * d / q[i];
    }
    return s;
}

inline long double l2(const std::vector<double>& p, const std::vector<double>& q) {
    long double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double d = static_cast<long double>(p[i]) - q[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Calls f(seq) for every sequence in [k]^n.
inline void for_each_sequence(std::size_t k, std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> seq(n, 0);
    while (true) {
        f(seq);
        std::size_t i = 0;
        while (i < n && ++seq[i] == k) seq[i++] = 0;
        if (i == n) return;
    }
}

struct ExactMoments {
    Q mean;
    Q variance;
};

/// E and Var of mu = sum_j p_j ((k/n) X_j - 1) over all k^n draw sequences.
inline ExactMoments phase1_mu_moments(const std::vector<Q>& p, std::size_t n) {
    const std::size_t k = p.size();
    Q e1 = 0, e2 = 0;
    for_each_sequence(k, n, [&](const std::vector<std::size_t>& seq) {
        Q prob = 1;
        std::vector<long long> X(k, 0);
        for (auto s : seq) {
            prob *= p[s];
            ++X[s];
        }
        Q mu = 0;
        for (std::size_t j = 0; j < k; ++j) mu += p[j] * (Q(static_cast<long long>(k) * X[j], static_cast<long long>(n)) - 1);
        e1 += prob * mu;
        e2 += prob * mu * mu;
    });
    return {e1, e2 - e1 * e1};
}

/// E and Var of the number of colliding pairs among N draws, by sequences.
inline ExactMoments collision_moments(const std::vector<Q>& p, std::size_t N) {
    const std::size_t k = p.size();
    Q e1 = 0, e2 = 0;
    for_each_sequence(k, N, [&](const std::vector<std::size_t>& seq) {
        Q prob = 1;
        for (auto s : seq) prob *= p[s];
        long long z = 0;
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = a + 1; b < N; ++b) z += seq[a] == seq[b];
        e1 += prob * z;
        e2 += prob * z * z;
    });
    return {e1, e2 - e1 * e1};
}

inline Q chi_sq_uniform(const std::vector<Q>& p) {
    const long long k = static_cast<long long>(p.size());
    Q s = 0;
    for (const auto& x : p) s += (x - Q(1, k)) * (x - Q(1, k)) * k;
    return s;
}

/// Binomial standard error of a rate p over n trials.
inline double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace oracle

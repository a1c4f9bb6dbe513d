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

// Exhaustive small-case validators for the moment identities, the binary
// hashing bounds, the collision moments and the reduction. Everything that
// can be checked exactly is checked in rational arithmetic.

#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "distcheck/access.hpp"
#include "distcheck/dist.hpp"
#include "distcheck/qme.hpp"
#include "distcheck/rational.hpp"
#include "distcheck/reduce.hpp"
#include "distcheck/rng.hpp"
#include "distcheck/testers.hpp"

namespace distcheck {

namespace enumerate {

/// All vectors of `parts` nonnegative integers summing to `total`, in
/// lexicographic order.
inline std::vector<std::vector<std::uint64_t>> compositions(std::uint64_t total, std::size_t parts) {
    std::vector<std::vector<std::uint64_t>> out;
    std::vector<std::uint64_t> cur(parts, 0);
    std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t left) {
        if (i + 1 == parts) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (std::uint64_t v = 0; v <= left; ++v) {
            cur[i] = v;
            rec(i + 1, left - v);
        }
    };
    if (parts > 0) rec(0, total);
    return out;
}

/// Pmfs on k <= max_k symbols whose entries are multiples of 1/d for some
/// d <= max_den, deduplicated.
inline std::vector<std::vector<Rational>> rational_pmf_family(std::size_t max_k, std::uint64_t max_den) {
    std::set<std::vector<Rational>> seen;
    for (std::size_t k = 1; k <= max_k; ++k)
        for (std::uint64_t d = 1; d <= max_den; ++d)
            for (const auto& c : compositions(d, k)) {
                std::vector<Rational> p;
                for (auto a : c) p.emplace_back(static_cast<long long>(a), static_cast<long long>(d));
                seen.insert(std::move(p));
            }
    return {seen.begin(), seen.end()};
}

/// Multinomial probability of the count vector X under p.
inline Rational multinomial_weight(std::span<const Rational> p, std::span<const std::uint64_t> X) {
    std::uint64_t n = 0;
    for (auto x : X) n += x;
    BigInt coef = 1;
    std::uint64_t placed = 0;
    for (auto x : X) {
        for (std::uint64_t i = 1; i <= x; ++i) {
            ++placed;
            coef = coef * placed / i;
        }
    }
    Rational w(coef);
    for (std::size_t j = 0; j < X.size(); ++j)
        for (std::uint64_t i = 0; i < X[j]; ++i) w *= p[j];
    return w;
}

inline Rational chi_sq_uniform_exact(std::span<const Rational> p) {
    const Rational k(static_cast<long long>(p.size()));
    Rational s = 0;
    for (const auto& v : p) {
        const Rational d = v - Rational(1) / k;
        s += d * d;
    }
    return k * s;
}

}  // namespace enumerate

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
    double seconds = 0.0;
};

struct LemmaReport {
    std::vector<CheckResult> checks;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

struct LemmaOptions {
    /// Builds Y from Phase-1 counts; replaceable for mutation checks.
    std::function<std::vector<Rational>(std::span<const std::uint64_t>, std::uint64_t)> phase1 =
        [](std::span<const std::uint64_t> X, std::uint64_t n) { return phase1_table<Rational>(X, n); };
    std::size_t moments_max_k = 4;
    std::uint64_t moments_max_den = 8;
    std::uint64_t moments_max_n = 5;
    std::size_t hashing_k = 10;
    std::size_t hashing_pairs = 100;
    std::size_t reduction_pairs = 100;
    std::size_t reduction_max_k = 50;
    std::uint64_t seed = 20240601;
};

namespace detail {

template <typename F>
CheckResult timed_check(std::string name, F&& body) {
    CheckResult r;
    r.name = std::move(name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline void fail(CheckResult& r, const std::string& why) {
    if (r.passed) r.detail = why;
    r.passed = false;
}

}  // namespace detail

/// Unbiasedness, variance identity and sigma^2 identity by exhaustive
/// enumeration of Phase-1 count vectors; plus the uniform all-distinct case.
inline std::vector<CheckResult> validate_moments(const LemmaOptions& opt = {}) {
    std::vector<CheckResult> out;
    out.push_back(detail::timed_check("moments.exhaustive", [&](CheckResult& r) {
        const auto family = enumerate::rational_pmf_family(opt.moments_max_k, opt.moments_max_den);
        std::size_t cases = 0;
        for (const auto& p : family) {
            const std::size_t k = p.size();
            const Rational kk(static_cast<long long>(k));
            const Rational chi2 = enumerate::chi_sq_uniform_exact(p);
            std::vector<Rational> eps;
            for (const auto& v : p) eps.push_back(kk * v - 1);
            const auto eps_m = weighted_moments<Rational>(p, eps);
            for (std::uint64_t n = 1; n <= opt.moments_max_n; ++n) {
                Rational e_mu = 0, e_mu2 = 0;
                for (const auto& X : enumerate::compositions(n, k)) {
                    const Rational w = enumerate::multinomial_weight(p, X);
                    if (w == 0) continue;
                    const auto y = opt.phase1(X, n);
                    const auto m = weighted_moments<Rational>(p, y);
                    e_mu += w * m.mean;
                    e_mu2 += w * m.mean * m.mean;
                    // sigma^2 = (k/n)^2 sum p_j X_j^2 - (mu + 1)^2
                    Rational s = 0;
                    for (std::size_t j = 0; j < k; ++j)
                        s += p[j] * Rational(static_cast<long long>(X[j] * X[j]));
                    const Rational scale = kk / Rational(static_cast<long long>(n));
                    const Rational rhs = scale * scale * s - (m.mean + 1) * (m.mean + 1);
                    if (m.variance != rhs) detail::fail(r, "sigma^2 identity fails");
                }
                if (e_mu != chi2) {
                    std::ostringstream os;
                    os << "E[mu] = " << e_mu << " but chi^2 = " << chi2 << " (k=" << k << ", n=" << n << ")";
                    detail::fail(r, os.str());
                }
                const Rational var_mu = e_mu2 - e_mu * e_mu;
                if (var_mu != eps_m.variance / Rational(static_cast<long long>(n)))
                    detail::fail(r, "Var[mu] != Var[eps]/n");
                ++cases;
            }
        }
        if (r.passed) r.detail = std::to_string(cases) + " (pmf, n) cases exact";
    }));

    out.push_back(detail::timed_check("moments.uniform_all_distinct", [&](CheckResult& r) {
        for (std::size_t k : {10u, 100u})
            for (std::uint64_t n : {2u, 5u}) {
                std::vector<Rational> p(k, Rational(1, static_cast<long long>(k)));
                std::vector<std::uint64_t> X(k, 0);
                for (std::uint64_t t = 0; t < n; ++t) X[t] = 1;
                const auto m = weighted_moments<Rational>(p, opt.phase1(X, n));
                const Rational expect_var = Rational(static_cast<long long>(k), static_cast<long long>(n)) - 1;
                if (m.mean != 0 || m.variance != expect_var)
                    detail::fail(r, "uniform all-distinct: mu != 0 or sigma^2 != k/n - 1");
            }
        if (r.passed) r.detail = "mu = 0, sigma^2 = k/n - 1 exactly";
    }));
    return out;
}

/// Binary hashing bounds over all 2^k subsets, and the Rademacher second
/// moment over all sign patterns, for random pmf pairs.
inline std::vector<CheckResult> validate_hashing(const LemmaOptions& opt = {}) {
    std::vector<CheckResult> out;
    Stream rng = Stream::derive(opt.seed, 0, "hashing");
    const std::size_t k = opt.hashing_k;
    std::vector<std::vector<Rational>> deltas;
    for (std::size_t t = 0; t < opt.hashing_pairs; ++t) {
        const Pmf p = random_pmf(k, rng), q = random_pmf(k, rng);
        std::vector<Rational> d;
        for (std::size_t i = 0; i < k; ++i) d.push_back(exact_rational(p[i]) - exact_rational(q[i]));
        deltas.push_back(std::move(d));
    }
    const std::uint64_t subsets = 1ULL << k;

    out.push_back(detail::timed_check("hashing.bounds", [&](CheckResult& r) {
        const std::vector<Rational> alphas{Rational(1, 10), Rational(1, 4), Rational(7, 20)};
        const std::vector<Rational> betas{Rational(1), Rational(2), Rational(4)};
        for (const auto& d : deltas) {
            Rational norm2 = 0;
            for (const auto& v : d) norm2 += v * v;
            std::vector<std::uint64_t> hit_a(alphas.size(), 0), hit_b(betas.size(), 0);
            Rational diff = 0;  // p(S) - q(S), walked in Gray-code order
            std::uint64_t gray_prev = 0;
            for (std::uint64_t i = 0; i < subsets; ++i) {
                const std::uint64_t gray = i ^ (i >> 1);
                if (i > 0) {
                    const std::uint64_t changed = gray ^ gray_prev;
                    const auto bit = static_cast<std::size_t>(std::countr_zero(changed));
                    if (gray & changed) diff += d[bit];
                    else diff -= d[bit];
                }
                gray_prev = gray;
                const Rational sq = diff * diff;
                for (std::size_t a = 0; a < alphas.size(); ++a)
                    if (sq >= alphas[a] * alphas[a] * norm2) ++hit_a[a];
                for (std::size_t b = 0; b < betas.size(); ++b)
                    if (sq >= betas[b] * betas[b] * norm2) ++hit_b[b];
            }
            const Rational total(static_cast<long long>(subsets));
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                const Rational one_minus = 1 - 4 * alphas[a] * alphas[a];
                const Rational bound = one_minus * one_minus / 12;
                if (Rational(static_cast<long long>(hit_a[a])) / total < bound)
                    detail::fail(r, "forward hashing bound violated");
            }
            for (std::size_t b = 0; b < betas.size(); ++b) {
                const Rational bound = Rational(1) / (4 * betas[b] * betas[b]);
                if (Rational(static_cast<long long>(hit_b[b])) / total > bound)
                    detail::fail(r, "converse hashing bound violated");
            }
        }
        if (r.passed) r.detail = std::to_string(deltas.size()) + " pairs x " + std::to_string(subsets) + " subsets, no violations";
    }));

    out.push_back(detail::timed_check("hashing.rademacher_second_moment", [&](CheckResult& r) {
        for (const auto& d : deltas) {
            Rational norm2 = 0, sum = 0, z = 0;
            for (const auto& v : d) {
                norm2 += v * v;
                z -= v;  // all signs -1
            }
            std::uint64_t gray_prev = 0;
            for (std::uint64_t i = 0; i < subsets; ++i) {
                const std::uint64_t gray = i ^ (i >> 1);
                if (i > 0) {
                    const std::uint64_t changed = gray ^ gray_prev;
                    const auto bit = static_cast<std::size_t>(std::countr_zero(changed));
                    if (gray & changed) z += 2 * d[bit];
                    else z -= 2 * d[bit];
                }
                gray_prev = gray;
                sum += z * z;
            }
            if (sum / Rational(static_cast<long long>(subsets)) != norm2)
                detail::fail(r, "E[Z^2] != ||delta||^2");
        }
        if (r.passed) r.detail = "E[(sum delta_i xi_i)^2] = ||delta||^2 exactly";
    }));
    return out;
}

/// Collision count moments by exhaustive enumeration (k <= 4, N <= 5).
inline std::vector<CheckResult> validate_collisions(const LemmaOptions& opt = {}) {
    std::vector<CheckResult> out;
    out.push_back(detail::timed_check("collisions.exhaustive", [&](CheckResult& r) {
        const auto family = enumerate::rational_pmf_family(opt.moments_max_k, opt.moments_max_den);
        std::size_t cases = 0;
        for (const auto& p : family) {
            for (std::uint64_t N = 2; N <= 5; ++N) {
                Rational ez = 0, ez2 = 0;
                for (const auto& X : enumerate::compositions(N, p.size())) {
                    const Rational w = enumerate::multinomial_weight(p, X);
                    if (w == 0) continue;
                    std::uint64_t z = 0;
                    for (auto x : X) z += x * (x - 1) / 2;
                    const Rational zr(static_cast<long long>(z));
                    ez += w * zr;
                    ez2 += w * zr * zr;
                }
                const auto stats = collision_stats<Rational>(p, N);
                if (stats.expected_Z != ez) detail::fail(r, "E[Z] mismatch");
                if (ez2 - ez * ez > stats.var_upper) detail::fail(r, "Var[Z] exceeds the bound");
                ++cases;
            }
        }
        if (r.passed) r.detail = std::to_string(cases) + " (pmf, N) cases exact";
    }));
    return out;
}

/// Reduction: uniform image of the reference, exact grainedness, TV bounds,
/// one inner use per output draw, determinism, and agreement with the
/// explicit channel-matrix product.
inline std::vector<CheckResult> validate_reduction(const LemmaOptions& opt = {}) {
    std::vector<CheckResult> out;
    out.push_back(detail::timed_check("reduction.random_pairs", [&](CheckResult& r) {
        Stream rng = Stream::derive(opt.seed, 0, "reduction");
        double worst_uniform = 0.0;
        for (std::size_t t = 0; t < opt.reduction_pairs; ++t) {
            const std::size_t k = 1 + static_cast<std::size_t>(rng.below(opt.reduction_max_k));
            const Pmf p = random_pmf(k, rng), q = random_pmf(k, rng);
            const Reduction red = make_reduction(q);
            const std::size_t k4 = 4 * k;

            // Reference maps to U_{4k}.
            const Pmf image_q = red.apply(q);
            for (std::size_t j = 0; j < k4; ++j)
                worst_uniform = std::max(worst_uniform, std::abs(image_q[j] - 1.0 / static_cast<double>(k4)));

            // Grainedness: every reference mass is an integer multiple of 1/(4k).
            Rational mass = 0;
            for (std::size_t i = 0; i <= k; ++i) {
                const Rational scaled = red.graining.reference[i] * Rational(static_cast<long long>(k4));
                if (boost::multiprecision::denominator(scaled) != 1) detail::fail(r, "reference is not grained");
                if (red.graining.reference[i] > 0 && red.partition.size(i) == 0) detail::fail(r, "empty cell with mass");
                mass += red.graining.reference[i];
            }
            if (mass != 1) detail::fail(r, "grained reference does not sum to 1");

            // TV(p, q)/4 <= TV(Phi(p), U) <= TV(p, q).
            const double tv_in = distance(p, q, Metric::TV);
            const double tv_out = distance(red.apply(p), Pmf::uniform(k4), Metric::TV);
            if (tv_out < tv_in / 4.0 - 1e-12 || tv_out > tv_in + 1e-12) detail::fail(r, "TV bounds violated");

            // Same reference, same partition.
            if (!(make_reduction(q).partition == red.partition)) detail::fail(r, "partition not deterministic");

            // Explicit matrices: M3 (k x k), M2 (k x k+1), M1 (k+1 x 4k).
            std::vector<double> v(p.probs().begin(), p.probs().end());
            std::vector<double> v3(k, 0.0), v2(k + 1, 0.0), v1(k4, 0.0);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) v3[j] += v[i] * ((i == j ? 0.5 : 0.0) + 0.5 / static_cast<double>(k));
            for (std::size_t i = 0; i < k; ++i) {
                v2[i] += v3[i] * red.graining.keep[i];
                v2[k] += v3[i] * (1.0 - red.graining.keep[i]);
            }
            for (std::size_t i = 0; i <= k; ++i)
                for (std::size_t j = 0; j < k4; ++j)
                    if (red.partition.cell_of(j) == i) v1[j] += v2[i] / static_cast<double>(red.partition.size(i));
            const Pmf pushed = red.apply(p);
            for (std::size_t j = 0; j < k4; ++j)
                if (std::abs(pushed[j] - v1[j]) > 1e-12) detail::fail(r, "pushforward differs from matrix product");

            // One output draw = one use of the code for p.
            SourceCode code = code_from_pmf(p, rng());
            SourceCode reduced = reduce_instance(q, code, 0.5).code;
            reduced.draw(257, "probe");
            if (code.ledger().code_uses() != 257) detail::fail(r, "reduced draws charged the wrong number of uses");
        }
        if (worst_uniform > 1e-12) detail::fail(r, "Phi_q(q) differs from uniform");
        if (r.passed) {
            std::ostringstream os;
            os << opt.reduction_pairs << " pairs; max |Phi_q(q) - U| = " << worst_uniform;
            r.detail = os.str();
        }
    }));
    return out;
}

/// Runs the named suite ("moments", "hashing", "collisions", "reduction" or
/// "all").
inline LemmaReport validate_lemmas(const std::string& suite, const LemmaOptions& opt = {}) {
    LemmaReport report;
    auto add = [&](std::vector<CheckResult> rs) {
        for (auto& c : rs) report.checks.push_back(std::move(c));
    };
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "moments") { add(validate_moments(opt)); known = true; }
    if (all || suite == "hashing") { add(validate_hashing(opt)); known = true; }
    if (all || suite == "collisions") { add(validate_collisions(opt)); known = true; }
    if (all || suite == "reduction") { add(validate_reduction(opt)); known = true; }
    if (!known) throw std::invalid_argument("unknown lemma suite: " + suite);
    return report;
}

}  // namespace distcheck

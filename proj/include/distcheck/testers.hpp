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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distcheck/access.hpp"
#include "distcheck/dist.hpp"
#include "distcheck/qme.hpp"
#include "distcheck/rng.hpp"

namespace distcheck {

enum class Decision { Accept, Reject };
enum class Reason { LInfCheck, MeanThreshold, CollisionFound, NoCollision, RoundVote };

inline std::string_view to_string(Decision d) { return d == Decision::Accept ? "accept" : "reject"; }

inline std::string_view to_string(Reason r) {
    switch (r) {
        case Reason::LInfCheck: return "linf_check";
        case Reason::MeanThreshold: return "mean_threshold";
        case Reason::CollisionFound: return "collision_found";
        case Reason::NoCollision: return "no_collision";
        case Reason::RoundVote: return "round_vote";
    }
    return "?";
}

/// Occupancy counts of n draws, stored sparsely as (symbol, count) pairs in
/// increasing symbol order.
struct Counts {
    std::uint64_t n = 0;
    std::vector<std::pair<Symbol, std::uint64_t>> X;
    double L = 0.0;

    std::uint64_t max_count() const noexcept {
        std::uint64_t m = 0;
        for (const auto& e : X) m = std::max(m, e.second);
        return m;
    }

    /// Number of colliding pairs, sum_j C(X_j, 2).
    std::uint64_t collisions() const noexcept {
        std::uint64_t z = 0;
        for (const auto& e : X) z += e.second * (e.second - 1) / 2;
        return z;
    }
};

inline Counts count_draws(std::vector<Symbol> draws) {
    Counts c;
    c.n = draws.size();
    std::sort(draws.begin(), draws.end());
    for (std::size_t i = 0; i < draws.size();) {
        std::size_t j = i;
        while (j < draws.size() && draws[j] == draws[i]) ++j;
        c.X.emplace_back(draws[i], j - i);
        i = j;
    }
    return c;
}

struct Verdict {
    Decision decision = Decision::Accept;
    Reason reason = Reason::MeanThreshold;
    std::optional<double> mu_hat;
    std::uint64_t code_uses = 0;
    std::map<std::string, double> diagnostics;
    std::optional<Counts> counts;
};

/// Y_j = (k/n) X_j - 1 as a dense table, in any Scalar. Used by the exact
/// enumeration suites; testers use the sparse form below.
template <typename Scalar>
std::vector<Scalar> phase1_table(std::span<const std::uint64_t> X, std::uint64_t n) {
    const Scalar scale = Scalar(static_cast<long long>(X.size())) / Scalar(static_cast<long long>(n));
    std::vector<Scalar> y;
    y.reserve(X.size());
    for (auto x : X) y.push_back(scale * Scalar(static_cast<long long>(x)) - Scalar(1));
    return y;
}

/// Y_j = (k/n) X_j - 1, materialized only at observed symbols.
inline Rv phase1_rv(const Counts& counts, std::size_t k) {
    const double scale = static_cast<double>(k) / static_cast<double>(counts.n);
    std::vector<std::pair<Symbol, double>> entries;
    entries.reserve(counts.X.size());
    for (const auto& [j, x] : counts.X) entries.emplace_back(j, scale * static_cast<double>(x) - 1.0);
    return Rv::sparse(k, -1.0, std::move(entries));
}

// Large distance regime -----------------------------------------------------

struct LargeConfig {
    double gamma = 0.1;  // threshold on chi^2 / Hellinger^2
    double B = 1.0;
    double c_const = 128.0;  // calibrated, see README
    double C_const = 4.0;
    QmeConfig qme{.n = 1, .delta = 0.001};
    std::optional<std::uint64_t> n_override;  // fixes the Phase-1 budget (scaling benches)

    void validate(std::size_t k) const {
        const double kk = static_cast<double>(k);
        if (!(gamma * kk >= 1.0 - 1e-12 && gamma <= 1.0))
            throw std::invalid_argument("large regime: gamma must lie in [1/k, 1]");
        if (!(B >= 1.0)) throw std::invalid_argument("large regime: B must be >= 1");
        if (!(c_const > 0.0 && C_const > 0.0)) throw std::invalid_argument("large regime: constants must be positive");
        if (n_override && *n_override == 0) throw std::invalid_argument("large regime: n must be positive");
    }
};

/// n = ceil(c k^{1/3} / gamma^{2/3}).
inline std::uint64_t large_sample_size(std::size_t k, double gamma, double c_const) {
    const double n = c_const * std::cbrt(static_cast<double>(k)) / std::cbrt(gamma * gamma);
    return static_cast<std::uint64_t>(std::ceil(n - 1e-9));
}

/// L = 100 if n <= k^0.99 / B (inclusive), else B c ln k.
inline double choose_L(std::uint64_t n, std::size_t k, double B, double c_const) {
    if (n == 0 || k == 0 || !(B > 0.0) || !(c_const > 0.0))
        throw std::invalid_argument("choose_L: arguments must be positive");
    const double kk = static_cast<double>(k);
    if (static_cast<double>(n) <= std::pow(kk, 0.99) / B) return 100.0;
    return B * c_const * std::log(kk);
}

struct Phase1 {
    Counts counts;
    Rv Y;
    double mu;
    double sigma;
};

/// Draws n samples and builds Y; (mu, sigma) are exact against the code's truth.
inline Phase1 phase1_statistics(SourceCode& code, std::size_t k, std::uint64_t n) {
    if (!code.truth()) throw std::invalid_argument("phase1_statistics: code has no known truth");
    if (k != code.domain_size()) throw std::invalid_argument("phase1_statistics: domain mismatch");
    if (n == 0) throw std::invalid_argument("phase1_statistics: n must be positive");
    Counts counts = count_draws(code.draw(n, "phase1"));
    Rv y = phase1_rv(counts, k);
    const auto m = exact_moments(*code.truth(), y);
    return {std::move(counts), std::move(y), m.mu, m.sigma};
}

/// Uniformity tester for the large distance regime.
///
/// Accepts (w.h.p.) when chi^2(p||U) <= .99 gamma and ||p||_inf <= B/k;
/// rejects when Hellinger^2(p, U) >= gamma. Steps: n Phase-1 draws, reject
/// if some count reaches L, then mean-estimate Y_j = (k/n) X_j - 1 with
/// ceil(C n) samples and accept iff the estimate is at most .995 gamma.
inline Verdict run_large(SourceCode& code, std::size_t k, const LargeConfig& cfg, Stream& qme_rng) {
    if (k != code.domain_size()) throw std::invalid_argument("run_large: domain mismatch");
    cfg.validate(k);
    const std::uint64_t before = code.ledger().code_uses();

    // n first: L is defined in terms of it.
    const std::uint64_t n = cfg.n_override ? *cfg.n_override : large_sample_size(k, cfg.gamma, cfg.c_const);
    const double L = choose_L(n, k, cfg.B, cfg.c_const);

    Verdict v;
    Counts counts = count_draws(code.draw(n, "phase1"));
    counts.L = L;
    const std::uint64_t max_count = counts.max_count();
    v.diagnostics["n"] = static_cast<double>(n);
    v.diagnostics["L"] = L;
    v.diagnostics["max_count"] = static_cast<double>(max_count);

    if (static_cast<double>(max_count) >= L) {
        v.decision = Decision::Reject;
        v.reason = Reason::LInfCheck;
    } else {
        const Rv y = phase1_rv(counts, k);
        QmeConfig q = cfg.qme;
        q.n = static_cast<std::uint64_t>(std::ceil(cfg.C_const * static_cast<double>(n) - 1e-9));
        const MeanEstimate est = qme_estimate(code, y, q, qme_rng, "qme");
        v.mu_hat = est.value;
        v.diagnostics["qme_n"] = static_cast<double>(q.n);
        v.diagnostics["qme_uses"] = static_cast<double>(est.charged_uses);
        v.diagnostics["mu_hat"] = est.value;
        if (code.truth()) {
            const auto m = exact_moments(*code.truth(), y);
            v.diagnostics["mu"] = m.mu;
            v.diagnostics["sigma"] = m.sigma;
        }
        v.reason = Reason::MeanThreshold;
        v.decision = est.value <= 0.995 * cfg.gamma ? Decision::Accept : Decision::Reject;
    }
    v.counts = std::move(counts);
    v.code_uses = code.ledger().code_uses() - before;
    v.diagnostics["code_uses"] = static_cast<double>(v.code_uses);
    return v;
}

// Small distance regime -----------------------------------------------------

struct SmallConfig {
    double tau = 0.1;  // l2 threshold
    std::uint64_t T = 4000;
    double theta_star = (1.0 / 3.0 + 1.0 / std::sqrt(8.0)) / 2.0;  // multiple of tau
    double per_estimate_precision = 1.0 / 400.0;                   // multiple of tau
    double delta_round = 1.0 / 600.0;
    double vote_threshold = 7.0 / 384.0;  // (1/48 + 1/64) / 2
    QmeBackend backend = QmeBackend::IdealOracle;
    NoiseMode noise{};
    std::uint64_t cost_constant = 1;

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("small regime: tau must be positive");
        if (T == 0) throw std::invalid_argument("small regime: T must be positive");
        if (!(per_estimate_precision > 0.0)) throw std::invalid_argument("small regime: precision must be positive");
        const double lo = 1.0 / 3.0 + 2.0 * per_estimate_precision;
        const double hi = 1.0 / std::sqrt(8.0) - 2.0 * per_estimate_precision;
        if (!(lo < theta_star && theta_star < hi))
            throw std::invalid_argument("small regime: theta_star must separate 1/3 and 1/sqrt(8) by the estimate error");
        if (!(delta_round > 0.0 && delta_round < 0.5)) throw std::invalid_argument("small regime: delta_round must lie in (0, 1/2)");
        if (!(vote_threshold >= 0.0 && vote_threshold < 1.0)) throw std::invalid_argument("small regime: vote_threshold must lie in [0, 1)");
    }

    /// Per-estimate QME settings. An indicator has sigma <= 1/2, so
    /// n = ceil(1 / (2 precision tau)) gives error <= precision * tau.
    QmeConfig qme() const {
        QmeConfig q;
        q.n = static_cast<std::uint64_t>(std::ceil(1.0 / (2.0 * per_estimate_precision * tau) - 1e-9));
        q.delta = delta_round;
        q.backend = backend;
        q.noise = noise;
        q.cost_constant = cost_constant;
        return q;
    }
};

struct Subset {
    std::vector<Symbol> members;
    Rv indicator;
};

/// Uniformly random subset: each symbol included independently w.p. 1/2.
inline Subset subset_draw(std::size_t k, Stream& rng) {
    std::vector<double> ind(k, 0.0);
    std::vector<Symbol> members;
    std::uint64_t word = 0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j % 64 == 0) word = rng();
        if ((word >> (j % 64)) & 1ULL) {
            ind[j] = 1.0;
            members.push_back(j);
        }
    }
    return {std::move(members), Rv::dense(std::move(ind))};
}

/// l2 closeness tester via random binary hashing.
///
/// Each round hashes [k] to {in S, not in S} with a fresh uniform subset,
/// estimates p(S) and q(S) by mean estimation of the indicator, and votes 1
/// when the estimates differ by more than theta_star * tau. Accepts iff the
/// fraction of 1-votes is at most vote_threshold.
inline Verdict run_small(SourceCode& code_p, SourceCode& code_q, std::size_t k, const SmallConfig& cfg,
                         Stream& rng) {
    cfg.validate();
    if (code_p.domain_size() != k || code_q.domain_size() != k)
        throw std::invalid_argument("run_small: domain mismatch");
    const std::uint64_t before = code_p.ledger().code_uses() + code_q.ledger().code_uses();
    const QmeConfig q = cfg.qme();

    std::uint64_t votes = 0;
    for (std::uint64_t t = 0; t < cfg.T; ++t) {
        const Subset s = subset_draw(k, rng);
        const double p_hat = qme_estimate(code_p, s.indicator, q, rng, "qme").value;
        const double q_hat = qme_estimate(code_q, s.indicator, q, rng, "qme").value;
        if (std::abs(p_hat - q_hat) > cfg.theta_star * cfg.tau) ++votes;
    }

    Verdict v;
    const double fraction = static_cast<double>(votes) / static_cast<double>(cfg.T);
    v.reason = Reason::RoundVote;
    v.decision = fraction <= cfg.vote_threshold ? Decision::Accept : Decision::Reject;
    v.code_uses = code_p.ledger().code_uses() + code_q.ledger().code_uses() - before;
    v.diagnostics["T"] = static_cast<double>(cfg.T);
    v.diagnostics["votes"] = static_cast<double>(votes);
    v.diagnostics["vote_fraction"] = fraction;
    v.diagnostics["qme_n"] = static_cast<double>(q.n);
    v.diagnostics["qme_uses_per_estimate"] = static_cast<double>(qme_cost(q));
    v.diagnostics["code_uses"] = static_cast<double>(v.code_uses);
    return v;
}

// Giant regime --------------------------------------------------------------

struct GiantConfig {
    double theta = 1.0;
    double a_coef = 80.0;
    double c_close = 1.0 / 16010.0;

    void validate(std::size_t k) const {
        if (!(theta >= 1.0)) throw std::invalid_argument("giant regime: theta must be >= 1");
        if (!(a_coef > 0.0)) throw std::invalid_argument("giant regime: a_coef must be positive");
        if (!(c_close > 0.0 && c_close < 1.0)) throw std::invalid_argument("giant regime: c_close must lie in (0, 1)");
        const double n = std::ceil(a_coef * std::sqrt(static_cast<double>(k) / theta) - 1e-9);
        if (n < 2.0) throw std::invalid_argument("giant regime: derived N must be at least 2");
    }
};

/// N = ceil(a sqrt(k / theta)).
inline std::uint64_t giant_sample_size(std::size_t k, const GiantConfig& cfg) {
    return static_cast<std::uint64_t>(std::ceil(cfg.a_coef * std::sqrt(static_cast<double>(k) / cfg.theta) - 1e-9));
}

/// ceil(N^{2/3}), exactly: the least q with q^3 >= N^2.
inline std::uint64_t ceil_pow_two_thirds(std::uint64_t n) {
    if (n == 0) return 0;
    const auto n2 = static_cast<__uint128_t>(n) * n;
    auto q = static_cast<std::uint64_t>(std::cbrt(static_cast<long double>(n2)));
    auto cube = [](std::uint64_t x) { return static_cast<__uint128_t>(x) * x * x; };
    while (q > 0 && cube(q - 1) >= n2) --q;
    while (cube(q) < n2) ++q;
    return q;
}

/// Collision tester for the giant chi^2 regime (theta >= 1).
///
/// Draws N samples and rejects iff two coincide. Distinctness is checked
/// classically; the diagnostics report the modeled quantum query cost
/// ceil(N^{2/3}) of a quantum element-distinctness search over the N draws.
inline Verdict run_giant(SourceCode& code, std::size_t k, const GiantConfig& cfg) {
    if (k != code.domain_size()) throw std::invalid_argument("run_giant: domain mismatch");
    cfg.validate(k);
    const std::uint64_t before = code.ledger().code_uses();
    const std::uint64_t N = giant_sample_size(k, cfg);
    Counts counts = count_draws(code.draw(N, "giant"));

    Verdict v;
    const std::uint64_t z = counts.collisions();
    v.decision = z > 0 ? Decision::Reject : Decision::Accept;
    v.reason = z > 0 ? Reason::CollisionFound : Reason::NoCollision;
    v.code_uses = code.ledger().code_uses() - before;
    v.diagnostics["N"] = static_cast<double>(N);
    v.diagnostics["collisions"] = static_cast<double>(z);
    v.diagnostics["modeled_quantum_queries"] = static_cast<double>(ceil_pow_two_thirds(N));
    v.diagnostics["code_uses"] = static_cast<double>(v.code_uses);
    v.counts = std::move(counts);
    return v;
}

template <typename Scalar>
struct CollisionMoments {
    Scalar expected_Z;
    Scalar var_upper;
};

/// E[Z] = C(N,2) (pow2(d) + 1/k) and the variance bound
/// E[Z] + 6 C(N,3) (pow3(d) + (3/k) pow2(d)), with d = p - U_k.
template <typename Scalar>
CollisionMoments<Scalar> collision_stats(std::span<const Scalar> probs, std::uint64_t N) {
    if (N < 2) throw std::invalid_argument("collision_stats: N must be at least 2");
    const auto k = static_cast<long long>(probs.size());
    const Scalar inv_k = Scalar(1) / Scalar(k);
    Scalar pow2(0), pow3(0);
    for (const Scalar& p : probs) {
        const Scalar d = p - inv_k;
        pow2 += d * d;
        pow3 += d * d * d;
    }
    const auto n = static_cast<long long>(N);
    const Scalar pairs = Scalar(n * (n - 1) / 2);
    const Scalar triples = Scalar(n * (n - 1) * (n - 2) / 6);
    const Scalar ez = pairs * (pow2 + inv_k);
    return {ez, ez + Scalar(6) * triples * (pow3 + Scalar(3) * inv_k * pow2)};
}

inline CollisionMoments<double> collision_stats(const Pmf& p, std::uint64_t N) {
    return collision_stats<double>(p.probs(), N);
}

// Classical baseline --------------------------------------------------------

struct ClassicalConfig {
    double epsilon = 0.25;
    double sample_constant = 2.0;  // m = ceil(sample_constant sqrt(k) / eps^2)
    std::optional<std::uint64_t> m_override;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("classical: epsilon must lie in (0, 1)");
        if (!(sample_constant > 0.0)) throw std::invalid_argument("classical: sample_constant must be positive");
        if (m_override && *m_override < 2) throw std::invalid_argument("classical: need at least 2 samples");
    }
};

inline std::uint64_t classical_sample_size(std::size_t k, const ClassicalConfig& cfg) {
    if (cfg.m_override) return *cfg.m_override;
    const double m = cfg.sample_constant * std::sqrt(static_cast<double>(k)) / (cfg.epsilon * cfg.epsilon);
    return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(m - 1e-9)));
}

/// Sample-only collision tester: accept iff the empirical collision rate
/// Z / C(m, 2) is at most (1 + 2 eps^2) / k.
inline Verdict classical_baseline(SourceCode& code, std::size_t k, const ClassicalConfig& cfg) {
    cfg.validate();
    if (k != code.domain_size()) throw std::invalid_argument("classical_baseline: domain mismatch");
    const std::uint64_t before = code.ledger().code_uses();
    const std::uint64_t m = classical_sample_size(k, cfg);
    const Counts counts = count_draws(code.draw(m, "classical"));
    const double pairs = static_cast<double>(m) * static_cast<double>(m - 1) / 2.0;
    const double rate = static_cast<double>(counts.collisions()) / pairs;
    const double threshold = (1.0 + 2.0 * cfg.epsilon * cfg.epsilon) / static_cast<double>(k);

    Verdict v;
    v.reason = Reason::MeanThreshold;
    v.decision = rate <= threshold ? Decision::Accept : Decision::Reject;
    v.mu_hat = rate;
    v.code_uses = code.ledger().code_uses() - before;
    v.diagnostics["m"] = static_cast<double>(m);
    v.diagnostics["collision_rate"] = rate;
    v.diagnostics["threshold"] = threshold;
    v.diagnostics["code_uses"] = static_cast<double>(v.code_uses);
    return v;
}

}  // namespace distcheck

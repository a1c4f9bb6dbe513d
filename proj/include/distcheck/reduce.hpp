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

// Identity-to-uniformity reduction. Given a reference q over [k], the map
// Phi_q sends pmfs over [k] to pmfs over [4k] with Phi_q(q) = U_{4k} and
// TV(Phi_q(p), U_{4k}) >= TV(p, q)/4. It is applied as three channels:
// mix with uniform, round each symbol's mass down to the 1/(4k) grid (the
// rounded-off mass goes to an extra symbol k), then spread each symbol
// uniformly over its cell of a fixed partition of [4k]. Every stage is a
// post-processing of one draw, so code access is preserved.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distcheck/access.hpp"
#include "distcheck/dist.hpp"
#include "distcheck/rational.hpp"
#include "distcheck/rng.hpp"
#include "distcheck/testers.hpp"

namespace distcheck {

/// Phi3(p) = p/2 + U_k/2.
inline Pmf phi3(const Pmf& p) {
    const double half_u = 0.5 / static_cast<double>(p.k());
    std::vector<double> v(p.k());
    for (std::size_t i = 0; i < p.k(); ++i) v[i] = 0.5 * p[i] + half_u;
    return Pmf(std::move(v));
}

/// Code form of phi3: forward the draw, or replace it by a uniform symbol on
/// a fair coin. The inner code is drawn exactly once either way.
inline Channel phi3_channel(std::size_t k) {
    return Channel(
        k, k,
        [k](Symbol i, Stream& rng) { return rng.bernoulli(0.5) ? i : static_cast<Symbol>(rng.below(k)); },
        [k](std::span<const double> in) {
            std::vector<double> out(k);
            const double half_u = 0.5 / static_cast<double>(k);
            for (std::size_t i = 0; i < k; ++i) out[i] = 0.5 * in[i] + half_u;
            return out;
        });
}

/// Floor arithmetic of phi2 for a full-support reference q' over [k].
///
/// floors[i] = floor(4k q'_i) computed in exact rationals (q' snapped from
/// its stored doubles), keep[i] = floors[i] / (4k q'_i). The grained
/// reference phi2(q') has mass floors[i]/(4k) on i < k and the remainder
/// (4k - sum floors)/(4k) on the extra symbol k.
struct Graining {
    std::size_t k = 0;
    std::vector<std::uint64_t> floors;  // k entries
    std::uint64_t remainder = 0;        // 4k - sum(floors)
    std::vector<double> keep;           // k entries
    std::vector<Rational> reference;    // k + 1 entries, exact phi2(q')

    std::vector<std::uint64_t> cell_sizes() const {
        auto sizes = floors;
        sizes.push_back(remainder);
        return sizes;
    }
};

inline Graining grain_exact(const std::vector<Rational>& q_prime) {
    const std::size_t k = q_prime.size();
    if (k == 0) throw std::invalid_argument("phi2: empty reference");
    const Rational four_k(static_cast<long long>(4 * k));
    Graining g;
    g.k = k;
    g.floors.resize(k);
    g.keep.resize(k);
    g.reference.resize(k + 1);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (q_prime[i] <= 0) throw std::invalid_argument("phi2: reference must have full support");
        const Rational scaled = four_k * q_prime[i];
        const BigInt f = floor_rational(scaled);
        g.floors[i] = static_cast<std::uint64_t>(f);
        total += g.floors[i];
        const Rational keep = Rational(f) / scaled;
        g.keep[i] = static_cast<double>(keep);
        g.reference[i] = Rational(f) / four_k;
    }
    if (total > 4 * k) throw std::logic_error("phi2: floors exceed 4k");
    g.remainder = 4 * k - total;
    g.reference[k] = Rational(static_cast<long long>(g.remainder)) / four_k;
    return g;
}

inline Graining grain(const Pmf& q_prime) { return grain_exact(snap_pmf(q_prime.probs())); }

/// Exact pushforward of phi2 under a graining.
inline Pmf phi2(const Graining& g, const Pmf& input) {
    if (input.k() != g.k) throw std::invalid_argument("phi2: input domain differs from reference");
    std::vector<double> v(g.k + 1, 0.0);
    double spill = 0.0;
    for (std::size_t i = 0; i < g.k; ++i) {
        v[i] = g.keep[i] * input[i];
        spill += (1.0 - g.keep[i]) * input[i];
    }
    v[g.k] = spill;
    return Pmf(std::move(v));
}

inline Pmf phi2(const Pmf& q_prime, const Pmf& input) { return phi2(grain(q_prime), input); }

inline Channel phi2_channel(const Graining& g) {
    auto keep = std::make_shared<const std::vector<double>>(g.keep);
    const std::size_t k = g.k;
    return Channel(
        k, k + 1,
        [keep, k](Symbol i, Stream& rng) {
            const double u = rng.uniform();
            return u < (*keep)[i] ? i : static_cast<Symbol>(k);
        },
        [keep, k](std::span<const double> in) {
            std::vector<double> out(k + 1, 0.0);
            for (std::size_t i = 0; i < k; ++i) {
                out[i] = (*keep)[i] * in[i];
                out[k] += (1.0 - (*keep)[i]) * in[i];
            }
            return out;
        });
}

/// Partition of [4k] into k+1 contiguous cells, cell i of size
/// 4k * (grained reference)_i. Determined by the reference alone.
class GrainedPartition {
public:
    explicit GrainedPartition(const std::vector<std::uint64_t>& cell_sizes) {
        if (cell_sizes.size() < 2) throw std::invalid_argument("partition: need at least two cells");
        k_ = cell_sizes.size() - 1;
        offsets_.assign(1, 0);
        for (auto s : cell_sizes) offsets_.push_back(offsets_.back() + s);
        if (offsets_.back() != 4 * k_) throw std::invalid_argument("partition: cell sizes must sum to 4k");
    }

    explicit GrainedPartition(const Graining& g) : GrainedPartition(g.cell_sizes()) {}

    std::size_t k() const noexcept { return k_; }
    std::size_t cells() const noexcept { return k_ + 1; }
    std::size_t universe() const noexcept { return 4 * k_; }
    std::uint64_t size(std::size_t cell) const { return offsets_.at(cell + 1) - offsets_.at(cell); }
    std::uint64_t begin(std::size_t cell) const { return offsets_.at(cell); }

    std::size_t cell_of(Symbol j) const {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::uint64_t>(j));
        return static_cast<std::size_t>(it - offsets_.begin()) - 1;
    }

    friend bool operator==(const GrainedPartition&, const GrainedPartition&) = default;

private:
    std::size_t k_ = 0;
    std::vector<std::uint64_t> offsets_;
};

/// Exact pushforward of phi1: mass of cell i spread evenly over its elements.
inline Pmf phi1(const GrainedPartition& part, const Pmf& input) {
    if (input.k() != part.cells()) throw std::invalid_argument("phi1: input must live on k+1 symbols");
    std::vector<double> v(part.universe(), 0.0);
    for (std::size_t i = 0; i < part.cells(); ++i) {
        const auto size = part.size(i);
        if (size == 0) {
            if (input[i] > 0.0) throw std::invalid_argument("phi1: positive mass on an empty cell");
            continue;
        }
        const double each = input[i] / static_cast<double>(size);
        std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(part.begin(i)), size, each);
    }
    return Pmf(std::move(v));
}

inline Channel phi1_channel(const GrainedPartition& part) {
    auto shared = std::make_shared<const GrainedPartition>(part);
    return Channel(
        part.cells(), part.universe(),
        [shared](Symbol i, Stream& rng) {
            const auto size = shared->size(i);
            if (size == 0) throw std::logic_error("phi1: drew a symbol whose cell is empty");
            return static_cast<Symbol>(shared->begin(i) + rng.below(size));
        },
        [shared](std::span<const double> in) {
            std::vector<double> out(shared->universe(), 0.0);
            for (std::size_t i = 0; i < shared->cells(); ++i) {
                const auto size = shared->size(i);
                if (size == 0) {
                    if (in[i] > 0.0) throw std::invalid_argument("phi1: positive mass on an empty cell");
                    continue;
                }
                const double each = in[i] / static_cast<double>(size);
                for (std::uint64_t j = 0; j < size; ++j) out[shared->begin(i) + j] = each;
            }
            return out;
        });
}

/// Everything the reduction derives from the reference q.
struct Reduction {
    std::size_t k;
    std::vector<Rational> q_mixed;  // phi3(q), exact
    Graining graining;
    GrainedPartition partition;
    Channel channel;  // phi3, then phi2, then phi1

    Pmf apply(const Pmf& p) const { return channel.apply(p); }
};

inline Reduction make_reduction(const Pmf& q) {
    const std::size_t k = q.k();
    auto snapped = snap_pmf(q.probs());
    const Rational half(1, 2);
    const Rational half_u(1, static_cast<long long>(2 * k));
    for (auto& r : snapped) r = half * r + half_u;
    Graining g = grain_exact(snapped);
    GrainedPartition part(g);
    Channel ch = phi3_channel(k).then(phi2_channel(g)).then(phi1_channel(part));
    return Reduction{k, std::move(snapped), std::move(g), std::move(part), std::move(ch)};
}

struct ReducedInstance {
    SourceCode code;  // over [4k]
    double epsilon;   // epsilon / 4
};

/// Code for Phi_q(p) over [4k]; each output draw uses code_p exactly once.
inline ReducedInstance reduce_instance(const Pmf& q, const SourceCode& code_p, double epsilon) {
    if (q.k() != code_p.domain_size()) throw std::invalid_argument("reduce_instance: domain mismatch");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("reduce_instance: epsilon must lie in (0, 1]");
    const Reduction r = make_reduction(q);
    return {code_p.postprocess(r.channel), epsilon / 4.0};
}

struct IdentityConfigs {
    LargeConfig large{};
    SmallConfig small{};
};

/// Identity tester: reduce to uniformity over [4k] with eps' = eps/4, then
/// run the large-regime tester with gamma = eps'^2 when eps' >= 1/sqrt(4k),
/// else the l2 tester against U_{4k} with tau = 2 eps' / sqrt(4k).
///
/// `rng` drives the mean-estimation randomness; the U_{4k} code for the
/// small branch draws its seed from it as well.
inline Verdict identity_test(const Pmf& q, const SourceCode& code_p, double epsilon, const IdentityConfigs& cfg,
                             Stream& rng) {
    ReducedInstance red = reduce_instance(q, code_p, epsilon);
    const std::size_t k_out = 4 * q.k();
    const double eps_out = red.epsilon;
    const double cutoff = 1.0 / std::sqrt(static_cast<double>(k_out));

    Verdict v;
    if (eps_out >= cutoff) {
        LargeConfig large = cfg.large;
        large.gamma = eps_out * eps_out;
        v = run_large(red.code, k_out, large, rng);
        v.diagnostics["regime_large"] = 1.0;
    } else {
        SmallConfig small = cfg.small;
        small.tau = 2.0 * eps_out / std::sqrt(static_cast<double>(k_out));
        SourceCode code_u = code_from_pmf(Pmf::uniform(k_out), rng());
        const std::uint64_t before = red.code.ledger().code_uses();
        v = run_small(red.code, code_u, k_out, small, rng);
        v.diagnostics["p_code_uses"] = static_cast<double>(red.code.ledger().code_uses() - before);
        v.diagnostics["regime_large"] = 0.0;
    }
    v.diagnostics["epsilon_out"] = eps_out;
    return v;
}

}  // namespace distcheck

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
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distcheck/access.hpp"
#include "distcheck/dist.hpp"
#include "distcheck/rng.hpp"

namespace distcheck {

/// Random variable Y : [k] -> R given as a table.
///
/// Stored either densely or as a constant `base` with sparse overrides, so
/// that tables built from a handful of observed symbols cost O(#observed)
/// rather than O(k).
class Rv {
public:
    static Rv dense(std::vector<double> values) {
        if (values.empty()) throw std::invalid_argument("rv: empty table");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("rv: non-finite entry");
        Rv y;
        y.k_ = values.size();
        y.dense_ = std::move(values);
        return y;
    }

    /// `entries` must have strictly increasing symbols below k.
    static Rv sparse(std::size_t k, double base, std::vector<std::pair<Symbol, double>> entries) {
        if (k == 0) throw std::invalid_argument("rv: empty table");
        if (!std::isfinite(base)) throw std::invalid_argument("rv: non-finite entry");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].first >= k) throw std::invalid_argument("rv: symbol outside [k]");
            if (i > 0 && entries[i].first <= entries[i - 1].first)
                throw std::invalid_argument("rv: sparse symbols must be strictly increasing");
            if (!std::isfinite(entries[i].second)) throw std::invalid_argument("rv: non-finite entry");
        }
        Rv y;
        y.k_ = k;
        y.base_ = base;
        y.sparse_ = std::move(entries);
        y.is_sparse_ = true;
        return y;
    }

    static Rv constant(std::size_t k, double c) { return sparse(k, c, {}); }

    std::size_t k() const noexcept { return k_; }
    bool is_sparse() const noexcept { return is_sparse_; }
    double base() const noexcept { return base_; }
    const std::vector<std::pair<Symbol, double>>& entries() const noexcept { return sparse_; }
    std::span<const double> values() const noexcept { return dense_; }

    double operator()(Symbol j) const {
        if (!is_sparse_) return dense_[j];
        auto it = std::lower_bound(sparse_.begin(), sparse_.end(), j,
                                   [](const auto& e, Symbol s) { return e.first < s; });
        return (it != sparse_.end() && it->first == j) ? it->second : base_;
    }

    std::vector<double> to_dense() const {
        if (!is_sparse_) return dense_;
        std::vector<double> out(k_, base_);
        for (const auto& [j, v] : sparse_) out[j] = v;
        return out;
    }

private:
    Rv() = default;
    std::size_t k_ = 0;
    double base_ = 0.0;
    std::vector<double> dense_;
    std::vector<std::pair<Symbol, double>> sparse_;
    bool is_sparse_ = false;
};

template <typename Scalar>
struct MomentsOf {
    Scalar mean;
    Scalar variance;
};

/// Mean and variance of a table under weights, in any field-like Scalar
/// (double, or an exact rational type for enumeration oracles).
template <typename Scalar>
MomentsOf<Scalar> weighted_moments(std::span<const Scalar> probs, std::span<const Scalar> values) {
    if (probs.size() != values.size()) throw std::invalid_argument("moments: dimension mismatch");
    Scalar mean(0), second(0);
    for (std::size_t j = 0; j < probs.size(); ++j) {
        mean += probs[j] * values[j];
        second += probs[j] * values[j] * values[j];
    }
    Scalar var = second - mean * mean;
    if (var < Scalar(0)) var = Scalar(0);
    return {mean, var};
}

struct Moments {
    double mu;
    double sigma;
};

/// mu = E_p[Y], sigma = stddev_p[Y] (variance clamped at 0).
inline Moments exact_moments(const Pmf& p, const Rv& y) {
    if (p.k() != y.k()) throw std::invalid_argument("exact_moments: dimension mismatch");
    if (!y.is_sparse()) {
        auto m = weighted_moments<double>(p.probs(), y.values());
        return {m.mean, std::sqrt(m.variance)};
    }
    // E[Y] = base + sum_{j in S} p_j (y_j - base); same for Y^2.
    const double b = y.base();
    double mean = b, second = b * b;
    for (const auto& [j, v] : y.entries()) {
        mean += p[j] * (v - b);
        second += p[j] * (v * v - b * b);
    }
    return {mean, std::sqrt(std::max(second - mean * mean, 0.0))};
}

enum class QmeBackend { IdealOracle, ClassicalMoM };

enum class NoiseKind { Zero, UniformInBand, AdversarialHigh, AdversarialLow, AdversarialTowards };

struct NoiseMode {
    NoiseKind kind = NoiseKind::Zero;
    double target = 0.0;  // AdversarialTowards only

    static NoiseMode towards(double t) { return {NoiseKind::AdversarialTowards, t}; }
};

inline NoiseMode parse_noise(std::string_view text) {
    if (text == "zero") return {NoiseKind::Zero};
    if (text == "uniform") return {NoiseKind::UniformInBand};
    if (text == "adv-high") return {NoiseKind::AdversarialHigh};
    if (text == "adv-low") return {NoiseKind::AdversarialLow};
    if (text.starts_with("adv-to:")) {
        const std::string arg(text.substr(7));
        std::size_t used = 0;
        double t = 0;
        try {
            t = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != arg.size()) throw std::invalid_argument("bad adv-to target: " + arg);
        return NoiseMode::towards(t);
    }
    throw std::invalid_argument("unknown qme noise mode: " + std::string(text));
}

inline std::string to_string(const NoiseMode& m) {
    switch (m.kind) {
        case NoiseKind::Zero: return "zero";
        case NoiseKind::UniformInBand: return "uniform";
        case NoiseKind::AdversarialHigh: return "adv-high";
        case NoiseKind::AdversarialLow: return "adv-low";
        case NoiseKind::AdversarialTowards: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "adv-to:%.17g", m.target);
            return buf;
        }
    }
    return "?";
}

inline QmeBackend parse_backend(std::string_view text) {
    if (text == "ideal") return QmeBackend::IdealOracle;
    if (text == "mom") return QmeBackend::ClassicalMoM;
    throw std::invalid_argument("unknown qme backend: " + std::string(text));
}

inline std::string_view to_string(QmeBackend b) {
    return b == QmeBackend::IdealOracle ? "ideal" : "mom";
}

struct QmeConfig {
    std::uint64_t n = 1;
    double delta = 0.001;
    QmeBackend backend = QmeBackend::IdealOracle;
    NoiseMode noise{};
    std::uint64_t cost_constant = 1;

    void validate() const {
        if (n == 0) throw std::invalid_argument("qme: n must be positive");
        if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("qme: delta must lie in (0, 1/2)");
        if (cost_constant == 0) throw std::invalid_argument("qme: cost_constant must be positive");
    }
};

/// ceil(log2(1/delta)), guarded against log2 landing a hair above an integer.
inline std::uint64_t log2_inv_ceil(double delta) {
    return static_cast<std::uint64_t>(std::ceil(std::log2(1.0 / delta) - 1e-12));
}

inline std::uint64_t mom_batches(double delta) {
    return static_cast<std::uint64_t>(std::ceil(8.0 * std::log(1.0 / delta) - 1e-12));
}

/// Declared cost of one estimate, in code uses.
inline std::uint64_t qme_cost(const QmeConfig& cfg) {
    if (cfg.backend == QmeBackend::IdealOracle) return cfg.cost_constant * cfg.n * log2_inv_ceil(cfg.delta);
    return cfg.n * cfg.n * mom_batches(cfg.delta);
}

struct MeanEstimate {
    double value = 0.0;
    std::uint64_t n = 0;
    double delta = 0.0;
    QmeBackend backend = QmeBackend::IdealOracle;
    std::uint64_t charged_uses = 0;
    bool failure_sample = false;  // IdealOracle only: the declared out-of-band draw
};

/// Estimates E[Y] under the code's distribution so that |value - mu| <= sigma/n
/// with probability at least 1 - delta.
///
/// IdealOracle reads the code's truth and perturbs the exact mean according to
/// the noise mode; with probability delta it returns mu + 10 sigma/n instead.
/// It charges cost_constant * n * ceil(log2(1/delta)) uses without drawing.
///
/// ClassicalMoM returns the median of ceil(8 ln(1/delta)) batch means of n^2
/// real draws each, and the ledger records those draws.
inline MeanEstimate qme_estimate(SourceCode& code, const Rv& y, const QmeConfig& cfg, Stream& rng,
                                 std::string_view label = "qme") {
    cfg.validate();
    if (y.k() != code.domain_size()) throw std::invalid_argument("qme: Y and code have different domains");

    MeanEstimate est;
    est.n = cfg.n;
    est.delta = cfg.delta;
    est.backend = cfg.backend;

    if (cfg.backend == QmeBackend::IdealOracle) {
        if (!code.truth()) throw std::invalid_argument("qme: ideal oracle backend needs a code with known truth");
        const auto [mu, sigma] = exact_moments(*code.truth(), y);
        const double band = sigma / static_cast<double>(cfg.n);
        const double u_fail = rng.uniform();
        const double u_noise = rng.uniform();
        if (u_fail < cfg.delta) {
            est.value = mu + 10.0 * band;
            est.failure_sample = true;
        } else {
            switch (cfg.noise.kind) {
                case NoiseKind::Zero: est.value = mu; break;
                case NoiseKind::UniformInBand: est.value = mu + (2.0 * u_noise - 1.0) * band; break;
                case NoiseKind::AdversarialHigh: est.value = mu + band; break;
                case NoiseKind::AdversarialLow: est.value = mu - band; break;
                case NoiseKind::AdversarialTowards:
                    est.value = std::clamp(cfg.noise.target, mu - band, mu + band);
                    break;
            }
        }
        est.charged_uses = qme_cost(cfg);
        code.charge(label, est.charged_uses);
        return est;
    }

    if (cfg.n > (1ULL << 31)) throw std::invalid_argument("qme: n too large for the classical backend");
    const std::uint64_t per_batch = cfg.n * cfg.n;
    const std::uint64_t batches = mom_batches(cfg.delta);
    std::vector<double> means(batches);
    constexpr std::uint64_t chunk = 1ULL << 16;
    for (auto& m : means) {
        // Accumulate deviations from the batch's first value so a constant Y
        // reproduces its value exactly.
        double shift = 0.0, sum = 0.0;
        bool first = true;
        for (std::uint64_t done = 0; done < per_batch;) {
            const auto take = static_cast<std::size_t>(std::min(chunk, per_batch - done));
            for (Symbol s : code.draw(take, label)) {
                const double v = y(s);
                if (first) {
                    shift = v;
                    first = false;
                }
                sum += v - shift;
            }
            done += take;
        }
        m = shift + sum / static_cast<double>(per_batch);
    }
    auto mid = means.begin() + static_cast<std::ptrdiff_t>(batches / 2);
    std::nth_element(means.begin(), mid, means.end());
    if (batches % 2 == 1) {
        est.value = *mid;
    } else {
        const double upper = *mid;
        const double lower = *std::max_element(means.begin(), mid);
        est.value = 0.5 * (lower + upper);
    }
    est.charged_uses = per_batch * batches;
    return est;
}

}  // namespace distcheck

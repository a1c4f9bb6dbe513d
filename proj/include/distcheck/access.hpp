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
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distcheck/dist.hpp"
#include "distcheck/rng.hpp"

namespace distcheck {

/// Counts uses of a source code, broken down by phase label.
class QueryLedger {
public:
    void charge(std::string_view label, std::uint64_t uses) {
        if (uses == 0) return;
        breakdown_[std::string(label)] += uses;
        total_ += uses;
    }

    std::uint64_t code_uses() const noexcept { return total_; }
    const std::map<std::string, std::uint64_t, std::less<>>& breakdown() const noexcept { return breakdown_; }

    std::uint64_t uses(std::string_view label) const {
        auto it = breakdown_.find(label);
        return it == breakdown_.end() ? 0 : it->second;
    }

    /// Folds another ledger in (used by the harness after trials finish).
    void merge(const QueryLedger& other) {
        for (const auto& [label, n] : other.breakdown_) charge(label, n);
    }

private:
    std::map<std::string, std::uint64_t, std::less<>> breakdown_;
    std::uint64_t total_ = 0;
};

/// A string x in [k]^m; the induced pmf is the symbol frequency vector.
struct StringOracle {
    std::size_t k = 0;
    std::vector<Symbol> x;

    Pmf induced_pmf() const {
        if (x.empty()) throw std::invalid_argument("string oracle: empty string");
        std::vector<double> v(k, 0.0);
        for (Symbol s : x) {
            if (s >= k) throw std::invalid_argument("string oracle: symbol outside [k]");
            v[s] += 1.0;
        }
        for (auto& c : v) c /= static_cast<double>(x.size());
        return Pmf(std::move(v));
    }

    /// Symbol counts; p_i = counts[i] / m exactly.
    std::vector<std::size_t> counts() const {
        std::vector<std::size_t> c(k, 0);
        for (Symbol s : x) {
            if (s >= k) throw std::invalid_argument("string oracle: symbol outside [k]");
            ++c[s];
        }
        return c;
    }
};

/// x_j = floor(j / r) for j in [k]: every symbol below k/r appears r times.
inline StringOracle rto1_string(std::size_t k, std::size_t r) {
    if (r < 2 || k % r != 0) throw std::invalid_argument("rto1: r must be >= 2 and divide k");
    StringOracle s{k, std::vector<Symbol>(k)};
    for (std::size_t j = 0; j < k; ++j) s.x[j] = j / r;
    return s;
}

/// Reads the text format: first line "k m", then m lines of 1-based symbols.
inline StringOracle read_string_oracle(std::istream& in) {
    long long k = 0, m = 0;
    if (!(in >> k >> m) || k <= 0 || m <= 0)
        throw std::invalid_argument("string oracle: header must be 'k m' with positive values");
    StringOracle s{static_cast<std::size_t>(k), {}};
    s.x.reserve(static_cast<std::size_t>(m));
    for (long long j = 0; j < m; ++j) {
        long long v = 0;
        if (!(in >> v)) throw std::invalid_argument("string oracle: fewer symbols than declared");
        if (v < 1 || v > k) throw std::invalid_argument("string oracle: symbol outside [1, k]");
        s.x.push_back(static_cast<Symbol>(v - 1));
    }
    std::string extra;
    if (in >> extra) throw std::invalid_argument("string oracle: more symbols than declared");
    return s;
}

inline StringOracle read_string_oracle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open string oracle file: " + path);
    return read_string_oracle(in);
}

inline void write_string_oracle(std::ostream& out, const StringOracle& s) {
    out << s.k << ' ' << s.x.size() << '\n';
    for (Symbol v : s.x) out << (v + 1) << '\n';
}

/// Row-stochastic map from [k_in] to distributions over [k_out].
///
/// Carries both a sampler (for code post-processing) and the exact action on
/// pmfs (for the pushforward of `truth`). Structured channels supply their
/// own implementations; `from_matrix` covers the general dense case.
class Channel {
public:
    using Sampler = std::function<Symbol(Symbol, Stream&)>;
    using Pushforward = std::function<std::vector<double>(std::span<const double>)>;

    Channel(std::size_t k_in, std::size_t k_out, Sampler sample, Pushforward apply)
        : k_in_(k_in), k_out_(k_out), sample_(std::move(sample)), apply_(std::move(apply)) {}

    static Channel from_matrix(std::vector<std::vector<double>> rows) {
        if (rows.empty()) throw std::invalid_argument("channel: no rows");
        const std::size_t k_out = rows.front().size();
        if (k_out == 0) throw std::invalid_argument("channel: empty output domain");
        std::vector<Pmf> pmfs;
        pmfs.reserve(rows.size());
        for (auto& row : rows) {
            if (row.size() != k_out) throw std::invalid_argument("channel: ragged rows");
            try {
                pmfs.emplace_back(std::move(row));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(std::string("channel: row is not a pmf (") + e.what() + ")");
            }
        }
        auto shared = std::make_shared<const std::vector<Pmf>>(std::move(pmfs));
        const std::size_t k_in = shared->size();
        return Channel(
            k_in, k_out,
            [shared](Symbol i, Stream& rng) { return (*shared)[i].quantile(rng.uniform()); },
            [shared, k_out](std::span<const double> in) {
                std::vector<double> out(k_out, 0.0);
                for (std::size_t i = 0; i < in.size(); ++i) {
                    if (in[i] == 0.0) continue;
                    const auto row = (*shared)[i].probs();
                    for (std::size_t j = 0; j < k_out; ++j) out[j] += in[i] * row[j];
                }
                return out;
            });
    }

    static Channel identity(std::size_t k) {
        return Channel(
            k, k, [](Symbol i, Stream&) { return i; },
            [](std::span<const double> in) { return std::vector<double>(in.begin(), in.end()); });
    }

    std::size_t k_in() const noexcept { return k_in_; }
    std::size_t k_out() const noexcept { return k_out_; }

    Symbol sample(Symbol input, Stream& rng) const { return sample_(input, rng); }

    std::vector<double> apply(std::span<const double> in) const {
        if (in.size() != k_in_) throw std::invalid_argument("channel: input dimension mismatch");
        return apply_(in);
    }

    Pmf apply(const Pmf& p) const { return Pmf(apply(p.probs())); }

    /// this, then next.
    Channel then(const Channel& next) const {
        if (k_out_ != next.k_in_) throw std::invalid_argument("channel: composition dimension mismatch");
        auto first = *this;
        return Channel(
            k_in_, next.k_out_,
            [first, next](Symbol i, Stream& rng) { return next.sample(first.sample(i, rng), rng); },
            [first, next](std::span<const double> in) {
                const auto mid = first.apply(in);
                return next.apply(std::span<const double>(mid));
            });
    }

private:
    std::size_t k_in_, k_out_;
    Sampler sample_;
    Pushforward apply_;
};

/// "The code" for a distribution: a metered sampler.
///
/// Every forward sample charges exactly one use to the ledger. Codes built
/// by post-processing share the ledger and random stream of the code they
/// wrap, so uses of the wrapped code are visible through either handle.
/// A SourceCode is confined to one trial; it is not thread-safe.
class SourceCode {
public:
    using DrawProcedure = std::function<Symbol(Stream&)>;

    SourceCode(std::size_t domain_size, DrawProcedure draw, std::uint64_t seed,
               std::optional<Pmf> truth = std::nullopt)
        : domain_size_(domain_size),
          draw_(std::make_shared<DrawProcedure>(std::move(draw))),
          state_(std::make_shared<State>(State{Stream(seed), {}})),
          truth_(std::move(truth)) {
        if (domain_size_ == 0) throw std::invalid_argument("source code: empty domain");
        if (truth_ && truth_->k() != domain_size_)
            throw std::invalid_argument("source code: truth has the wrong domain size");
    }

    std::size_t domain_size() const noexcept { return domain_size_; }

    Symbol draw_one(std::string_view label = "draw") {
        state_->ledger.charge(label, 1);
        return (*draw_)(state_->rng);
    }

    std::vector<Symbol> draw(std::size_t n_draws, std::string_view label = "draw") {
        std::vector<Symbol> out(n_draws);
        for (auto& s : out) s = (*draw_)(state_->rng);
        state_->ledger.charge(label, n_draws);
        return out;
    }

    /// Records uses that a simulated subroutine makes without drawing.
    void charge(std::string_view label, std::uint64_t uses) { state_->ledger.charge(label, uses); }

    const QueryLedger& ledger() const noexcept { return state_->ledger; }

    /// Privileged ground truth; only oracle backends and tests read it.
    const std::optional<Pmf>& truth() const noexcept { return truth_; }

    SourceCode without_truth() const {
        SourceCode c = *this;
        c.truth_.reset();
        return c;
    }

    /// Wraps this code with a post-processing channel. Shares ledger and
    /// stream with this code.
    SourceCode postprocess(const Channel& channel) const {
        if (channel.k_in() != domain_size_)
            throw std::invalid_argument("postprocess: channel input size differs from code domain");
        SourceCode out = *this;
        out.domain_size_ = channel.k_out();
        auto inner = draw_;
        out.draw_ = std::make_shared<DrawProcedure>(
            [inner, channel](Stream& rng) { return channel.sample((*inner)(rng), rng); });
        if (truth_) out.truth_ = channel.apply(*truth_);
        return out;
    }

private:
    struct State {
        Stream rng;
        QueryLedger ledger;
    };

    std::size_t domain_size_;
    std::shared_ptr<const DrawProcedure> draw_;
    std::shared_ptr<State> state_;
    std::optional<Pmf> truth_;
};

/// I.i.d. inverse-CDF sampler for p on a seeded stream.
inline SourceCode code_from_pmf(const Pmf& p, std::uint64_t seed) {
    return SourceCode(
        p.k(), [p](Stream& rng) { return p.quantile(rng.uniform()); }, seed, p);
}

/// Samples a uniform position of the string and returns the symbol there.
inline SourceCode code_from_string(const StringOracle& x, std::uint64_t seed) {
    if (x.x.empty()) throw std::invalid_argument("string oracle: empty string");
    Pmf truth = x.induced_pmf();
    auto symbols = std::make_shared<const std::vector<Symbol>>(x.x);
    return SourceCode(
        x.k, [symbols](Stream& rng) { return (*symbols)[rng.below(symbols->size())]; }, seed,
        std::move(truth));
}

}  // namespace distcheck

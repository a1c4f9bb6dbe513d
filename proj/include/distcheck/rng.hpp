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
#include <limits>
#include <string_view>

namespace distcheck {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_label(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based random stream: output i is mix64(key + (i+1)*gamma).
///
/// Streams are cheap to derive. A master seed together with a trial index
/// and a phase label names an independent stream, so trials can be executed
/// in any order (or concurrently) and still reproduce bit-for-bit.
///
/// Satisfies UniformRandomBitGenerator, but the helpers below are preferred
/// over <random> distributions since their output is fixed across standard
/// libraries.
class Stream {
public:
    using result_type = std::uint64_t;

    constexpr explicit Stream(std::uint64_t seed = 0) noexcept : key_(mix64(seed)) {}

    static constexpr Stream derive(std::uint64_t master, std::uint64_t trial,
                                   std::string_view label) noexcept {
        return Stream(mix64(master ^ mix64(trial + 0x632be59bd9b4e019ULL)) ^ hash_label(label));
    }

    /// Child stream keyed off this stream's key (not its position).
    constexpr Stream split(std::string_view label) const noexcept {
        Stream s;
        s.key_ = mix64(key_ ^ hash_label(label));
        return s;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., bound-1}; Lemire's nearly-divisionless method.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Unit-rate exponential.
    double exponential() noexcept { return -std::log1p(-uniform()); }

    constexpr std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace distcheck

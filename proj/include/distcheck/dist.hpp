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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "distcheck/rng.hpp"

namespace distcheck {

/// Domain element. Symbols are 0-based in code; text formats are 1-based.
using Symbol = std::size_t;

namespace detail {

// Neumaier summation.
template <typename Range>
double accurate_sum(const Range& xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace detail

/// Probability mass function over {0, ..., k-1}.
///
/// Immutable; copies share storage. The cumulative table used for
/// inverse-CDF sampling is built once at construction.
class Pmf {
public:
    /// Validates and renormalizes. Throws std::invalid_argument on negative or
    /// non-finite entries, an empty vector, or a total off from 1 by more
    /// than 1e-9.
    explicit Pmf(std::vector<double> probs) {
        if (probs.empty()) throw std::invalid_argument("pmf: domain size must be at least 1");
        for (double x : probs) {
            if (!std::isfinite(x) || x < 0.0)
                throw std::invalid_argument("pmf: entries must be finite and nonnegative");
        }
        const double total = detail::accurate_sum(probs);
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream os;
            os.precision(17);
            os << "pmf: entries sum to " << total << ", not 1";
            throw std::invalid_argument(os.str());
        }
        if (total != 1.0)
            for (double& x : probs) x /= total;

        auto impl = std::make_shared<Impl>();
        impl->cdf.resize(probs.size());
        double sum = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double y = probs[i] - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            impl->cdf[i] = sum;
        }
        impl->probs = std::move(probs);
        impl_ = std::move(impl);
    }

    static Pmf uniform(std::size_t k) {
        if (k == 0) throw std::invalid_argument("pmf: domain size must be at least 1");
        return Pmf(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    static Pmf point_mass(std::size_t k, Symbol at) {
        if (at >= k) throw std::invalid_argument("pmf: point mass outside the domain");
        std::vector<double> v(k, 0.0);
        v[at] = 1.0;
        return Pmf(std::move(v));
    }

    std::size_t k() const noexcept { return impl_->probs.size(); }
    double operator[](Symbol i) const noexcept { return impl_->probs[i]; }
    std::span<const double> probs() const noexcept { return impl_->probs; }

    /// Inverse-CDF lookup for u in [0, 1). Never returns a zero-mass symbol.
    Symbol quantile(double u) const noexcept {
        const auto& cdf = impl_->cdf;
        const double target = u * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        auto i = static_cast<Symbol>(it - cdf.begin());
        if (i >= cdf.size()) i = cdf.size() - 1;
        while (impl_->probs[i] == 0.0 && i > 0) --i;
        return i;
    }

    double norm_inf() const noexcept {
        return *std::max_element(impl_->probs.begin(), impl_->probs.end());
    }

    /// Deviation coordinates: p_j = (1 + eps_j) / k.
    std::vector<double> deviations() const {
        std::vector<double> eps(k());
        const double kk = static_cast<double>(k());
        for (std::size_t j = 0; j < k(); ++j) eps[j] = kk * impl_->probs[j] - 1.0;
        return eps;
    }

    friend bool operator==(const Pmf& a, const Pmf& b) {
        return a.impl_ == b.impl_ || a.impl_->probs == b.impl_->probs;
    }

private:
    struct Impl {
        std::vector<double> probs;
        std::vector<double> cdf;
    };
    std::shared_ptr<const Impl> impl_;
};

enum class Metric { TV, HellingerSq, KL, ChiSq, L2 };

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::TV: return "tv";
        case Metric::HellingerSq: return "hellinger2";
        case Metric::KL: return "kl";
        case Metric::ChiSq: return "chi2";
        case Metric::L2: return "l2";
    }
    return "?";
}

/// Distance or divergence between two pmfs on the same domain.
///
/// Hellinger is unnormalized, sum (sqrt p - sqrt q)^2, so it ranges over
/// [0, 2]. ChiSq is sum (p-q)^2/q. KL is sum p ln(p/q) in nats.
///
/// Note on KL: some presentations write the sum as q ln(q/p) for the same
/// pair of arguments. With that orientation the chain
/// TV^2 <= Hellinger^2 <= KL <= ChiSq fails for pmfs with small entries of p,
/// so this function uses the orientation under which the chain holds.
///
/// Conventions: 0 ln(0/x) = 0, x ln(x/0) = +inf, (x-y)^2/0 = +inf when x != y
/// and 0 when x == y.
inline double distance(const Pmf& p, const Pmf& q, Metric metric) {
    if (p.k() != q.k()) throw std::invalid_argument("distance: domain sizes differ");
    const std::size_t k = p.k();
    std::vector<double> terms(k);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        const double a = p[i], b = q[i];
        switch (metric) {
            case Metric::TV: terms[i] = std::abs(a - b); break;
            case Metric::HellingerSq: {
                const double d = std::sqrt(a) - std::sqrt(b);
                terms[i] = d * d;
                break;
            }
            case Metric::KL:
                if (a == 0.0) terms[i] = 0.0;
                else if (b == 0.0) return inf;
                else terms[i] = a * std::log(a / b);
                break;
            case Metric::ChiSq:
                if (b == 0.0) {
                    if (a != 0.0) return inf;
                    terms[i] = 0.0;
                } else {
                    terms[i] = (a - b) * (a - b) / b;
                }
                break;
            case Metric::L2: terms[i] = (a - b) * (a - b); break;
        }
    }
    const double s = detail::accurate_sum(terms);
    switch (metric) {
        case Metric::TV: return std::clamp(0.5 * s, 0.0, 1.0);
        case Metric::HellingerSq: return std::clamp(s, 0.0, 2.0);
        case Metric::L2: return std::sqrt(s);
        default: return std::max(s, 0.0);
    }
}

/// chi^2(p || U_k) = k * ||p - U_k||_2^2.
inline double chi_sq_uniform(const Pmf& p) {
    const double k = static_cast<double>(p.k());
    std::vector<double> terms(p.k());
    for (std::size_t i = 0; i < p.k(); ++i) {
        const double d = p[i] - 1.0 / k;
        terms[i] = d * d;
    }
    return k * detail::accurate_sum(terms);
}

// Instance families ---------------------------------------------------------

struct Uniform {};
/// Alternating (1 + 2 eps)/k, (1 - 2 eps)/k; TV to uniform is eps.
struct PerturbedUniform { double eps; };
/// Uniform on the first r symbols.
struct UniformSubset { std::size_t r; };
/// Mass w on the first symbol, the rest spread evenly.
struct HeavySpike { double w; };
/// Pmf induced by an r-to-1 string: uniform on k/r symbols.
struct RTo1String { std::size_t r; };

using InstanceSpec = std::variant<Uniform, PerturbedUniform, UniformSubset, HeavySpike, RTo1String>;

inline std::string label(const InstanceSpec& spec) {
    std::ostringstream os;
    os.precision(12);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Uniform>) os << "uniform";
            else if constexpr (std::is_same_v<T, PerturbedUniform>) os << "perturbed:" << s.eps;
            else if constexpr (std::is_same_v<T, UniformSubset>) os << "subset:" << s.r;
            else if constexpr (std::is_same_v<T, HeavySpike>) os << "spike:" << s.w;
            else os << "rto1:" << s.r;
        },
        spec);
    return os.str();
}

/// Parses "uniform", "perturbed:<eps>", "subset:<r>", "spike:<w>", "rto1:<r>".
inline InstanceSpec parse_instance(std::string_view text) {
    const auto colon = text.find(':');
    const std::string name(text.substr(0, colon));
    const std::string arg = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
    auto need_arg = [&]() {
        if (arg.empty()) throw std::invalid_argument("instance '" + name + "' needs a parameter");
    };
    auto as_real = [&]() {
        need_arg();
        std::size_t used = 0;
        const double v = std::stod(arg, &used);
        if (used != arg.size()) throw std::invalid_argument("bad number in instance spec: " + arg);
        return v;
    };
    auto as_count = [&]() {
        need_arg();
        std::size_t used = 0;
        const unsigned long long v = std::stoull(arg, &used);
        if (used != arg.size()) throw std::invalid_argument("bad integer in instance spec: " + arg);
        return static_cast<std::size_t>(v);
    };
    try {
        if (name == "uniform") return Uniform{};
        if (name == "perturbed") return PerturbedUniform{as_real()};
        if (name == "subset") return UniformSubset{as_count()};
        if (name == "spike") return HeavySpike{as_real()};
        if (name == "rto1") return RTo1String{as_count()};
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad instance spec: " + std::string(text));
    }
    throw std::invalid_argument("unknown instance family: " + name);
}

inline Pmf make_instance(std::size_t k, const InstanceSpec& spec) {
    if (k == 0) throw std::invalid_argument("make_instance: k must be positive");
    const double kk = static_cast<double>(k);
    return std::visit(
        [&](const auto& s) -> Pmf {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return Pmf::uniform(k);
            } else if constexpr (std::is_same_v<T, PerturbedUniform>) {
                if (!(s.eps > 0.0 && s.eps <= 0.5))
                    throw std::invalid_argument("perturbed: eps must lie in (0, 1/2]");
                if (k % 2 != 0) throw std::invalid_argument("perturbed: k must be even");
                std::vector<double> v(k);
                for (std::size_t j = 0; j < k; ++j)
                    v[j] = (j % 2 == 0 ? 1.0 + 2.0 * s.eps : 1.0 - 2.0 * s.eps) / kk;
                return Pmf(std::move(v));
            } else if constexpr (std::is_same_v<T, UniformSubset>) {
                if (s.r < 1 || s.r > k) throw std::invalid_argument("subset: r must lie in [1, k]");
                std::vector<double> v(k, 0.0);
                std::fill_n(v.begin(), s.r, 1.0 / static_cast<double>(s.r));
                return Pmf(std::move(v));
            } else if constexpr (std::is_same_v<T, HeavySpike>) {
                if (!(s.w > 0.0 && s.w <= 1.0)) throw std::invalid_argument("spike: w must lie in (0, 1]");
                if (k == 1 && s.w != 1.0) throw std::invalid_argument("spike: k = 1 forces w = 1");
                std::vector<double> v(k, k > 1 ? (1.0 - s.w) / (kk - 1.0) : 0.0);
                v[0] = s.w;
                return Pmf(std::move(v));
            } else {
                if (s.r < 2 || k % s.r != 0) throw std::invalid_argument("rto1: r must be >= 2 and divide k");
                return make_instance(k, UniformSubset{k / s.r});
            }
        },
        spec);
}

/// Flat Dirichlet draw: normalized independent unit exponentials.
inline Pmf random_pmf(std::size_t k, Stream& rng) {
    std::vector<double> v(k);
    for (auto& x : v) x = rng.exponential();
    const double s = detail::accurate_sum(v);
    for (auto& x : v) x /= s;
    return Pmf(std::move(v));
}

/// Mixture (1 - t) p + t q.
inline Pmf mix(const Pmf& p, const Pmf& q, double t) {
    if (p.k() != q.k()) throw std::invalid_argument("mix: domain sizes differ");
    std::vector<double> v(p.k());
    for (std::size_t i = 0; i < p.k(); ++i) v[i] = (1.0 - t) * p[i] + t * q[i];
    return Pmf(std::move(v));
}

}  // namespace distcheck

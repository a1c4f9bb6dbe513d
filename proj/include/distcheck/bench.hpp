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
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "distcheck/dist.hpp"
#include "distcheck/harness.hpp"
#include "distcheck/rng.hpp"
#include "distcheck/testers.hpp"

namespace distcheck {

/// Scaling bench: for each grid point, the smallest sample budget at which
/// the tester accepts the null and rejects the alternative at `target` rate.
///
/// large:     null U_k under AdversarialHigh noise, alternative the perturbed
///            uniform at Hellinger^2 = theta under AdversarialTowards(0).
/// classical: null U_k, alternative the perturbed uniform at TV = epsilon.
/// giant:     cost-model arithmetic, ceil(N^{2/3}) with N = ceil(a sqrt(k/theta)).
struct BenchConfig {
    Regime regime = Regime::Large;
    bool sweep_theta = false;  // else sweep k
    std::vector<std::size_t> k_grid{1024, 2048, 4096, 8192, 16384, 32768, 65536};
    std::vector<double> theta_grid{0.025, 0.05, 0.1, 0.2, 0.4};
    std::size_t k = 65536;  // fixed k for the theta sweep
    double theta = 0.2;  // giant regime uses giant.theta
    double epsilon = 0.25;
    double target = 0.9;
    std::uint64_t trials = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::uint64_t cap = 1ULL << 22;
    std::uint64_t bootstrap = 2000;
    LargeConfig large{};
    GiantConfig giant{.theta = 5e4};

    void validate() const {
        const std::size_t points = sweep_theta ? theta_grid.size() : k_grid.size();
        if (points < 4) throw std::invalid_argument("bench: the grid needs at least 4 points");
        if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("bench: target must lie in (0, 1)");
        if (trials == 0) throw std::invalid_argument("bench: trials must be positive");
        if (cap < 2) throw std::invalid_argument("bench: cap must be at least 2");
        if (regime == Regime::Small) throw std::invalid_argument("bench: the small regime is not benchmarked");
        if (regime == Regime::Classical && sweep_theta)
            throw std::invalid_argument("bench: the classical baseline sweeps k only");
    }
};

struct BenchRow {
    std::size_t k = 0;
    double param = 0.0;  // theta, or epsilon for the classical baseline
    double x = 0.0;      // abscissa of the fit: k, or 1/theta
    std::uint64_t budget = 0;
    double null_rate = 0.0;
    double alt_rate = 0.0;
    bool reached = true;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t points = 0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::optional<SlopeFit> fit;
};

/// Perturbation eps with Hellinger^2(PerturbedUniform(eps), U) = h, i.e.
/// 2 - sqrt(1 + 2 eps) - sqrt(1 - 2 eps) = h.
inline double perturbed_eps_for_hellinger(double h) {
    auto hell = [](double e) { return 2.0 - std::sqrt(1.0 + 2.0 * e) - std::sqrt(1.0 - 2.0 * e); };
    if (!(h > 0.0 && h <= hell(0.5))) throw std::invalid_argument("no perturbed uniform reaches this Hellinger distance");
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (hell(mid) < h ? lo : hi) = mid;
    }
    return hi;
}

/// Ordinary least squares of log y on log x.
inline std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit: abscissae are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Log-log slope with a percentile bootstrap interval over resampled rows.
inline SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, std::uint64_t reps,
                          std::uint64_t seed) {
    SlopeFit f;
    std::tie(f.slope, f.intercept) = loglog_fit(x, y);
    f.points = x.size();
    f.lo = f.hi = f.slope;
    if (reps == 0) return f;
    Stream rng = Stream::derive(seed, 0, "bench/bootstrap");
    std::vector<double> slopes;
    slopes.reserve(reps);
    std::vector<double> bx(x.size()), by(y.size());
    for (std::uint64_t r = 0; r < reps; ++r) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto j = rng.below(x.size());
            bx[i] = x[j];
            by[i] = y[j];
        }
        if (std::all_of(bx.begin(), bx.end(), [&](double v) { return v == bx[0]; })) continue;
        slopes.push_back(loglog_fit(bx, by).first);
    }
    if (slopes.empty()) return f;
    std::sort(slopes.begin(), slopes.end());
    auto at = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(slopes.size() - 1)));
        return slopes[idx];
    };
    f.lo = at(0.025);
    f.hi = at(0.975);
    return f;
}

namespace detail {

struct Rates {
    double null_rate;
    double alt_rate;
};

/// Accept rate under the null and reject rate under the alternative at a
/// fixed budget. Trial streams do not depend on the budget, so neighbouring
/// budgets are compared on common randomness.
inline Rates bench_rates(const BenchConfig& cfg, std::size_t k, double param, std::uint64_t budget) {
    const Pmf null = Pmf::uniform(k);
    Pmf alt = null;
    LargeConfig large = cfg.large;
    ClassicalConfig classical;
    if (cfg.regime == Regime::Large) {
        alt = make_instance(k, PerturbedUniform{perturbed_eps_for_hellinger(param)});
        large.gamma = param;
        large.n_override = budget;
        large.qme.backend = QmeBackend::IdealOracle;
    } else {
        alt = make_instance(k, PerturbedUniform{param});
        classical.epsilon = param;
        classical.m_override = budget;
    }
    std::vector<int> outcome(2 * cfg.trials, 0);
    parallel_for(outcome.size(), cfg.jobs, [&](std::size_t idx) {
        const bool is_alt = idx >= cfg.trials;
        const std::uint64_t trial = idx % cfg.trials;
        const std::string tag = std::string(is_alt ? "alt" : "null") + "/" + std::to_string(k);
        SourceCode code = code_from_pmf(is_alt ? alt : null, Stream::derive(cfg.seed, trial, tag + "/code")());
        Stream qme_rng = Stream::derive(cfg.seed, trial, tag + "/qme");
        Verdict v;
        if (cfg.regime == Regime::Large) {
            LargeConfig l = large;
            l.qme.noise = is_alt ? NoiseMode::towards(0.0) : NoiseMode{NoiseKind::AdversarialHigh};
            v = run_large(code, k, l, qme_rng);
        } else {
            v = classical_baseline(code, k, classical);
        }
        const bool correct = (v.decision == Decision::Accept) != is_alt;
        outcome[idx] = correct ? 1 : 0;
    });
    double null_ok = 0, alt_ok = 0;
    for (std::size_t i = 0; i < outcome.size(); ++i) (i < cfg.trials ? null_ok : alt_ok) += outcome[i];
    const auto t = static_cast<double>(cfg.trials);
    return {null_ok / t, alt_ok / t};
}

}  // namespace detail

/// Minimal budget meeting the target on both sides: doubling until success,
/// then bisection. Rows that fail at the cap are flagged unreached.
inline BenchRow bench_point(const BenchConfig& cfg, std::size_t k, double param) {
    BenchRow row;
    row.k = k;
    row.param = param;
    row.x = cfg.sweep_theta ? 1.0 / param : static_cast<double>(k);
    if (cfg.regime == Regime::Giant) {
        GiantConfig g = cfg.giant;
        g.theta = param;
        g.validate(k);
        row.budget = ceil_pow_two_thirds(giant_sample_size(k, g));
        row.null_rate = row.alt_rate = std::nan("");
        return row;
    }
    auto ok = [&](std::uint64_t n, detail::Rates& r) {
        r = detail::bench_rates(cfg, k, param, n);
        return r.null_rate >= cfg.target && r.alt_rate >= cfg.target;
    };
    detail::Rates rates{0, 0}, best{0, 0};
    std::uint64_t lo = 1, hi = 2;
    while (!ok(hi, rates)) {
        lo = hi;
        if (hi >= cfg.cap) {
            row.budget = cfg.cap;
            row.null_rate = rates.null_rate;
            row.alt_rate = rates.alt_rate;
            row.reached = false;
            return row;
        }
        hi = std::min(cfg.cap, 2 * hi);
    }
    best = rates;
    // Invariant: hi meets the target, lo does not (or is the trivial 1).
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ok(mid, rates)) {
            hi = mid;
            best = rates;
        } else {
            lo = mid;
        }
    }
    row.budget = hi;
    row.null_rate = best.null_rate;
    row.alt_rate = best.alt_rate;
    return row;
}

inline BenchResult bench_scaling(const BenchConfig& cfg) {
    cfg.validate();
    BenchResult res;
    const double fixed = cfg.regime == Regime::Classical ? cfg.epsilon
                         : cfg.regime == Regime::Giant   ? cfg.giant.theta
                                                         : cfg.theta;
    if (cfg.sweep_theta) {
        for (double t : cfg.theta_grid) res.rows.push_back(bench_point(cfg, cfg.k, t));
    } else {
        for (std::size_t k : cfg.k_grid) res.rows.push_back(bench_point(cfg, k, fixed));
    }
    std::vector<double> x, y;
    for (const auto& r : res.rows) {
        if (!r.reached) continue;
        x.push_back(r.x);
        y.push_back(static_cast<double>(r.budget));
    }
    if (x.size() >= 2) res.fit = fit_slope(x, y, cfg.bootstrap, cfg.seed);
    return res;
}

inline void write_bench_csv(std::ostream& out, const BenchConfig& cfg, const BenchResult& res) {
    out << "schema_version,regime,sweep,k,param,x,budget,null_rate,alt_rate,reached\n";
    for (const auto& r : res.rows) {
        out << kCsvSchemaVersion << ',' << to_string(cfg.regime) << ',' << (cfg.sweep_theta ? "theta" : "k") << ','
            << r.k << ',' << format_real(r.param) << ',' << format_real(r.x) << ',' << r.budget << ','
            << (std::isnan(r.null_rate) ? "" : format_real(r.null_rate)) << ','
            << (std::isnan(r.alt_rate) ? "" : format_real(r.alt_rate)) << ',' << (r.reached ? 1 : 0) << '\n';
    }
}

/// Log-log scatter of budget against x with the fitted line.
inline void write_bench_svg(std::ostream& out, const BenchConfig& cfg, const BenchResult& res) {
    const double width = 640, height = 420, left = 70, right = 30, top = 40, bottom = 50;
    std::vector<const BenchRow*> pts;
    for (const auto& r : res.rows) pts.push_back(&r);
    if (pts.empty()) return;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto* r : pts) {
        x0 = std::min(x0, std::log10(r->x));
        x1 = std::max(x1, std::log10(r->x));
        y0 = std::min(y0, std::log10(static_cast<double>(r->budget)));
        y1 = std::max(y1, std::log10(static_cast<double>(r->budget)));
    }
    if (x1 - x0 < 1e-9) x1 = x0 + 1;
    if (y1 - y0 < 1e-9) y1 = y0 + 1;
    const double pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;
    auto px = [&](double lx) { return left + (lx - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double ly) { return height - bottom - (ly - y0) / (y1 - y0) * (height - top - bottom); };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::string title = std::string(to_string(cfg.regime)) + ": budget vs " + (cfg.sweep_theta ? "1/theta" : "k");
    if (res.fit) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " (slope %.3f, 95%% [%.3f, %.3f])", res.fit->slope, res.fit->lo, res.fit->hi);
        title += buf;
    }
    out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << svg::escape(title) << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
        << height - bottom << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
        << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << (width / 2) << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">log10 "
        << (cfg.sweep_theta ? "1/theta" : "k") << "</text>\n";
    out << "<text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
        << ")\" text-anchor=\"middle\">log10 budget</text>\n";
    if (res.fit) {
        const double a = res.fit->intercept / std::log(10.0), b = res.fit->slope;
        out << "<line x1=\"" << svg::num(px(x0)) << "\" y1=\"" << svg::num(py(a + b * x0))
            << "\" x2=\"" << svg::num(px(x1)) << "\" y2=\"" << svg::num(py(a + b * x1))
            << "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const auto* r : pts) {
        out << "<circle cx=\"" << svg::num(px(std::log10(r->x))) << "\" cy=\""
            << svg::num(py(std::log10(static_cast<double>(r->budget)))) << "\" r=\"4\" fill=\""
            << (r->reached ? "#1f77b4" : "#999") << "\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace distcheck

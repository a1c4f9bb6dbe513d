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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Seeds are fixed so the output is reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "distcheck/bench.hpp"
#include "distcheck/harness.hpp"
#include "distcheck/lemmas.hpp"
#include "distcheck/reduce.hpp"

using namespace distcheck;

namespace {

constexpr std::uint64_t kSeed = 20260601;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

/// Rows of one instance in a result.
std::vector<const TrialReport*> rows_of(const ExperimentResult& res, const std::string& name) {
    std::vector<const TrialReport*> out;
    for (const auto& r : res.reports)
        if (r.instance == name) out.push_back(&r);
    return out;
}

double rate(const std::vector<const TrialReport*>& rows, Decision d) {
    std::size_t hits = 0;
    for (const auto* r : rows) hits += r->decision == d;
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

Outcome from_report(const LemmaReport& rep, const std::vector<std::string>& names) {
    Outcome o;
    for (const auto& c : rep.checks) {
        bool wanted = false;
        for (const auto& n : names) wanted |= c.name == n;
        if (!wanted) continue;
        o.pass &= c.passed;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += c.name + ": " + c.detail;
    }
    if (o.detail.empty()) o = {false, "no matching checks ran"};
    return o;
}

Outcome ac1() { return from_report(validate_lemmas("moments"), {"moments.exhaustive"}); }

Outcome ac2() {
    Outcome o = from_report(validate_lemmas("moments"), {"moments.uniform_all_distinct"});
    // Same case through the floating-point path the testers use.
    for (std::size_t k : {10u, 100u})
        for (std::uint64_t n : {2u, 5u}) {
            Counts c;
            c.n = n;
            for (std::uint64_t j = 0; j < n; ++j) c.X.emplace_back(j, 1);
            const auto m = exact_moments(Pmf::uniform(k), phase1_rv(c, k));
            const double want = std::sqrt(static_cast<double>(k) / static_cast<double>(n) - 1.0);
            if (std::abs(m.mu) > 1e-12 || std::abs(m.sigma - want) > 1e-12) {
                o.pass = false;
                o.detail += "; double path off at k=" + std::to_string(k) + " n=" + std::to_string(n);
            }
        }
    return o;
}

Outcome ac3() {
    Outcome o;
    double worst_subset = 0.0;
    for (auto [k, r] : {std::pair<std::size_t, std::size_t>{10, 2}, {100, 10}, {6, 3}}) {
        const double got = distance(make_instance(k, UniformSubset{r}), Pmf::uniform(k), Metric::ChiSq);
        worst_subset = std::max(worst_subset, std::abs(got - (static_cast<double>(k) / r - 1.0)));
    }
    if (worst_subset > 1e-12) o.pass = false;
    Stream rng = Stream::derive(kSeed, 0, "ac3");
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const std::size_t k = 2 + rng.below(50);
        const Pmf p = random_pmf(k, rng), q = random_pmf(k, rng);
        const double tv = distance(p, q, Metric::TV), h = distance(p, q, Metric::HellingerSq),
                     kl = distance(p, q, Metric::KL), chi = distance(p, q, Metric::ChiSq);
        worst = std::max({worst, tv * tv - h, h - kl, kl - chi});
    }
    if (worst > 1e-12) o.pass = false;
    o.detail = "subset chi^2 max err " + fmt("%.2e", worst_subset) + ", chain max violation " + fmt("%.2e", worst) +
               " over 10^4 pairs";
    return o;
}

Outcome ac4() {
    return from_report(validate_lemmas("hashing"), {"hashing.bounds", "hashing.rademacher_second_moment"});
}

Outcome ac5() { return from_report(validate_lemmas("collisions"), {"collisions.exhaustive"}); }

Outcome ac6() {
    const double theta = 0.2;
    ExperimentConfig cfg;
    cfg.regime = Regime::Large;
    cfg.k = 10000;
    cfg.theta = theta;
    cfg.trials = 200;
    cfg.seed = kSeed;
    const double eps_close = std::sqrt(0.9 * 0.99 * theta) / 2.0;
    const InstanceEntry u{Uniform{}, Uniform{}, NoiseMode{NoiseKind::AdversarialHigh}};
    const InstanceEntry close{PerturbedUniform{eps_close}, Uniform{}, NoiseMode{NoiseKind::AdversarialHigh}};
    const InstanceEntry far{UniformSubset{5000}, Uniform{}, NoiseMode::towards(0.0)};
    const InstanceEntry spike{HeavySpike{0.9}, Uniform{}, NoiseMode::towards(0.0)};
    cfg.instances = {u, close, far, spike};
    const auto res = run_trials(cfg);

    const double a_u = rate(rows_of(res, u.name()), Decision::Accept);
    const double a_close = rate(rows_of(res, close.name()), Decision::Accept);
    const double r_far = rate(rows_of(res, far.name()), Decision::Reject);
    std::size_t l_hits = 0;
    const auto spike_rows = rows_of(res, spike.name());
    for (const auto* r : spike_rows) l_hits += r->decision == Decision::Reject && r->reason == Reason::LInfCheck;
    const double r_spike = static_cast<double>(l_hits) / static_cast<double>(spike_rows.size());

    Outcome o;
    o.pass = a_u >= 0.9 && a_close >= 0.9 && r_far >= 0.9 && r_spike >= 0.99;
    o.detail = "accept U " + fmt("%.3f", a_u) + ", accept chi^2=.891theta " + fmt("%.3f", a_close) +
               ", reject subset(k/2) " + fmt("%.3f", r_far) + ", spike L-check " + fmt("%.3f", r_spike);
    return o;
}

Outcome ac7() {
    const std::size_t k = 1000;
    const double tau = 0.02;
    const double eps = tau * std::sqrt(static_cast<double>(k)) / 2.0;  // ||PU(eps) - U||_2 = 2 eps / sqrt(k)
    ExperimentConfig cfg;
    cfg.command = Command::ClosenessL2;
    cfg.k = k;
    cfg.tau = tau;
    cfg.trials = 100;
    cfg.seed = kSeed;
    cfg.noise = {NoiseKind::UniformInBand};
    const InstanceEntry same{.spec = PerturbedUniform{eps}, .against = PerturbedUniform{eps}, .noise = std::nullopt};
    const InstanceEntry far{.spec = PerturbedUniform{eps}, .against = Uniform{}, .noise = std::nullopt};
    cfg.instances = {same, far};
    const auto res = run_trials(cfg);
    const double l2 = distance(make_instance(k, PerturbedUniform{eps}), Pmf::uniform(k), Metric::L2);
    const double a_same = rate(rows_of(res, same.name()), Decision::Accept);
    const double r_far = rate(rows_of(res, far.name()), Decision::Reject);

    // Sample-based backend at k = 100: point masses (l2 = sqrt 2) against
    // identical uniform codes.
    SmallConfig mom;
    mom.tau = 1.4;
    mom.T = 40;
    mom.backend = QmeBackend::ClassicalMoM;
    const int mom_trials = 20;
    int mom_accept = 0, mom_reject = 0;
    for (int t = 0; t < mom_trials; ++t) {
        Stream rng = Stream::derive(kSeed, t, "ac7/mom");
        SourceCode a = code_from_pmf(Pmf::uniform(100), rng()), b = code_from_pmf(Pmf::uniform(100), rng());
        mom_accept += run_small(a, b, 100, mom, rng).decision == Decision::Accept;
        SourceCode c = code_from_pmf(Pmf::point_mass(100, 0), rng()), d = code_from_pmf(Pmf::point_mass(100, 1), rng());
        mom_reject += run_small(c, d, 100, mom, rng).decision == Decision::Reject;
    }
    const double ma = mom_accept / double(mom_trials), mr = mom_reject / double(mom_trials);

    Outcome o;
    o.pass = a_same >= 2.0 / 3.0 && r_far >= 2.0 / 3.0 && ma >= 2.0 / 3.0 && mr >= 2.0 / 3.0 &&
             std::abs(l2 - tau) < 1e-12;
    o.detail = "ideal: accept p=q " + fmt("%.3f", a_same) + ", reject ||p-q||=tau " + fmt("%.3f", r_far) +
               "; mom k=100: accept " + fmt("%.2f", ma) + ", reject " + fmt("%.2f", mr);
    return o;
}

Outcome ac8() {
    ExperimentConfig cfg;
    cfg.regime = Regime::Giant;
    cfg.k = 1000000;
    cfg.theta = 5e4;
    cfg.giant.a_coef = 80.0;
    cfg.trials = 200;
    cfg.seed = kSeed;
    cfg.instances = {parse_instance_entry("uniform"), parse_instance_entry("rto1:62500")};
    const auto res = run_trials(cfg);
    const double a_u = rate(rows_of(res, "uniform"), Decision::Accept);
    const double r_r = rate(rows_of(res, "rto1:62500"), Decision::Reject);
    bool cost_ok = true;
    const std::uint64_t N = giant_sample_size(cfg.k, GiantConfig{5e4, 80.0});
    for (const auto& r : res.reports)
        cost_ok &= r.modeled_quantum_queries && *r.modeled_quantum_queries == ceil_pow_two_thirds(N) &&
                   r.code_uses == N;
    Outcome o;
    o.pass = a_u >= 0.9 && r_r >= 0.99 && cost_ok;
    o.detail = "N = " + std::to_string(N) + ", accept U " + fmt("%.3f", a_u) + ", reject r-to-1 " + fmt("%.3f", r_r) +
               ", modeled cost " + std::to_string(ceil_pow_two_thirds(N)) + (cost_ok ? " on every row" : " MISMATCH");
    return o;
}

Outcome ac9() { return from_report(validate_lemmas("reduction"), {"reduction.random_pairs"}); }

Outcome ac10() {
    auto run = [](Regime regime, bool sweep_theta) {
        BenchConfig b;
        b.regime = regime;
        b.sweep_theta = sweep_theta;
        b.trials = 200;
        b.seed = kSeed;
        return bench_scaling(b);
    };
    struct Want {
        const char* what;
        double centre, tol;
        BenchResult res;
    };
    std::vector<Want> fits{{"large n~k", 0.33, 0.15, run(Regime::Large, false)},
                           {"large n~1/theta", 0.67, 0.20, run(Regime::Large, true)},
                           {"classical n~k", 0.5, 0.15, run(Regime::Classical, false)}};
    Outcome o;
    for (const auto& w : fits) {
        bool reached = true;
        for (const auto& r : w.res.rows) reached &= r.reached;
        const bool ok = reached && w.res.fit && std::abs(w.res.fit->slope - w.centre) <= w.tol;
        o.pass &= ok;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += std::string(w.what) + " " + (w.res.fit ? fmt("%.3f", w.res.fit->slope) : std::string("n/a")) +
                    (w.res.fit ? " [" + fmt("%.3f", w.res.fit->lo) + ", " + fmt("%.3f", w.res.fit->hi) + "]" : "") +
                    (reached ? "" : " (cap hit)");
    }
    return o;
}

Outcome ac11() {
    std::vector<ExperimentConfig> cfgs;
    {
        ExperimentConfig c;
        c.regime = Regime::Large;
        c.k = 2000;
        c.theta = 0.3;
        c.instances = {parse_instance_entry("uniform"), parse_instance_entry("spike:0.9"),
                       parse_instance_entry("perturbed:0.2@adv-to:0")};
        cfgs.push_back(c);
        // Sample-based estimates cost n^2 draws each; small constants keep
        // this accounting run short.
        c.backend = QmeBackend::ClassicalMoM;
        c.k = 500;
        c.large.c_const = 2.0;
        c.large.C_const = 1.0;
        c.trials = 10;
        cfgs.push_back(c);
    }
    {
        ExperimentConfig c;
        c.regime = Regime::Giant;
        c.k = 1000000;
        c.theta = 100;
        c.instances = {parse_instance_entry("uniform"), parse_instance_entry("rto1:100")};
        cfgs.push_back(c);
    }
    {
        ExperimentConfig c;
        c.regime = Regime::Classical;
        c.k = 1000;
        c.instances = {parse_instance_entry("uniform"), parse_instance_entry("perturbed:0.25")};
        cfgs.push_back(c);
    }
    {
        ExperimentConfig c;
        c.command = Command::ClosenessL2;
        c.k = 100;
        c.tau = 0.05;
        c.small.T = 200;
        c.trials = 20;
        c.instances = {parse_instance_entry("uniform~perturbed:0.25")};
        cfgs.push_back(c);
    }
    for (double eps : {0.6, 0.1}) {  // large and small branches at k = 100
        ExperimentConfig c;
        c.command = Command::Identity;
        c.k = 100;
        c.epsilon = eps;
        c.small.T = 100;
        c.trials = 20;
        c.instances = {parse_instance_entry("uniform"), parse_instance_entry("subset:50")};
        cfgs.push_back(c);
    }

    Outcome o;
    std::size_t rows = 0;
    for (auto& c : cfgs) {
        c.seed = kSeed;
        if (c.trials == 100) c.trials = 30;
        std::ostringstream a, b;
        const auto r1 = run_trials(c);
        write_csv(a, c, r1);
        c.jobs = 3;
        write_csv(b, c, run_trials(c));
        if (a.str() != b.str()) {
            o.pass = false;
            o.detail += "CSV differs for " + c.regime_name() + "; ";
        }
        for (const auto& r : r1.reports) {
            ++rows;
            if (r.code_uses != r.budget) {
                o.pass = false;
                o.detail += "code_uses != budget in " + c.regime_name() + "/" + r.instance + "; ";
                break;
            }
        }
    }
    o.detail += std::to_string(cfgs.size()) + " configs, " + std::to_string(rows) +
                " trials; CSVs byte-identical across reruns and jobs, code_uses = declared cost on every trial";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments select criteria by id, e.g. `acceptance AC6 AC8`.
    const std::vector<std::string> only(argv + 1, argv + argc);
    struct Criterion {
        const char* id;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {"AC1", 30, ac1},  {"AC2", 30, ac2},   {"AC3", 10, ac3},   {"AC4", 60, ac4},
        {"AC5", 30, ac5},  {"AC6", 300, ac6},  {"AC7", 600, ac7},  {"AC8", 120, ac8},
        {"AC9", 60, ac9},  {"AC10", 1800, ac10}, {"AC11", 600, ac11},
    };
    int failures = 0, ran = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            o.pass = false;
            o.detail += " (over the " + fmt("%.0f", c.budget_seconds) + " s budget)";
        }
        failures += !o.pass;
        std::printf("%-4s %s  %s  [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}

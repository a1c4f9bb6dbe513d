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

// Command-line front end. Precedence: built-in defaults, then --config, then
// explicit flags. Exit codes: 0 success, 1 suite failure, 2 config error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distcheck/bench.hpp"
#include "distcheck/harness.hpp"
#include "distcheck/lemmas.hpp"

namespace {

using namespace distcheck;

struct CommonFlags {
    std::optional<std::size_t> k;
    std::optional<double> epsilon, gamma, tau, theta;
    std::optional<long long> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend, noise, config, out, plot, string_oracle, reference;
    std::optional<unsigned> jobs;
    std::vector<std::string> instances;
    bool timing = false;
    // tester overrides
    std::optional<double> c_const, C_const, a_coef, sample_constant;
    std::optional<std::uint64_t> T, n_override, m_override;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--k", f.k, "domain size");
    app->add_option("--trials", f.trials, "trials per instance");
    app->add_option("--seed", f.seed, "master seed (falls back to $DISTCHECK_SEED)");
    app->add_option("--qme-backend", f.backend, "ideal | mom");
    app->add_option("--qme-noise", f.noise, "zero | uniform | adv-high | adv-low | adv-to:<x>");
    app->add_option("--jobs", f.jobs, "worker threads");
    app->add_option("--config", f.config, "JSON config file");
    app->add_option("--out", f.out, "CSV output path");
    app->add_option("--plot", f.plot, "SVG output path");
    app->add_option("--instance", f.instances, "instance spec, e.g. perturbed:0.1@adv-high (repeatable)");
    app->add_option("--string-oracle", f.string_oracle, "string oracle file ('k m' then m symbols)");
    app->add_flag("--timing", f.timing, "add a wall_time column to the CSV");
}

std::uint64_t seed_from_env() {
    const char* env = std::getenv("DISTCHECK_SEED");
    if (!env || !*env) return 0;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("DISTCHECK_SEED is not an integer: ") + env);
    }
}

ExperimentConfig build_config(Command command, const std::optional<std::string>& regime, const CommonFlags& f) {
    ExperimentConfig cfg;
    cfg.command = command;
    cfg.seed = seed_from_env();
    if (f.config) load_config_file(cfg, *f.config);
    cfg.command = command;
    if (regime) cfg.regime = parse_regime(*regime);
    if (f.k) cfg.k = *f.k;
    if (f.epsilon) cfg.epsilon = f.epsilon;
    if (f.gamma) cfg.gamma = f.gamma;
    if (f.tau) cfg.tau = f.tau;
    if (f.theta) cfg.theta = f.theta;
    if (f.trials) cfg.trials = *f.trials;
    if (f.seed) cfg.seed = *f.seed;
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.backend) cfg.backend = parse_backend(*f.backend);
    if (f.noise) cfg.noise = parse_noise(*f.noise);
    if (f.reference) cfg.reference_path = f.reference;
    if (f.string_oracle) cfg.string_oracle_path = f.string_oracle;
    if (!f.instances.empty()) {
        cfg.instances.clear();
        for (const auto& s : f.instances) cfg.instances.push_back(parse_instance_entry(s));
    }
    if (f.c_const) cfg.large.c_const = *f.c_const;
    if (f.C_const) cfg.large.C_const = *f.C_const;
    if (f.n_override) cfg.large.n_override = f.n_override;
    if (f.T) cfg.small.T = *f.T;
    if (f.a_coef) cfg.giant.a_coef = *f.a_coef;
    if (f.sample_constant) cfg.classical.sample_constant = *f.sample_constant;
    if (f.m_override) cfg.classical.m_override = f.m_override;
    cfg.timing = f.timing;
    return cfg;
}

void write_file(const std::string& path, const std::string& what, auto&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + what + " to " + path);
    writer(out);
}

int run_experiment(ExperimentConfig cfg, const CommonFlags& f) {
    cfg.resolve();
    const ExperimentResult res = run_trials(cfg);
    write_summary(std::cout, res);
    if (f.out) write_file(*f.out, "csv", [&](std::ostream& o) { write_csv(o, cfg, res, cfg.timing); });
    if (f.plot) {
        const std::string title = std::string(to_string(cfg.command)) + " (" + cfg.regime_name() + "), k = " +
                                  std::to_string(cfg.k) + ": accept rate";
        write_file(*f.plot, "svg", [&](std::ostream& o) { write_rate_svg(o, res, title); });
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distcheck: uniformity, identity and closeness testers with a simulated mean-estimation oracle"};
    app.require_subcommand(1);

    CommonFlags uni, ident, close;
    std::optional<std::string> regime;

    auto* u = app.add_subcommand("test-uniformity", "uniformity testers");
    add_common(u, uni);
    u->add_option("--regime", regime, "large | small | giant | classical")->required();
    u->add_option("--epsilon", uni.epsilon, "TV distance (classical)");
    u->add_option("--gamma", uni.gamma, "threshold (large)");
    u->add_option("--theta", uni.theta, "threshold (large, giant)");
    u->add_option("--tau", uni.tau, "l2 threshold (small)");
    u->add_option("--c-const", uni.c_const, "large regime sample constant");
    u->add_option("--C-const", uni.C_const, "large regime mean-estimation constant");
    u->add_option("--n", uni.n_override, "fixed Phase-1 sample size (large)");
    u->add_option("--rounds", uni.T, "hashing rounds (small)");
    u->add_option("--a-coef", uni.a_coef, "giant regime sample coefficient");
    u->add_option("--sample-constant", uni.sample_constant, "classical sample constant");
    u->add_option("--m", uni.m_override, "fixed sample size (classical)");

    auto* id = app.add_subcommand("test-identity", "identity tester via reduction to uniformity");
    add_common(id, ident);
    id->add_option("--epsilon", ident.epsilon, "TV distance")->required();
    id->add_option("--reference", ident.reference, "reference pmf as a JSON array (default uniform)");
    id->add_option("--c-const", ident.c_const, "large regime sample constant");
    id->add_option("--rounds", ident.T, "hashing rounds");

    auto* cl = app.add_subcommand("test-closeness-l2", "l2 closeness tester (instances as p~q)");
    add_common(cl, close);
    cl->add_option("--tau", close.tau, "l2 threshold")->required();
    cl->add_option("--rounds", close.T, "hashing rounds");

    std::string suite = "all";
    auto* vl = app.add_subcommand("validate-lemmas", "exhaustive checks of the estimator identities and bounds");
    vl->add_option("--suite", suite, "moments | hashing | collisions | reduction | all");

    BenchConfig bench;
    std::string bench_regime = "large", sweep = "k";
    std::optional<std::string> bench_out, bench_plot;
    std::optional<std::uint64_t> bench_seed;
    auto* bs = app.add_subcommand("bench-scaling", "minimal sample budget per grid point and log-log slope");
    bs->add_option("--regime", bench_regime, "large | classical | giant");
    bs->add_option("--sweep", sweep, "k | theta");
    bs->add_option("--k-grid", bench.k_grid, "domain sizes for the k sweep");
    bs->add_option("--theta-grid", bench.theta_grid, "thresholds for the theta sweep");
    bs->add_option("--k", bench.k, "fixed k for the theta sweep");
    std::optional<double> bench_theta;
    bs->add_option("--theta", bench_theta, "fixed threshold for the k sweep");
    bs->add_option("--epsilon", bench.epsilon, "TV distance (classical)");
    bs->add_option("--target", bench.target, "required success rate on both sides");
    bs->add_option("--trials", bench.trials, "trials per side per budget");
    bs->add_option("--seed", bench_seed, "master seed (falls back to $DISTCHECK_SEED)");
    bs->add_option("--jobs", bench.jobs, "worker threads");
    bs->add_option("--cap", bench.cap, "largest budget tried");
    bs->add_option("--bootstrap", bench.bootstrap, "bootstrap resamples for the slope interval");
    bs->add_option("--out", bench_out, "CSV output path");
    bs->add_option("--plot", bench_plot, "SVG output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (u->parsed()) return run_experiment(build_config(Command::Uniformity, regime, uni), uni);
        if (id->parsed()) return run_experiment(build_config(Command::Identity, std::nullopt, ident), ident);
        if (cl->parsed()) return run_experiment(build_config(Command::ClosenessL2, std::nullopt, close), close);
        if (vl->parsed()) {
            const LemmaReport report = validate_lemmas(suite);
            for (const auto& c : report.checks)
                std::printf("%s %-40s %8.3fs  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.seconds,
                            c.detail.c_str());
            return report.passed() ? 0 : 1;
        }
        if (bs->parsed()) {
            bench.regime = parse_regime(bench_regime);
            if (sweep != "k" && sweep != "theta") throw std::invalid_argument("--sweep must be k or theta");
            bench.sweep_theta = sweep == "theta";
            if (bench_theta) (bench.regime == Regime::Giant ? bench.giant.theta : bench.theta) = *bench_theta;
            bench.seed = bench_seed ? *bench_seed : seed_from_env();
            const BenchResult res = bench_scaling(bench);
            for (const auto& r : res.rows)
                std::printf("k=%zu param=%g budget=%llu null=%.3f alt=%.3f%s\n", r.k, r.param,
                            static_cast<unsigned long long>(r.budget), r.null_rate, r.alt_rate,
                            r.reached ? "" : "  [cap reached, excluded]");
            if (res.fit)
                std::printf("slope=%.4f bootstrap95=[%.4f, %.4f] points=%zu\n", res.fit->slope, res.fit->lo,
                            res.fit->hi, res.fit->points);
            else
                std::printf("slope=unavailable (fewer than two rows reached the target)\n");
            if (bench_out) write_file(*bench_out, "csv", [&](std::ostream& o) { write_bench_csv(o, bench, res); });
            if (bench_plot) write_file(*bench_plot, "svg", [&](std::ostream& o) { write_bench_svg(o, bench, res); });
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "distcheck: config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "distcheck: error: %s\n", e.what());
        return 2;
    }
    return 2;
}

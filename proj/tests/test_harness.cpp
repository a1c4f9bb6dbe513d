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

#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "distcheck/harness.hpp"

using namespace distcheck;

namespace {

ExperimentConfig small_large_experiment() {
    ExperimentConfig cfg;
    cfg.regime = Regime::Large;
    cfg.k = 1000;
    cfg.theta = 0.5;
    cfg.trials = 20;
    cfg.seed = 17;
    cfg.instances = {parse_instance_entry("uniform"), parse_instance_entry("subset:500@adv-to:0"),
                     parse_instance_entry("spike:0.9")};
    return cfg;
}

std::string csv_of(const ExperimentConfig& cfg, const ExperimentResult& res) {
    std::ostringstream os;
    write_csv(os, cfg, res);
    return os.str();
}

}  // namespace

TEST(Wilson, ReferenceValues) {
    const auto a = wilson_interval(100, 100);
    EXPECT_NEAR(a.lo, 0.9630065017930143, 1e-12);
    EXPECT_EQ(a.hi, 1.0);
    const auto b = wilson_interval(50, 100);
    EXPECT_NEAR(b.lo, 0.4038315303659956, 1e-12);
    EXPECT_NEAR(b.hi, 0.5961684696340044, 1e-12);
    const auto c = wilson_interval(0, 10);
    EXPECT_EQ(c.lo, 0.0);
    EXPECT_NEAR(c.hi, 0.27753279986288926, 1e-12);
    const auto d = wilson_interval(7, 40);
    EXPECT_NEAR(d.lo, 0.0874541374603592, 1e-12);
    EXPECT_NEAR(d.hi, 0.3194999033178772, 1e-12);
    EXPECT_THROW(wilson_interval(0, 0), std::invalid_argument);
}

TEST(InstanceEntry, ParsesPartnerAndNoise) {
    const InstanceEntry e = parse_instance_entry("perturbed:0.1~uniform@adv-high");
    EXPECT_EQ(label(e.spec), "perturbed:0.1");
    EXPECT_EQ(label(e.against), "uniform");
    ASSERT_TRUE(e.noise.has_value());
    EXPECT_EQ(e.noise->kind, NoiseKind::AdversarialHigh);
    EXPECT_EQ(parse_instance_entry("subset:4").name(), "subset:4");
    EXPECT_THROW(parse_instance_entry("subset:4@loud"), std::invalid_argument);
}

TEST(Experiment, ZeroTrialsIsAConfigError) {
    ExperimentConfig cfg = small_large_experiment();
    cfg.trials = 0;
    EXPECT_THROW(run_trials(cfg), std::invalid_argument);
}

TEST(Experiment, BadParametersAreConfigErrors) {
    ExperimentConfig cfg = small_large_experiment();
    cfg.theta = 1e-6;
    EXPECT_THROW(run_trials(cfg), std::invalid_argument);
    cfg = small_large_experiment();
    cfg.command = Command::Identity;
    EXPECT_THROW(run_trials(cfg), std::invalid_argument);
    cfg = small_large_experiment();
    cfg.instances = {parse_instance_entry("rto1:7")};
    EXPECT_THROW(run_trials(cfg), std::invalid_argument);
}

TEST(Experiment, SameConfigGivesByteIdenticalCsv) {
    const ExperimentConfig cfg = small_large_experiment();
    const std::string a = csv_of(cfg, run_trials(cfg));
    const std::string b = csv_of(cfg, run_trials(cfg));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "schema_version,command,regime,instance,trial,decision,reason,mu_hat,code_uses,budget,max_count,"
              "modeled_quantum_queries");
}

TEST(Experiment, OutputDoesNotDependOnJobs) {
    ExperimentConfig cfg = small_large_experiment();
    const std::string one = csv_of(cfg, run_trials(cfg));
    cfg.jobs = 4;
    EXPECT_EQ(csv_of(cfg, run_trials(cfg)), one);
}

TEST(Experiment, SeedChangesTheDraws) {
    ExperimentConfig cfg = small_large_experiment();
    const std::string a = csv_of(cfg, run_trials(cfg));
    cfg.seed = 18;
    EXPECT_NE(csv_of(cfg, run_trials(cfg)), a);
}

TEST(Experiment, SummariesMatchTheRows) {
    const ExperimentConfig cfg = small_large_experiment();
    const ExperimentResult res = run_trials(cfg);
    ASSERT_EQ(res.summaries.size(), 3u);
    ASSERT_EQ(res.reports.size(), 60u);
    for (std::size_t i = 0; i < 3; ++i) {
        std::uint64_t accepts = 0;
        for (std::size_t t = 0; t < 20; ++t) {
            const auto& r = res.reports[i * 20 + t];
            EXPECT_EQ(r.instance, res.summaries[i].instance);
            EXPECT_EQ(r.trial_index, t);
            accepts += r.decision == Decision::Accept;
        }
        EXPECT_EQ(res.summaries[i].accepts, accepts);
        EXPECT_DOUBLE_EQ(res.summaries[i].accept_rate, accepts / 20.0);
    }
    EXPECT_EQ(res.summaries[0].accept_rate, 1.0);
    EXPECT_EQ(res.summaries[1].accept_rate, 0.0);
    EXPECT_EQ(res.summaries[2].accept_rate, 0.0);
}

TEST(Experiment, CodeUsesEqualTheDeclaredBudget) {
    for (Regime regime : {Regime::Large, Regime::Giant, Regime::Classical}) {
        ExperimentConfig cfg = small_large_experiment();
        cfg.regime = regime;
        cfg.theta = regime == Regime::Giant ? 2.0 : 0.5;
        cfg.k = regime == Regime::Giant ? 100000 : 1000;
        for (const auto& r : run_trials(cfg).reports) EXPECT_EQ(r.code_uses, r.budget) << to_string(regime);
    }
    ExperimentConfig small;
    small.regime = Regime::Small;
    small.k = 50;
    small.tau = 0.2;
    small.small.T = 50;
    small.trials = 3;
    small.instances = {parse_instance_entry("uniform~perturbed:0.2")};
    for (const auto& r : run_trials(small).reports) EXPECT_EQ(r.code_uses, r.budget);

    ExperimentConfig id;
    id.command = Command::Identity;
    id.k = 100;
    id.epsilon = 0.5;
    id.trials = 3;
    for (const auto& r : run_trials(id).reports) EXPECT_EQ(r.code_uses, r.budget);
}

TEST(Experiment, StringOracleIsTested) {
    const std::string path = ::testing::TempDir() + "/rto1.txt";
    {
        std::ofstream out(path);
        write_string_oracle(out, rto1_string(100000, 50000));
    }
    ExperimentConfig cfg;
    cfg.regime = Regime::Giant;
    cfg.k = 100000;
    cfg.theta = 1.0;
    cfg.trials = 5;
    cfg.string_oracle_path = path;
    const auto res = run_trials(cfg);
    ASSERT_EQ(res.summaries.size(), 1u);
    EXPECT_EQ(res.summaries[0].accept_rate, 0.0);
}

TEST(Config, JsonFillsFieldsAndFlagsWin) {
    ExperimentConfig cfg;
    apply_json(cfg, nlohmann::json::parse(R"({
        "command": "test-uniformity", "regime": "giant", "k": 5000, "theta": 3.0, "trials": 7,
        "seed": 9, "qme_noise": "adv-high", "instances": ["uniform", {"spec": "spike:0.5", "noise": "adv-low"}],
        "giant": {"a_coef": 40}, "large": {"c_const": 16, "n": 123}
    })"));
    EXPECT_EQ(cfg.regime, Regime::Giant);
    EXPECT_EQ(cfg.k, 5000u);
    EXPECT_EQ(cfg.trials, 7);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.noise.kind, NoiseKind::AdversarialHigh);
    ASSERT_EQ(cfg.instances.size(), 2u);
    EXPECT_EQ(cfg.instances[1].noise->kind, NoiseKind::AdversarialLow);
    EXPECT_EQ(cfg.giant.a_coef, 40.0);
    EXPECT_EQ(cfg.large.c_const, 16.0);
    EXPECT_EQ(*cfg.large.n_override, 123u);
    // A later layer (the command line) overrides the file.
    cfg.trials = 2;
    cfg.resolve();
    EXPECT_EQ(cfg.trials, 2);
    EXPECT_EQ(cfg.giant.theta, 3.0);
}

TEST(Config, MalformedJsonIsAConfigError) {
    ExperimentConfig cfg;
    EXPECT_THROW(apply_json(cfg, nlohmann::json::parse(R"({"k": "many"})")), std::invalid_argument);
    EXPECT_THROW(apply_json(cfg, nlohmann::json::parse(R"([1, 2])")), std::invalid_argument);
    EXPECT_THROW(apply_json(cfg, nlohmann::json::parse(R"({"regime": "huge"})")), std::invalid_argument);
    EXPECT_THROW(load_config_file(cfg, "/nonexistent/config.json"), std::invalid_argument);
}

TEST(PmfJson, RoundTrip) {
    const Pmf p({0.1, 0.2, 0.3, 0.4});
    std::stringstream io;
    write_pmf_json(io, p);
    const Pmf back = pmf_from_json(nlohmann::json::parse(io.str()));
    EXPECT_EQ(back, p);
    EXPECT_EQ(pmf_from_json(nlohmann::json::parse(R"({"probs": [0.5, 0.5]})")), Pmf::uniform(2));
    EXPECT_THROW(pmf_from_json(nlohmann::json::parse(R"({"probs": 3})")), std::invalid_argument);
}

TEST(Svg, EscapesLabels) {
    EXPECT_EQ(svg::escape("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;");
    ExperimentResult res;
    res.summaries.push_back({"x<y", 10, 5, 0.5, wilson_interval(5, 10), 1.0});
    std::ostringstream os;
    write_rate_svg(os, res, "rates");
    EXPECT_NE(os.str().find("x&lt;y"), std::string::npos);
    EXPECT_EQ(os.str().rfind("</svg>\n"), os.str().size() - 7);
}

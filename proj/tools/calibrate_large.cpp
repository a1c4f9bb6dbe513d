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

// Sweeps the large-regime sample constant c and reports, for each c, the
// worst per-instance success rate over k in {1e3, 1e4} and theta in
// {0.1, 0.5}. Close instances run under AdversarialHigh noise, far ones
// under AdversarialTowards(0).
//
//   calibrate_large [trials] [jobs] [c ...]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "distcheck/bench.hpp"
#include "distcheck/harness.hpp"

int main(int argc, char** argv) {
    using namespace distcheck;
    const long long trials = argc > 1 ? std::atoll(argv[1]) : 1000;
    const unsigned jobs = argc > 2 ? static_cast<unsigned>(std::atoi(argv[2])) : 4;
    std::vector<double> cs;
    for (int i = 3; i < argc; ++i) cs.push_back(std::atof(argv[i]));
    if (cs.empty()) cs = {8, 16, 32, 48, 64, 96, 128, 160};

    std::printf("%6s %7s %5s %6s %8s %8s %8s %8s %8s\n", "c", "k", "theta", "n", "U", "pert_in", "subset",
                "pert_far", "spike");
    for (double c : cs) {
        double worst = 1.0;
        for (std::size_t k : {1000u, 10000u}) {
            for (double theta : {0.1, 0.5}) {
                ExperimentConfig cfg;
                cfg.k = k;
                cfg.regime = Regime::Large;
                cfg.gamma = theta;
                cfg.large.c_const = c;
                cfg.trials = trials;
                cfg.jobs = jobs;
                cfg.seed = 7;
                const double eps_in = std::sqrt(0.9 * 0.99 * theta) / 2.0;
                const double eps_far = perturbed_eps_for_hellinger(theta);
                const NoiseMode high{NoiseKind::AdversarialHigh};
                const NoiseMode low = NoiseMode::towards(0.0);
                cfg.instances = {{Uniform{}, Uniform{}, high},
                                 {PerturbedUniform{eps_in}, Uniform{}, high},
                                 {UniformSubset{k / 2}, Uniform{}, low},
                                 {PerturbedUniform{eps_far}, Uniform{}, low},
                                 {HeavySpike{0.9}, Uniform{}, low}};
                const auto res = run_trials(cfg);
                std::vector<double> ok;
                for (std::size_t i = 0; i < res.summaries.size(); ++i) {
                    const double a = res.summaries[i].accept_rate;
                    ok.push_back(i < 2 ? a : 1.0 - a);
                }
                for (double v : ok) worst = std::min(worst, v);
                std::printf("%6g %7zu %5g %6llu %8.4f %8.4f %8.4f %8.4f %8.4f\n", c, k, theta,
                            static_cast<unsigned long long>(large_sample_size(k, theta, c)), ok[0], ok[1], ok[2],
                            ok[3], ok[4]);
            }
        }
        std::printf("c=%g worst=%.4f%s\n", c, worst, worst >= 0.99 ? "  meets 0.99" : "");
    }
    return 0;
}

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

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "distcheck/dist.hpp"
#include "support/oracles.hpp"

using namespace distcheck;

namespace {

std::vector<double> as_vec(const Pmf& p) { return {p.probs().begin(), p.probs().end()}; }

}  // namespace

TEST(Pmf, RejectsInvalidInput) {
    EXPECT_THROW(Pmf(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(Pmf({0.5, -0.1, 0.6}), std::invalid_argument);
    EXPECT_THROW(Pmf({0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(Pmf({std::nan(""), 1.0}), std::invalid_argument);
    EXPECT_THROW(Pmf::uniform(0), std::invalid_argument);
}

TEST(Pmf, SumsToOneAfterConstruction) {
    Pmf p({0.1, 0.2, 0.3, 0.4 + 1e-10});
    long double s = 0;
    for (double x : p.probs()) s += x;
    EXPECT_NEAR(static_cast<double>(s), 1.0, 1e-12);
}

TEST(Pmf, QuantileInvertsCdf) {
    Pmf p({0.25, 0.0, 0.75});
    EXPECT_EQ(p.quantile(0.0), 0u);
    EXPECT_EQ(p.quantile(0.2499), 0u);
    EXPECT_EQ(p.quantile(0.25), 2u);
    EXPECT_EQ(p.quantile(0.9999999), 2u);
}

TEST(Distance, IdenticalPmfsAreAtZero) {
    const Pmf u = Pmf::uniform(7);
    for (auto m : {Metric::TV, Metric::HellingerSq, Metric::KL, Metric::ChiSq, Metric::L2})
        EXPECT_EQ(distance(u, u, m), 0.0) << to_string(m);
}

TEST(Distance, SubsetChiSquare) {
    EXPECT_NEAR(distance(make_instance(8, UniformSubset{2}), Pmf::uniform(8), Metric::ChiSq), 3.0, 1e-12);
}

TEST(Distance, TwoPointExample) {
    const Pmf p({0.75, 0.25});
    const Pmf u = Pmf::uniform(2);
    EXPECT_NEAR(distance(p, u, Metric::TV), 0.25, 1e-15);
    EXPECT_NEAR(distance(p, u, Metric::HellingerSq), 0.06815, 5e-6);
    EXPECT_NEAR(distance(p, u, Metric::HellingerSq), static_cast<double>(oracle::hellinger_sq(as_vec(p), as_vec(u))),
                1e-15);
}

TEST(Distance, InfinityConventions) {
    const Pmf a({0.5, 0.5, 0.0});
    const Pmf b({0.0, 0.5, 0.5});
    EXPECT_EQ(distance(a, b, Metric::KL), std::numeric_limits<double>::infinity());
    EXPECT_EQ(distance(a, b, Metric::ChiSq), std::numeric_limits<double>::infinity());
    const Pmf c({0.5, 0.5, 0.0});
    EXPECT_EQ(distance(a, c, Metric::ChiSq), 0.0);
    EXPECT_EQ(distance(a, c, Metric::KL), 0.0);
}

TEST(Distance, MatchesReferenceFormulasOnRandomPairs) {
    Stream rng(77);
    for (int t = 0; t < 500; ++t) {
        const std::size_t k = 2 + rng.below(30);
        const Pmf p = random_pmf(k, rng), q = random_pmf(k, rng);
        const auto pv = as_vec(p), qv = as_vec(q);
        EXPECT_NEAR(distance(p, q, Metric::TV), static_cast<double>(oracle::tv(pv, qv)), 1e-13);
        EXPECT_NEAR(distance(p, q, Metric::HellingerSq), static_cast<double>(oracle::hellinger_sq(pv, qv)), 1e-13);
        EXPECT_NEAR(distance(p, q, Metric::KL), static_cast<double>(oracle::kl(pv, qv)), 1e-11);
        const double chi = static_cast<double>(oracle::chi_sq(pv, qv));
        EXPECT_NEAR(distance(p, q, Metric::ChiSq), chi, 1e-11 * std::max(1.0, chi));
        EXPECT_NEAR(distance(p, q, Metric::L2), static_cast<double>(oracle::l2(pv, qv)), 1e-13);
    }
}

TEST(Distance, InequalityChainOnRandomPairs) {
    Stream rng(78);
    for (int t = 0; t < 10000; ++t) {
        const std::size_t k = 2 + rng.below(20);
        const Pmf p = random_pmf(k, rng), q = random_pmf(k, rng);
        const double tv = distance(p, q, Metric::TV), h = distance(p, q, Metric::HellingerSq),
                     kl = distance(p, q, Metric::KL), chi = distance(p, q, Metric::ChiSq);
        ASSERT_LE(tv * tv, h + 1e-12);
        ASSERT_LE(h, kl + 1e-12);
        ASSERT_LE(kl, chi + 1e-12);
    }
}

TEST(Distance, L2SandwichesTotalVariation) {
    Stream rng(79);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t k = 2 + rng.below(40);
        const Pmf p = random_pmf(k, rng), q = random_pmf(k, rng);
        const double l2 = distance(p, q, Metric::L2), tv = distance(p, q, Metric::TV);
        ASSERT_LE(0.5 * l2, tv + 1e-12);
        ASSERT_LE(tv, std::sqrt(static_cast<double>(k)) / 2 * l2 + 1e-12);
    }
}

TEST(ChiSqUniform, Examples) {
    EXPECT_EQ(chi_sq_uniform(Pmf::uniform(9)), 0.0);
    for (auto [k, r] : {std::pair{10, 2}, {100, 10}, {6, 3}, {12, 5}})
        EXPECT_NEAR(chi_sq_uniform(make_instance(k, UniformSubset{static_cast<std::size_t>(r)})),
                    static_cast<double>(k) / r - 1, 1e-12);
    EXPECT_NEAR(chi_sq_uniform(make_instance(10, PerturbedUniform{0.15})), 4 * 0.15 * 0.15, 1e-12);
}

TEST(ChiSqUniform, EqualsScaledL2AndChiSqDistance) {
    Stream rng(80);
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = 1 + rng.below(50);
        const Pmf p = random_pmf(k, rng);
        const double l2 = distance(p, Pmf::uniform(k), Metric::L2);
        EXPECT_NEAR(chi_sq_uniform(p), static_cast<double>(k) * l2 * l2, 1e-12);
        EXPECT_NEAR(chi_sq_uniform(p), distance(p, Pmf::uniform(k), Metric::ChiSq), 1e-12);
    }
}

TEST(Deviations, SumToZeroAndStayInRange) {
    Stream rng(81);
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = 1 + rng.below(50);
        const Pmf p = random_pmf(k, rng);
        const auto eps = p.deviations();
        long double s = 0;
        for (double e : eps) {
            s += e;
            EXPECT_GE(e, -1.0);
            EXPECT_LE(e, static_cast<double>(k) - 1.0);
        }
        EXPECT_NEAR(static_cast<double>(s), 0.0, 1e-12);
    }
}

TEST(Instances, Examples) {
    EXPECT_EQ(make_instance(4, UniformSubset{2}), Pmf({0.5, 0.5, 0.0, 0.0}));
    const Pmf pert = make_instance(4, PerturbedUniform{0.1});
    const std::vector<double> want{0.3, 0.2, 0.3, 0.2};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pert[i], want[i], 1e-15);
    EXPECT_NEAR(distance(pert, Pmf::uniform(4), Metric::TV), 0.1, 1e-15);
    const Pmf r = make_instance(6, RTo1String{3});
    EXPECT_NEAR(r[0], 0.5, 1e-15);
    EXPECT_NEAR(r[1], 0.5, 1e-15);
    EXPECT_NEAR(chi_sq_uniform(r), 2.0, 1e-12);
    const Pmf s = make_instance(10, HeavySpike{0.9});
    EXPECT_DOUBLE_EQ(s[0], 0.9);
    EXPECT_NEAR(s[5], 0.1 / 9, 1e-15);
}

TEST(Instances, ParameterRangesEnforced) {
    EXPECT_THROW(make_instance(6, RTo1String{4}), std::invalid_argument);
    EXPECT_THROW(make_instance(5, PerturbedUniform{0.1}), std::invalid_argument);
    EXPECT_THROW(make_instance(4, PerturbedUniform{0.6}), std::invalid_argument);
    EXPECT_THROW(make_instance(4, UniformSubset{5}), std::invalid_argument);
    EXPECT_THROW(make_instance(4, HeavySpike{0.0}), std::invalid_argument);
}

TEST(Instances, ParseRoundTrip) {
    for (const char* s : {"uniform", "perturbed:0.25", "subset:7", "spike:0.9", "rto1:3"})
        EXPECT_EQ(label(parse_instance(s)), s);
    EXPECT_THROW(parse_instance("perturbed"), std::invalid_argument);
    EXPECT_THROW(parse_instance("subset:x"), std::invalid_argument);
    EXPECT_THROW(parse_instance("subset:3z"), std::invalid_argument);
    EXPECT_THROW(parse_instance("zipf:1"), std::invalid_argument);
}

TEST(Mix, IsPointwiseConvexCombination) {
    const Pmf a = Pmf::point_mass(3, 0), b = Pmf::uniform(3);
    const Pmf m = mix(a, b, 0.25);
    EXPECT_NEAR(m[0], 0.75 + 0.25 / 3, 1e-15);
    EXPECT_NEAR(m[2], 0.25 / 3, 1e-15);
}

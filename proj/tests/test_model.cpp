/*
 Copyright 2026 The seir-mpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "seir_mpc/model.hpp"

namespace seir {
namespace {

const State kX0{0.5, 0.18, 0.01};

TEST(ModelParams, DefaultsValidate) { EXPECT_NO_THROW(ModelParams{}.validate()); }

TEST(ModelParams, RejectsBrokenInvariants) {
    const auto broken = [](auto mutate) {
        ModelParams p;
        mutate(p);
        return p;
    };
    EXPECT_THROW(broken([](ModelParams& p) { p.beta_min = 0.5; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.beta_min = 0.0; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.gamma_max = 0.1; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.eta = 0.0; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.i_max = 1.5; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.lambda = 0.0; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.lambda = 1.1; }).validate(), DomainError);
    EXPECT_THROW(broken([](ModelParams& p) { p.epsilon = -1.0; }).validate(), DomainError);
}

TEST(DerivedBounds, MatchReferenceScenario) {
    const DerivedBounds b = derived_bounds(ModelParams{});
    EXPECT_NEAR(b.s_bar, 0.34965, 1e-5);
    EXPECT_NEAR(b.e_bar, 0.035385, 1e-6);
    EXPECT_NEAR(b.s_under, 2.2727, 1e-4);
    EXPECT_NEAR(b.e_under, 0.115, 1e-12);
}

TEST(Rhs, EquilibriumWithoutInfection) {
    const auto f = rhs({0.5, 0.0, 0.0}, {0.44, 1.0 / 6.5}, ModelParams{});
    EXPECT_EQ(f[0], 0.0);
    EXPECT_EQ(f[1], 0.0);
    EXPECT_EQ(f[2], 0.0);
}

TEST(Rhs, ReferenceStateMatchesOracle) {
    const ModelParams p;
    const auto f = rhs(kX0, nominal_input(p), p);
    // Values from the extended-precision oracle.
    EXPECT_NEAR(f[0], -0.0022, 1e-15);
    EXPECT_NEAR(f[1], -0.036930434782608696, 1e-15);
    EXPECT_NEAR(f[2], 0.037591973244147157, 1e-15);

    const oracle::Params op;
    const auto g = oracle::f({0.5L, 0.18L, 0.01L}, op.beta_nom, op.gamma_nom, op);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(f[j], static_cast<double>(g[j]), 1e-15);
}

TEST(Rhs, NoInfectiousMeansOnlyIncubationFlow) {
    const ModelParams p;
    const auto f = rhs({0.4, 0.1, 0.0}, maximal_input(p), p);
    EXPECT_EQ(f[0], 0.0);
    EXPECT_DOUBLE_EQ(f[2], p.eta * 0.1);
}

TEST(Rhs, RejectsOutOfDomainArguments) {
    const ModelParams p;
    EXPECT_THROW(rhs({0.5, 0.6, 0.1}, nominal_input(p), p), DomainError);
    EXPECT_THROW(rhs({-0.1, 0.0, 0.0}, nominal_input(p), p), DomainError);
    EXPECT_THROW(rhs(kX0, {0.1, 0.2}, p), DomainError);
    EXPECT_THROW(rhs(kX0, {0.3, 0.6}, p), DomainError);
}

TEST(Rhs, ConservationProperty) {
    const ModelParams p;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < 500; ++n) {
        State x{unit(rng), unit(rng), unit(rng)};
        if (x.s + x.e + x.i > 1.0) continue;
        const ControlInput u{p.beta_min + unit(rng) * (p.beta_nom - p.beta_min),
                             p.gamma_nom + unit(rng) * (p.gamma_max - p.gamma_nom)};
        const auto f = rhs(x, u, p);
        const double sum = f[0] + f[1] + f[2];
        EXPECT_NEAR(sum, -u.gamma * x.i, 1e-15);
        EXPECT_LE(sum, 1e-16);
        EXPECT_NEAR(sum + u.gamma * x.i, 0.0, 1e-15);  // dR/dt = gamma I closes the balance
    }
}

TEST(StageCost, Examples) {
    ModelParams p;
    EXPECT_EQ(stage_cost({0.9, 0.0, 0.0}, nominal_input(p), p), 0.0);
    EXPECT_NEAR(stage_cost(kX0, nominal_input(p), p), 0.01625, 1e-15);
    p.lambda = 1.0;
    EXPECT_EQ(stage_cost({0.5, 0.0, 0.0}, {0.22, 0.5}, p), 0.0);
}

TEST(StageCostMin, Examples) {
    const ModelParams p;
    EXPECT_EQ(stage_cost_min({1.0, 0.0, 0.0}, p), 0.0);
    EXPECT_NEAR(stage_cost_min(kX0, p), 0.01625, 1e-15);
}

TEST(StageCostMin, EqualsMinimumOverCornersAndNominal) {
    const ModelParams p;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < 300; ++n) {
        State x{unit(rng) * 0.5, unit(rng) * 0.3, unit(rng) * 0.05};
        const double lmin = stage_cost_min(x, p);
        EXPECT_EQ(lmin, stage_cost(x, nominal_input(p), p));
        for (double b : {p.beta_min, p.beta_nom}) {
            for (double g : {p.gamma_nom, p.gamma_max}) {
                EXPECT_LE(lmin, stage_cost(x, {b, g}, p));
            }
        }
        // Positive definiteness in (E, I) with the exact quadratic form.
        EXPECT_DOUBLE_EQ(lmin, p.lambda * (x.e * x.e + x.i * x.i));
    }
}

TEST(StageCost, NonnegativeAndZeroOnlyAtNominalEquilibrium) {
    const ModelParams p;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < 300; ++n) {
        const State x{unit(rng) * 0.5, unit(rng) * 0.3, unit(rng) * 0.05};
        const ControlInput u{p.beta_min + unit(rng) * 0.22, p.gamma_nom + unit(rng) * 0.3};
        const double l = stage_cost(x, u, p);
        EXPECT_GE(l, 0.0);
        if (x.e > 0 || x.i > 0 || !(u == nominal_input(p))) { EXPECT_GT(l, 0.0); }
    }
    EXPECT_EQ(stage_cost({0.3, 0.0, 0.0}, nominal_input(p), p), 0.0);
}

TEST(Membership, Examples) {
    const ModelParams p;
    EXPECT_TRUE(in_XM({0.3, 0.01, 0.01}, p));
    EXPECT_FALSE(in_X({0.3, 0.01, 0.06}, p));
    EXPECT_FALSE(in_XM({0.36, 0.01, 0.01}, p));
    EXPECT_TRUE(in_XA({0.36, 0.01, 0.01}, p));
    EXPECT_TRUE(in_U(nominal_input(p), p));
    EXPECT_FALSE(in_U({0.5, 0.2}, p));
}

TEST(Membership, NestedSets) {
    const ModelParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < 2000; ++n) {
        const State x{unit(rng), unit(rng) * 0.2, unit(rng) * 0.06};
        if (in_XM(x, p)) { EXPECT_TRUE(in_XA(x, p)); }
        if (in_XA(x, p)) { EXPECT_TRUE(in_X(x, p)); }
    }
}

TEST(NominalEquilibria, Examples) {
    const ModelParams p;
    EXPECT_TRUE(in_E_nom({0.2, 0.0, 0.0}, p, 0.0));
    EXPECT_TRUE(in_E_nom({0.34, 1e-9, 0.0}, p, 1e-8));
    EXPECT_FALSE(in_E_nom({0.5, 0.0, 0.0}, p, 1e-8));
    EXPECT_THROW(in_E_nom({0.2, 0.0, 0.0}, p, -1.0), DomainError);
}

TEST(ViabilityOracle, Examples) {
    const ModelParams p;
    EXPECT_TRUE(in_A_prime_inner(kX0, p));
    EXPECT_FALSE(in_A_prime_inner({0.9, 0.0, 1e-9}, p));
    EXPECT_TRUE(in_excluded_neighbourhood({0.9, 0.0, 1e-9}, p));
    EXPECT_TRUE(in_A_prime_inner({0.2, 0.0, 0.0}, p));
    // Too many exposed people: the cap breaks even under maximal intervention.
    EXPECT_FALSE(in_A_prime_inner({0.3, 0.6, 0.05}, p));
}

TEST(ViabilityOracle, BudgetIsEnforced) {
    const ModelParams p;
    ViabilityOptions opts;
    opts.max_days = 0.05;
    EXPECT_THROW(in_A_prime_inner({0.5, 0.3, 0.01}, p, opts), BudgetExceeded);
}

}  // namespace
}  // namespace seir

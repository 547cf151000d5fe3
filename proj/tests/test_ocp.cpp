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

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "seir_mpc/certify.hpp"
#include "seir_mpc/ocp.hpp"

namespace seir::ocp {
namespace {

const State kX0{0.5, 0.18, 0.01};

DecisionVector random_inputs(std::size_t m, const ModelParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ub(p.beta_min, p.beta_nom), ug(p.gamma_nom, p.gamma_max);
    DecisionVector u(m);
    for (auto& uk : u) uk = {ub(rng), ug(rng)};
    return u;
}

std::vector<std::array<long double, 2>> widen(const DecisionVector& u) {
    std::vector<std::array<long double, 2>> out;
    for (const auto& uk : u) out.push_back({uk.beta, uk.gamma});
    return out;
}

TEST(OcpSpec, Validation) {
    EXPECT_EQ((OcpSpec{kX0, 20.0, 0.25, {}}).steps(), 80u);
    EXPECT_THROW((OcpSpec{kX0, 1.1, 0.25, {}}).validate(), DomainError);
    EXPECT_THROW((OcpSpec{{0.9, 0.2, 0.1}, 1.0, 0.25, {}}).validate(), DomainError);
}

TEST(Rollout, EquilibriumStaysPut) {
    const ModelParams p;
    const OcpSpec spec{{0.2, 0.0, 0.0}, 2.0, 0.25, p};
    for (const State& x : rollout(spec.x0, constant_sequence(spec, maximal_input(p)), p, 0.25)) {
        EXPECT_EQ(x, spec.x0);
    }
}

TEST(Rollout, MatchesEulerSimulation) {
    const ModelParams p;
    std::mt19937_64 rng(3);
    const DecisionVector u = random_inputs(20, p, rng);
    const auto nodes = rollout(kX0, u, p, 0.25);
    const Trajectory t = simulate(kX0, PiecewiseConstant{0.25, u}, 5.0, 0.25, Method::euler, p);
    ASSERT_EQ(nodes.size(), t.states.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) EXPECT_EQ(nodes[k], t.states[k]);
    EXPECT_EQ(nodes[1], step_euler(kX0, u[0], 0.25, p));
}

TEST(Objective, MatchesOracleTranscription) {
    const ModelParams p;
    const OcpSpec spec{kX0, 1.0, 0.25, p};
    const DecisionVector u = constant_sequence(spec, nominal_input(p));
    // Four left-endpoint terms of the nominal rollout, computed by the oracle.
    const oracle::Rollout r = oracle::transcribe({0.5L, 0.18L, 0.01L}, widen(u), 0.25L, {});
    EXPECT_NEAR(objective(spec, u), static_cast<double>(r.cost), 1e-15);
    EXPECT_NEAR(objective(spec, u), 0.014327195772456516, 1e-15);
    EXPECT_GT(objective(spec, u), 0.25 * 0.01625);

    std::mt19937_64 rng(4);
    const OcpSpec spec5{kX0, 5.0, 0.25, p};
    for (int n = 0; n < 10; ++n) {
        const DecisionVector v = random_inputs(20, p, rng);
        const oracle::Rollout o = oracle::transcribe({0.5L, 0.18L, 0.01L}, widen(v), 0.25L, {});
        EXPECT_NEAR(objective(spec5, v), static_cast<double>(o.cost), 1e-14);
        EXPECT_NEAR(constraint_violation(spec5, v),
                    std::max(0.0, static_cast<double>(o.max_i - 0.05L)), 1e-15);
    }
}

TEST(Objective, EquilibriumWithNominalInputIsFree) {
    const ModelParams p;
    const OcpSpec spec{{0.2, 0.0, 0.0}, 5.0, 0.25, p};
    EXPECT_EQ(objective(spec, constant_sequence(spec, nominal_input(p))), 0.0);
}

TEST(Objective, NondecreasingInHorizon) {
    const ModelParams p;
    std::mt19937_64 rng(6);
    const DecisionVector u = random_inputs(40, p, rng);
    double prev = 0.0;
    for (std::size_t m = 1; m <= 40; ++m) {
        const OcpSpec spec{kX0, 0.25 * static_cast<double>(m), 0.25, p};
        const double j = objective(spec, std::span(u).first(m));
        EXPECT_GE(j, prev);
        prev = j;
    }
}

TEST(Gradient, EquilibriumHasOnlyInputPenalty) {
    ModelParams p;
    const OcpSpec spec{{0.3, 0.0, 0.0}, 2.0, 0.25, p};
    std::mt19937_64 rng(8);
    const DecisionVector u = random_inputs(8, p, rng);
    const auto g = gradient(spec, u);
    for (std::size_t k = 0; k < u.size(); ++k) {
        EXPECT_NEAR(g[k].beta, 2.0 * (1.0 - p.lambda) * (u[k].beta - p.beta_nom) * 0.25, 1e-16);
        EXPECT_NEAR(g[k].gamma, 2.0 * (1.0 - p.lambda) * (u[k].gamma - p.gamma_nom) * 0.25, 1e-16);
    }
}

TEST(Gradient, LambdaOneDropsInputPenalty) {
    ModelParams p;
    p.lambda = 1.0;
    const OcpSpec spec{{0.3, 0.0, 0.0}, 2.0, 0.25, p};
    std::mt19937_64 rng(9);
    for (const ControlInput& gk : gradient(spec, random_inputs(8, p, rng))) {
        EXPECT_EQ(gk.beta, 0.0);
        EXPECT_EQ(gk.gamma, 0.0);
    }
}

TEST(Gradient, MatchesCentralDifferences) {
    const ModelParams p;
    const OcpSpec spec{kX0, 2.0, 0.25, p};
    std::mt19937_64 rng(10);
    for (int n = 0; n < 5; ++n) {
        DecisionVector u = random_inputs(spec.steps(), p, rng);
        const auto g = gradient(spec, u);
        for (std::size_t k = 0; k < u.size(); ++k) {
            for (int c = 0; c < 2; ++c) {
                double& v = c == 0 ? u[k].beta : u[k].gamma;
                const double keep = v;
                const double t = 1e-6;
                v = keep + t;
                const double fp = objective(spec, u);
                v = keep - t;
                const double fm = objective(spec, u);
                v = keep;
                const double fd = (fp - fm) / (2 * t);
                const double an = c == 0 ? g[k].beta : g[k].gamma;
                EXPECT_LE(std::abs(an - fd), 1e-5 * std::max(std::abs(fd), 1e-3));
            }
        }
    }
}

TEST(Solve, EquilibriumGivesNominalInput) {
    const ModelParams p;
    const OcpSpec spec{{0.2, 0.0, 0.0}, 5.0, 0.25, p};
    const OcpSolution sol = solve(spec);
    EXPECT_EQ(sol.status, OcpStatus::converged);
    EXPECT_EQ(sol.cost, 0.0);
    for (const ControlInput& u : sol.u_star) EXPECT_EQ(u, nominal_input(p));
}

TEST(Solve, ReferenceScenarioConverges) {
    const ModelParams p;
    const OcpSpec spec{kX0, 20.0, 0.25, p};
    const OcpSolution sol = solve(spec);
    EXPECT_EQ(sol.status, OcpStatus::converged);
    EXPECT_LE(sol.constraint_violation, 1e-8);
    EXPECT_LE(sol.kkt_residual, 1e-8);
    for (const ControlInput& u : sol.u_star) EXPECT_TRUE(in_U(u, p));
    for (std::size_t k = 1; k < sol.traj.states.size(); ++k) {
        EXPECT_LE(sol.traj.states[k].i, p.i_max + 1e-8);
    }
    EXPECT_NEAR(sol.cost, objective(spec, sol.u_star), 1e-15);
    EXPECT_EQ(sol.multipliers.size(), spec.steps());
    for (double mu : sol.multipliers) EXPECT_GE(mu, 0.0);
}

TEST(Solve, XMStartNoWorseThanNominal) {
    const ModelParams p;
    std::mt19937_64 rng(12);
    certify::Rng crng(12);
    for (const State& x : certify::sample_XM(p, 10, crng)) {
        const OcpSpec spec{x, 5.0, 0.25, p};
        const OcpSolution sol = solve(spec);
        EXPECT_TRUE(sol.feasible(1e-8));
        EXPECT_LE(sol.cost, objective(spec, constant_sequence(spec, nominal_input(p))) + 1e-12);
    }
}

TEST(Solve, ReportsInfeasibility) {
    const ModelParams p;
    // I already at the cap with many exposed: no admissible input keeps it there.
    const OcpSpec spec{{0.3, 0.5, 0.05}, 2.0, 0.25, p};
    const OcpSolution sol = solve(spec);
    EXPECT_EQ(sol.status, OcpStatus::infeasible);
    EXPECT_GT(sol.constraint_violation, 1e-8);
    EXPECT_TRUE(std::isinf(value_T(spec.x0, 2.0, p)));
}

TEST(Solve, WarmStartLengthChecked) {
    const OcpSpec spec{kX0, 1.0, 0.25, {}};
    EXPECT_THROW(solve(spec, DecisionVector(3)), DomainError);
}

TEST(Solve, BeatsExhaustiveLatticeOnTinyProblems) {
    ModelParams p;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < 4; ++n) {
        const State x{0.2 + 0.5 * unit(rng), 0.2 * unit(rng), 0.05 * unit(rng)};
        const OcpSpec spec{x, 0.5, 0.25, p};
        const OcpSolution sol = solve(spec);
        const long double best =
            oracle::lattice_minimum({x.s, x.e, x.i}, 2, 0.25L, 5, {}, 1e-8L);
        if (std::isfinite(static_cast<double>(best))) {
            EXPECT_LE(sol.cost, static_cast<double>(best) + 1e-6);
        }
    }
}

TEST(ValueT, EquilibriumAndMonotoneInHorizon) {
    const ModelParams p;
    EXPECT_EQ(value_T({0.2, 0.0, 0.0}, 5.0, p), 0.0);
    const State x{0.3, 0.02, 0.02};
    double prev = 0.0;
    for (double t : {0.25, 1.0, 2.0, 5.0, 10.0}) {
        const double v = value_T(x, t, p);
        EXPECT_GE(v, prev - 1e-6);
        prev = v;
    }
}

TEST(ValueInf, EquilibriumIsZero) {
    EXPECT_EQ(value_inf_estimate({0.2, 0.0, 0.0}, ModelParams{}), 0.0);
}

TEST(ValueInf, UpperBoundsFiniteHorizonValues) {
    const ModelParams p;
    for (const State& x : {State{0.3, 0.01, 0.01}, State{0.34, 0.03, 0.04}, kX0}) {
        const double vinf = value_inf_estimate(x, p);
        EXPECT_TRUE(std::isfinite(vinf));
        for (double t : {1.0, 5.0, 20.0}) EXPECT_GE(vinf, value_T(x, t, p) - 1e-6);
    }
}

TEST(ValueInf, BelowClosedFormBoundInsideXM) {
    const ModelParams p;
    for (const State& x : {State{0.3, 0.01, 0.01}, State{0.1, 0.03, 0.045}}) {
        const double vinf = value_inf_estimate(x, p);
        EXPECT_LE(vinf, certify::uniform_bound_C(x, p).C);
    }
}

}  // namespace
}  // namespace seir::ocp

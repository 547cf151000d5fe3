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

#pragma once

// Direct transcription of the finite-horizon optimal control problem.
//
// The horizon [0, T] is split into M = T/h explicit Euler steps with one
// constant input per step. The objective is the left-endpoint rectangle rule
// h * sum_k l(x_k, u_k); the infection cap is imposed at the nodes
// x_1 .. x_M. Inputs are kept in U by projection and the state constraint is
// handled by an augmented Lagrangian whose subproblems are solved by a
// spectral projected gradient method.

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "seir_mpc/integrate.hpp"
#include "seir_mpc/model.hpp"

namespace seir::ocp {

using DecisionVector = std::vector<ControlInput>;

struct OcpSpec {
    State x0;
    double horizon = 20.0;
    double h = 0.25;
    ModelParams p;

    /// Number of decision pairs M = horizon / h.
    std::size_t steps() const;
    void validate() const;
};

struct SolverOptions {
    double opt_tol = 1e-8;        // projected-gradient infinity norm
    double feas_tol = 1e-8;       // max_k (I_k - i_max)_+
    double penalty_init = 1.0;
    double penalty_growth = 10.0;
    double penalty_decrease = 0.9;  // grow the penalty unless infeasibility shrinks by this factor
    int penalty_window = 5;         // ...and unless it shrank by penalty_window_decrease
    double penalty_window_decrease = 0.5;  // over the last penalty_window updates
    double penalty_max = 1e12;
    int max_outer = 100;
    int max_inner = 20000;        // inner iterations per subproblem, all methods
    int spg_budget = 500;         // SPG iterations before switching to projected Newton
    int newton_budget = 40;
    int nonmonotone_memory = 10;
    std::ostream* log = nullptr;  // one line per outer iteration when set
};

enum class OcpStatus { converged, max_iter, infeasible };

std::string_view to_string(OcpStatus status);

struct OcpSolution {
    DecisionVector u_star;
    double cost = 0.0;
    Trajectory traj;
    OcpStatus status = OcpStatus::infeasible;
    double kkt_residual = 0.0;
    double constraint_violation = 0.0;
    std::vector<double> multipliers;  // one per node x_1 .. x_M
    int outer_iterations = 0;
    int inner_iterations = 0;

    bool feasible(double feas_tol) const { return constraint_violation <= feas_tol; }
};

/// Node states x_0 .. x_M of the unclamped Euler recursion.
std::vector<State> rollout(const State& x0, std::span<const ControlInput> u, const ModelParams& p,
                           double h);

/// h * sum_k l(x_k, u_k).
double objective(const OcpSpec& spec, std::span<const ControlInput> u);

/// Gradient of objective() by the discrete adjoint; one (d/dbeta, d/dgamma) pair per step.
std::vector<ControlInput> gradient(const OcpSpec& spec, std::span<const ControlInput> u);

/// max_k (I_k - i_max)_+ over the nodes x_1 .. x_M.
double constraint_violation(const OcpSpec& spec, std::span<const ControlInput> u);

/// Constant input sequence of length spec.steps().
DecisionVector constant_sequence(const OcpSpec& spec, const ControlInput& u);

/// Locally optimal solution from the warm start (default u = u_nom).
OcpSolution solve(const OcpSpec& spec, const std::optional<DecisionVector>& warm_start = {},
                  const SolverOptions& opts = {});

/// Finite-horizon value. Tries u_nom and then maximal intervention as
/// starting points; +infinity when neither yields a feasible solution.
double value_T(const State& x0, double horizon, const ModelParams& p, double h = 0.25,
               const SolverOptions& opts = {});

struct ValueEstimateOptions {
    Method method = Method::euler;
    double h = 0.25;
    double tail_tol = 1e-12;     // stop once the stage cost drops below this
    double max_days = 1e5;
    double tail_window = 20.0;   // days used to fit the exponential tail
    bool require_viable = true;  // reject starts outside X_M that fail in_A_prime_inner
};

/// Upper bound on the infinite-horizon value: cost of the staged reach
/// strategy (nominal input once inside X_M), integrated until the stage cost
/// drops below tail_tol, closed with a fitted exponential tail.
/// Throws BudgetExceeded when tail_tol is not reached within max_days.
double value_inf_estimate(const State& x0, const ModelParams& p,
                          const ValueEstimateOptions& opts = {});

}  // namespace seir::ocp

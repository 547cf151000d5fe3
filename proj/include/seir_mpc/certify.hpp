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

// Numerical certificates for the closed-loop guarantees: robust invariance
// of X_M, cost bounds under the nominal input, cost controllability, the
// lower bound on short-horizon values, the constructive strategy that
// steers admissible states into X_M, and the relaxed Lyapunov decrease
// along MPC closed loops.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "seir_mpc/integrate.hpp"
#include "seir_mpc/model.hpp"
#include "seir_mpc/mpc.hpp"
#include "seir_mpc/ocp.hpp"

namespace seir::certify {

/// Thrown when a policy that should respect the infection cap does not.
class ConstraintViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Outcome of one check. Margins are oriented so that >= 0 means satisfied.
struct CertReport {
    std::string check;
    std::size_t samples = 0;
    double worst_margin = 0.0;
    bool pass = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> details;

    void add_metric(std::string key, double value) { metrics.emplace_back(std::move(key), value); }
    std::optional<double> metric(const std::string& key) const;
};

void write_report_csv(std::ostream& os, const std::vector<CertReport>& reports);
void write_report_text(std::ostream& os, const CertReport& report);

// ---------------------------------------------------------------------------
// Sampling (deterministic for a given generator state).

using Rng = std::mt19937_64;

std::vector<State> sample_XM(const ModelParams& p, std::size_t n, Rng& rng);
/// Uniform over X by rejection from the unit cube.
std::vector<State> sample_X(const ModelParams& p, std::size_t n, Rng& rng);
/// Uniform over X, keeping only states accepted by in_A_prime_inner.
std::vector<State> sample_A_prime_inner(const ModelParams& p, std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// Boundary flow of X_M.

struct LieDerivative {
    int constraint;  // 1: S <= s_bar, 2: E <= e_bar, 3: I <= i_max
    double value;
};

/// L_f g_i(x, u) for every constraint of X_M active at x (within 1e-12).
/// Throws DomainError if none is active.
std::vector<LieDerivative> lie_derivatives_on_XM_boundary(const State& x, const ControlInput& u,
                                                          const ModelParams& p);

/// Evaluates the active Lie derivatives under u_nom on a grid over the three
/// upper faces of X_M (per_face x per_face points each). Passes iff every
/// value is <= 1e-12.
CertReport check_boundary_mesh(const ModelParams& p, std::size_t per_face = 19);

// ---------------------------------------------------------------------------
// Robust invariance of X_M.

enum class InputLaw { nominal, randomized, both };

struct InvarianceOptions {
    double horizon = 300.0;
    double h = 0.25;
    double hold = 1.0;          // days each random input is held
    double tolerance = 1e-9;
    InputLaw law = InputLaw::both;
    std::uint64_t seed = 1;
};

/// Simulates every start under the chosen input law with the batched Euler
/// kernel and tracks the distance to the complement of X_M. Starts outside
/// X_M are reported as out-of-domain and do not affect the verdict.
CertReport check_XM_invariance_from(const std::vector<State>& starts, const ModelParams& p,
                                    const InvarianceOptions& opts = {});

CertReport check_XM_invariance(const ModelParams& p, std::size_t n_samples,
                               const InvarianceOptions& opts = {});

// ---------------------------------------------------------------------------
// Nominal-input cost bounds and exponential decay.

struct NominalRun {
    double cost = 0.0;          // left-endpoint integral of the stage cost
    double tail_closure = 0.0;  // fitted exponential remainder after t_end
    double t_end = 0.0;
    State x_end;
    double decay_rate = 0.0;    // fitted rate of the stage cost over the last window
};

/// Integrates u_nom for at least `window` days and then until the stage cost
/// falls below tail_tol. Throws BudgetExceeded after max_days.
NominalRun run_nominal(const State& x0, const ModelParams& p, Method method, double h,
                       double tail_tol, double max_days, double window = 20.0);

struct BoundC {
    double C = 0.0;
    double j_inf = 0.0;
    double s_inf = 0.0;
    double margin = 0.0;  // C - j_inf
};

struct BoundOptions {
    Method method = Method::rk4;
    double h = 0.05;
    double tail_tol = 1e-14;
    double max_days = 1e5;
};

/// Closed-form bound on the nominal infinite-horizon cost from x0 in X_M,
/// alongside the numerically integrated cost it bounds.
BoundC uniform_bound_C(const State& x0, const ModelParams& p, const BoundOptions& opts = {});

/// uniform_bound_C over X_M samples; passes iff every C - J_inf >= -1e-8.
CertReport check_bound_C(const ModelParams& p, std::size_t n_samples, std::uint64_t seed = 1,
                         const BoundOptions& opts = {});

struct DecayFit {
    double gamma = 1.0;     // overshoot constant, >= 1
    double rate = 0.0;      // per day
    double fit_rmse = 0.0;
    bool ok = false;
    std::size_t samples_used = 0;
};

struct DecayOptions {
    double window = 400.0;  // days simulated per sample
    double h = 0.25;
};

/// Smallest (Gamma, rate) with |(E, I)(t)| <= Gamma e^{-rate t} |(E, I)(0)| on
/// the simulation grid of every start; rate is the slowest least-squares tail
/// slope of log |(E, I)|.
DecayFit estimate_decay(const std::vector<State>& starts, const ModelParams& p,
                        const DecayOptions& opts = {});
DecayFit estimate_decay(const ModelParams& p, std::size_t n_samples, std::uint64_t seed = 1,
                        const DecayOptions& opts = {});

struct CostControllability {
    CertReport report;
    double rho_emp = 0.0;
    double rho_bound = 0.0;  // 2 lambda Gamma^2 / rate
    DecayFit fit;
    std::vector<double> ratios;
    std::vector<State> samples;
};

/// rho_emp = max over X_M samples of V_inf estimate / l*(x0); passes iff every
/// ratio is finite and rho_emp <= 1.05 * rho_bound.
CostControllability cost_controllability(const ModelParams& p, std::size_t n_samples,
                                         std::uint64_t seed = 1);

/// V_inf estimate / l* along x0 = (s0, scale, scale) for each scale, with s0
/// above s_bar. The ratio diverges as the scale shrinks.
std::vector<double> cost_controllability_outside_XM(const ModelParams& p, double s0,
                                                    const std::vector<double>& scales);

// ---------------------------------------------------------------------------
// Constructive reach strategy.

/// Saturated feedback that freezes I (and E while unsaturated):
/// beta = sat(eta E / (S I)), gamma = sat(eta E / I). Returns u_nom when
/// I <= 1e-14 or S <= 0.
ControlInput holding_feedback(const State& x, const ModelParams& p);

struct StagedOptions {
    Method method = Method::rk4;
    double h = 0.01;
    bool refine_events = true;  // bisect the end of phase 1 to event_tol
    double event_tol = 1e-10;
    double max_days = 1e4;
    bool require_viable = true; // insist on in_A_prime_inner(x0)
};

struct StagedResult {
    Trajectory traj;
    double t_reach = 0.0;       // first time in X_M
    double t_phase1_end = 0.0;  // I stops growing under maximal intervention
    std::optional<double> t_beta_nominal;
    std::optional<double> t_gamma_nominal;
};

/// Maximal intervention until dI/dt <= 0 with S <= gamma_max / beta_min,
/// then the holding feedback until the state enters X_M.
/// Throws DomainError if x0 fails the viability oracle (when required),
/// ConstraintViolation if I exceeds i_max, BudgetExceeded after max_days.
StagedResult staged_reach_XM(const State& x0, const ModelParams& p, const StagedOptions& opts = {});

// ---------------------------------------------------------------------------
// Short-horizon lower bound and Lyapunov decrease.

/// exp(2 T max(eta, gamma_max)).
double a3_constant(const ModelParams& p, double horizon);

struct A3Options {
    double h = 0.25;
    ocp::SolverOptions solver;
};

/// delta l*(x0) <= C_bar V_delta(x0) for every start and delta. Starts whose
/// V_delta is infeasible are excluded with a note.
CertReport check_A3(const ModelParams& p, double horizon, const std::vector<State>& starts,
                    const std::vector<double>& deltas, const A3Options& opts = {});

struct LyapunovSummary {
    double alpha_max = 0.0;
    std::size_t iterations_used = 0;
    bool vacuous = true;
    bool all_converged = true;
    bool pass = true;
};

/// alpha_k = 1 - (V_k - V_{k+1}) / stage_integral_k over records with
/// stage_integral >= 1e-14; passes iff alpha_max < 1.
LyapunovSummary lyapunov_monitor(const mpc::MpcLog& log);

CertReport lyapunov_report(const mpc::MpcLog& log);

}  // namespace seir::certify

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

// Receding-horizon control without terminal cost or terminal constraint.
//
// Each iteration solves the horizon-T problem from the current state,
// applies the first delta days of the optimal input, and shifts the
// solution (padding with u_nom) to warm start the next solve.

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "seir_mpc/integrate.hpp"
#include "seir_mpc/model.hpp"
#include "seir_mpc/ocp.hpp"

namespace seir::mpc {

struct MpcConfig {
    double delta = 1.0;
    int n_steps = 20;              // prediction horizon T = n_steps * delta
    double h = 0.25;
    double termination_tol = 1e-8; // on max(E, I)
    double max_sim_days = 5000.0;
    ModelParams p;
    ocp::SolverOptions solver;

    double horizon() const { return n_steps * delta; }
    /// Transcription steps per applied segment.
    std::size_t segment_steps() const;
    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    double t = 0.0;
    State x;
    double value = 0.0;            // V_T at x
    std::vector<ControlInput> segment;
    double stage_integral = 0.0;   // cost accrued over [t, t + delta]
    double next_value = 0.0;       // V_T at the state after the segment
    double decrease_margin = 0.0;  // next_value - value + stage_integral
    ocp::OcpStatus status = ocp::OcpStatus::converged;
    int attempts = 1;
    double wall_ms = 0.0;
};

using MpcLog = std::vector<IterationRecord>;

enum class MpcStatus { terminated, infeasible, max_days };

std::string_view to_string(MpcStatus status);

struct MpcResult {
    Trajectory traj;
    MpcLog log;
    MpcStatus status = MpcStatus::terminated;
    std::optional<int> failed_iteration;
    State final_state;
};

/// One OCP solve with retries (warm start, then u_nom, then maximal intervention).
struct FeedbackResult {
    ocp::OcpSolution solution;
    int attempts = 0;
};
FeedbackResult solve_with_retry(const State& x, const MpcConfig& cfg,
                                const std::optional<ocp::DecisionVector>& warm);

/// MPC feedback: the input applied over [0, delta] from x.
std::vector<ControlInput> mpc_feedback(const State& x, const MpcConfig& cfg,
                                       const std::optional<ocp::DecisionVector>& warm = {});

/// Drops the first applied segment and appends u_nom.
ocp::DecisionVector shift_warm_start(const ocp::DecisionVector& u, std::size_t applied,
                                     const ModelParams& p);

MpcResult run_mpc(const State& x0, const MpcConfig& cfg);

/// Days until max(E, I) first drops below each threshold, linearly
/// interpolated between grid nodes. Throws DomainError if a threshold is
/// never reached.
std::vector<double> epidemic_lifetime(const Trajectory& traj, const std::vector<double>& thresholds);

/// Thresholds used for lifetime tables: 1e-5, 1e-6, 1e-7, 1e-8.
std::vector<double> default_thresholds();

/// Line-oriented text log; one record per line of key=value tokens.
void write_log(std::ostream& os, const MpcLog& log);
/// Inverse of write_log. Throws DomainError on malformed input.
MpcLog read_log(std::istream& is);

}  // namespace seir::mpc

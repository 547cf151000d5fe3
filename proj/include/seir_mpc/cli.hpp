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

// Command-line front end: simulate | mpc | sweep-lambda | ocp | certify.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "seir_mpc/integrate.hpp"
#include "seir_mpc/mpc.hpp"

namespace seir::cli {

enum ExitCode : int {
    kOk = 0,
    kCertifyFailed = 1,
    kConfigError = 2,
    kDomainError = 3,
    kInfeasible = 4,
    kMaxDays = 5,
};

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Columns t,S,E,I,R,beta,gamma,stage_cost; the input columns of the last
/// node are empty.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Trajectory columns plus V_T and decrease_margin, filled at the nodes
/// where an MPC iteration starts.
void write_closed_loop_csv(std::ostream& os, const mpc::MpcResult& result);

/// Worker count for `jobs` independent runs, capped by SEIR_MPC_THREADS.
std::size_t sweep_threads(std::size_t jobs);

}  // namespace seir::cli

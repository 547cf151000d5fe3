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

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "seir_mpc/model.hpp"

namespace seir {

enum class Method { euler, rk4 };

/// Sampled closed- or open-loop solution on a strictly increasing grid.
///
/// inputs[k] and cost_samples[k] belong to the interval [times[k], times[k+1]).
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<ControlInput> inputs;
    std::vector<double> cost_samples;

    int clamp_events = 0;
    bool started_outside_X = false;
    std::optional<double> xm_entry;
    std::optional<double> xa_entry;
    std::optional<double> first_violation;

    std::size_t intervals() const { return inputs.size(); }
    /// Left-endpoint quadrature of the stage cost.
    double cost_integral() const;
    /// Appends one interval; updates the entry/violation bookkeeping.
    void push(double t_next, const ControlInput& u, double cost, const State& x_next,
              const ModelParams& p);
    /// Starts a trajectory at (t0, x0).
    static Trajectory start(double t0, const State& x0, const ModelParams& p);
};

/// Piecewise-constant input on a uniform grid of width dt starting at t = 0.
/// The last value is held past the end of the sequence.
struct PiecewiseConstant {
    double dt = 0.25;
    std::vector<ControlInput> values;
};

using FeedbackLaw = std::function<ControlInput(double t, const State& x)>;

using ControlSignal = std::variant<PiecewiseConstant, FeedbackLaw>;

/// Input applied on the step starting at t from state x.
ControlInput evaluate(const ControlSignal& signal, double t, const State& x);

/// Sets negative components to 0; returns true if anything changed.
bool clamp_nonnegative(State& x);

/// x + h f(x, u) without clamping.
State euler_increment(const State& x, const ControlInput& u, double h, double eta);
/// Classical four-stage Runge-Kutta with u held over the step, without clamping.
State rk4_increment(const State& x, const ControlInput& u, double h, double eta);

/// Clamped explicit Euler step.
State step_euler(const State& x, const ControlInput& u, double h, const ModelParams& p);
/// Clamped RK4 step.
State step_rk4(const State& x, const ControlInput& u, double h, const ModelParams& p);

State step(Method method, const State& x, const ControlInput& u, double h, const ModelParams& p);

/// Number of h-steps in span; throws DomainError unless span is a positive
/// integer multiple of h (relative tolerance 1e-9).
std::size_t steps_in(double span, double h);

/// Fixed-step simulation with sample-and-hold inputs.
///
/// Throws DomainError if the signal leaves U. A start outside X is flagged on
/// the trajectory rather than rejected.
Trajectory simulate(const State& x0, const ControlSignal& signal, double t_end, double h,
                    Method method, const ModelParams& p);

}  // namespace seir

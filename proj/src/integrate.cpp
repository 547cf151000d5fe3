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

#include "seir_mpc/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace seir {

double Trajectory::cost_integral() const {
    double total = 0.0;
    for (std::size_t k = 0; k < cost_samples.size(); ++k) {
        total += (times[k + 1] - times[k]) * cost_samples[k];
    }
    return total;
}

Trajectory Trajectory::start(double t0, const State& x0, const ModelParams& p) {
    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.push_back(x0);
    traj.started_outside_X = !in_X(x0, p);
    if (in_XM(x0, p)) traj.xm_entry = t0;
    if (in_XA(x0, p)) traj.xa_entry = t0;
    if (x0.i > p.i_max) traj.first_violation = t0;
    return traj;
}

void Trajectory::push(double t_next, const ControlInput& u, double cost, const State& x_next,
                      const ModelParams& p) {
    inputs.push_back(u);
    cost_samples.push_back(cost);
    times.push_back(t_next);
    states.push_back(x_next);
    if (!xm_entry && in_XM(x_next, p)) xm_entry = t_next;
    if (!xa_entry && in_XA(x_next, p)) xa_entry = t_next;
    if (!first_violation && x_next.i > p.i_max) first_violation = t_next;
}

ControlInput evaluate(const ControlSignal& signal, double t, const State& x) {
    if (const auto* pc = std::get_if<PiecewiseConstant>(&signal)) {
        if (pc->values.empty()) throw DomainError("piecewise-constant signal has no values");
        // Nudge so that t = k*dt lands in interval k despite round-off.
        const double pos = t / pc->dt + 1e-9;
        const auto idx = pos <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(pos);
        return pc->values[std::min(idx, pc->values.size() - 1)];
    }
    return std::get<FeedbackLaw>(signal)(t, x);
}

bool clamp_nonnegative(State& x) {
    bool changed = false;
    for (double* v : {&x.s, &x.e, &x.i}) {
        if (*v < 0.0) {
            *v = 0.0;
            changed = true;
        }
    }
    return changed;
}

State euler_increment(const State& x, const ControlInput& u, double h, double eta) {
    const auto f = rhs_unchecked(x, u, eta);
    return {x.s + h * f[0], x.e + h * f[1], x.i + h * f[2]};
}

State rk4_increment(const State& x, const ControlInput& u, double h, double eta) {
    const auto shifted = [](const State& a, const std::array<double, 3>& d, double c) {
        return State{a.s + c * d[0], a.e + c * d[1], a.i + c * d[2]};
    };
    const auto k1 = rhs_unchecked(x, u, eta);
    const auto k2 = rhs_unchecked(shifted(x, k1, 0.5 * h), u, eta);
    const auto k3 = rhs_unchecked(shifted(x, k2, 0.5 * h), u, eta);
    const auto k4 = rhs_unchecked(shifted(x, k3, h), u, eta);
    const double w = h / 6.0;
    return {x.s + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x.e + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            x.i + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])};
}

State step_euler(const State& x, const ControlInput& u, double h, const ModelParams& p) {
    State next = euler_increment(x, u, h, p.eta);
    clamp_nonnegative(next);
    return next;
}

State step_rk4(const State& x, const ControlInput& u, double h, const ModelParams& p) {
    State next = rk4_increment(x, u, h, p.eta);
    clamp_nonnegative(next);
    return next;
}

State step(Method method, const State& x, const ControlInput& u, double h, const ModelParams& p) {
    return method == Method::euler ? step_euler(x, u, h, p) : step_rk4(x, u, h, p);
}

std::size_t steps_in(double span, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step size must be positive");
    if (!(span > 0.0) || !std::isfinite(span)) throw DomainError("time span must be positive");
    const double ratio = span / h;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw DomainError("time span must be an integer multiple of the step size");
    }
    return static_cast<std::size_t>(rounded);
}

Trajectory simulate(const State& x0, const ControlSignal& signal, double t_end, double h,
                    Method method, const ModelParams& p) {
    p.validate();
    check_state(x0);
    const std::size_t n = steps_in(t_end, h);

    Trajectory traj = Trajectory::start(0.0, x0, p);
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.inputs.reserve(n);
    traj.cost_samples.reserve(n);

    State x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const ControlInput u = evaluate(signal, t, x);
        check_input(u, p);
        const double cost = stage_cost_unchecked(x, u, p);
        State next = method == Method::euler ? euler_increment(x, u, h, p.eta)
                                             : rk4_increment(x, u, h, p.eta);
        if (clamp_nonnegative(next)) ++traj.clamp_events;
        traj.push(static_cast<double>(k + 1) * h, u, cost, next, p);
        x = next;
    }
    return traj;
}

}  // namespace seir

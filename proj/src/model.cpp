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

#include "seir_mpc/model.hpp"

#include <cmath>
#include <sstream>

#include "seir_mpc/integrate.hpp"

namespace seir {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

void ModelParams::validate() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    require(finite(beta_min) && finite(beta_nom) && finite(gamma_nom) && finite(gamma_max) &&
                finite(eta) && finite(i_max) && finite(epsilon) && finite(lambda),
            "model parameters must be finite");
    require(beta_min > 0.0 && beta_min < beta_nom, "require 0 < beta_min < beta_nom");
    require(gamma_nom > 0.0 && gamma_nom < gamma_max, "require 0 < gamma_nom < gamma_max");
    require(eta > 0.0, "require eta > 0");
    require(i_max > 0.0 && i_max <= 1.0, "require 0 < i_max <= 1");
    require(lambda > 0.0 && lambda <= 1.0, "require 0 < lambda <= 1");
    require(epsilon > 0.0, "require epsilon > 0");
}

DerivedBounds derived_bounds(const ModelParams& p) {
    return {p.gamma_nom / p.beta_nom, p.gamma_nom * p.i_max / p.eta, p.gamma_max / p.beta_min,
            p.gamma_max * p.i_max / p.eta};
}

ControlInput nominal_input(const ModelParams& p) { return {p.beta_nom, p.gamma_nom}; }
ControlInput maximal_input(const ModelParams& p) { return {p.beta_min, p.gamma_max}; }

void check_state(const State& x) {
    const double tol = kStateTolerance;
    require(std::isfinite(x.s) && std::isfinite(x.e) && std::isfinite(x.i), "state must be finite");
    require(x.s >= -tol && x.e >= -tol && x.i >= -tol, "state components must be nonnegative");
    require(x.s <= 1.0 + tol && x.e <= 1.0 + tol && x.i <= 1.0 + tol,
            "state components must not exceed 1");
    require(x.s + x.e + x.i <= 1.0 + tol, "S + E + I must not exceed 1");
}

void check_input(const ControlInput& u, const ModelParams& p) {
    const double tol = kStateTolerance;
    require(u.beta >= p.beta_min - tol && u.beta <= p.beta_nom + tol,
            "beta outside [beta_min, beta_nom]");
    require(u.gamma >= p.gamma_nom - tol && u.gamma <= p.gamma_max + tol,
            "gamma outside [gamma_nom, gamma_max]");
}

std::array<double, 3> rhs(const State& x, const ControlInput& u, const ModelParams& p) {
    p.validate();
    check_state(x);
    check_input(u, p);
    return rhs_unchecked(x, u, p.eta);
}

double stage_cost(const State& x, const ControlInput& u, const ModelParams& p) {
    p.validate();
    check_state(x);
    check_input(u, p);
    return stage_cost_unchecked(x, u, p);
}

double stage_cost_min(const State& x, const ModelParams& p) {
    p.validate();
    check_state(x);
    return p.lambda * (x.e * x.e + x.i * x.i);
}

bool in_X(const State& x, const ModelParams& p) {
    const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return unit(x.s) && unit(x.e) && unit(x.i) && x.i <= p.i_max && x.s + x.e + x.i <= 1.0;
}

bool in_U(const ControlInput& u, const ModelParams& p) {
    return u.beta >= p.beta_min && u.beta <= p.beta_nom && u.gamma >= p.gamma_nom &&
           u.gamma <= p.gamma_max;
}

bool in_XM(const State& x, const ModelParams& p) {
    const DerivedBounds b = derived_bounds(p);
    return in_X(x, p) && x.s <= b.s_bar && x.e <= b.e_bar;
}

bool in_XA(const State& x, const ModelParams& p) {
    const DerivedBounds b = derived_bounds(p);
    return in_X(x, p) && x.s <= b.s_under && x.e <= b.e_under;
}

bool in_E_nom(const State& x, const ModelParams& p, double tol) {
    if (!(tol >= 0.0)) throw DomainError("tolerance must be nonnegative");
    return x.e <= tol && x.i <= tol && x.s <= derived_bounds(p).s_bar + tol;
}

bool in_excluded_neighbourhood(const State& x, const ModelParams& p) {
    // States with S >= s_bar are kept only if I (E + I) >= epsilon.
    return x.s >= derived_bounds(p).s_bar && x.i * (x.e + x.i) < p.epsilon;
}

bool in_A_prime_inner(const State& x0, const ModelParams& p, const ViabilityOptions& opts) {
    p.validate();
    if (!in_X(x0, p)) return false;
    if (in_excluded_neighbourhood(x0, p)) return false;
    if (!(opts.h > 0.0)) throw DomainError("viability step must be positive");

    const ControlInput u_hat = maximal_input(p);
    State x = x0;
    double t = 0.0;
    while (!in_XA(x, p)) {
        if (x.i > p.i_max) return false;
        if (t >= opts.max_days) {
            throw BudgetExceeded("maximal intervention did not reach X_A within " +
                                 std::to_string(opts.max_days) + " days from " + to_string(x0));
        }
        x = step_rk4(x, u_hat, opts.h, p);
        t += opts.h;
    }
    return true;
}

std::string to_string(const State& x) {
    std::ostringstream os;
    os.precision(10);
    os << '(' << x.s << ", " << x.e << ", " << x.i << ')';
    return os.str();
}

}  // namespace seir

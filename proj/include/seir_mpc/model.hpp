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

#include <array>
#include <stdexcept>
#include <string>

namespace seir {

/// Thrown when a parameter set, state or input violates its invariants.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a simulation does not reach its target within the day budget.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Epidemiological and constraint constants of the controlled SEIR system.
///
/// Rates are per day. The defaults are the reference scenario: nominal
/// contact rate 0.44, nominal removal rate 1/6.5, maximal social distancing
/// down to 0.22, maximal quarantine up to 0.5, incubation time 4.6 days and
/// a 5% cap on the infectious proportion.
struct ModelParams {
    double beta_min = 0.22;
    double beta_nom = 0.44;
    double gamma_nom = 1.0 / 6.5;
    double gamma_max = 0.5;
    double eta = 1.0 / 4.6;
    double i_max = 0.05;
    double epsilon = 1e-6;
    double lambda = 0.5;

    /// Throws DomainError naming the first violated invariant.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Compartment proportions (S, E, I). R = 1 - S - E - I is implicit.
struct State {
    double s = 0.0;
    double e = 0.0;
    double i = 0.0;

    double removed() const { return 1.0 - s - e - i; }

    friend bool operator==(const State&, const State&) = default;
};

/// Intervention pair: contact rate beta and removal rate gamma.
struct ControlInput {
    double beta = 0.0;
    double gamma = 0.0;

    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

/// Box limits derived from the parameters.
struct DerivedBounds {
    double s_bar;     // gamma_nom / beta_nom
    double e_bar;     // gamma_nom * i_max / eta
    double s_under;   // gamma_max / beta_min
    double e_under;   // gamma_max * i_max / eta
};

/// Absolute slack used when checking nonnegativity of integrated states.
inline constexpr double kStateTolerance = 1e-12;

DerivedBounds derived_bounds(const ModelParams& p);

ControlInput nominal_input(const ModelParams& p);
ControlInput maximal_input(const ModelParams& p);

/// Throws DomainError if the state is outside the simplex (tolerance kStateTolerance).
void check_state(const State& x);
/// Throws DomainError if u is outside U (tolerance kStateTolerance).
void check_input(const ControlInput& u, const ModelParams& p);

/// SEIR vector field (dS, dE, dI) per day. Validates all arguments.
std::array<double, 3> rhs(const State& x, const ControlInput& u, const ModelParams& p);

/// Unchecked vector field for inner loops.
inline std::array<double, 3> rhs_unchecked(const State& x, const ControlInput& u, double eta) {
    const double infection = u.beta * x.s * x.i;
    return {-infection, infection - eta * x.e, eta * x.e - u.gamma * x.i};
}

/// lambda * (E^2 + I^2) + (1 - lambda) * |u - u_nom|^2.
double stage_cost(const State& x, const ControlInput& u, const ModelParams& p);

inline double stage_cost_unchecked(const State& x, const ControlInput& u, const ModelParams& p) {
    const double db = u.beta - p.beta_nom;
    const double dg = u.gamma - p.gamma_nom;
    return p.lambda * (x.e * x.e + x.i * x.i) + (1.0 - p.lambda) * (db * db + dg * dg);
}

/// Minimum of stage_cost over U, attained at u_nom.
double stage_cost_min(const State& x, const ModelParams& p);

bool in_X(const State& x, const ModelParams& p);
bool in_U(const ControlInput& u, const ModelParams& p);
bool in_XM(const State& x, const ModelParams& p);
bool in_XA(const State& x, const ModelParams& p);

/// Nominal disease-free equilibria: E, I <= tol and S <= s_bar + tol.
bool in_E_nom(const State& x, const ModelParams& p, double tol);

/// Settings for the admissible-set sufficiency oracle.
struct ViabilityOptions {
    double h = 0.01;             // RK4 step (days)
    double max_days = 2000.0;    // budget for reaching X_A
};

/// Sufficient test for membership of the admissible set minus the thin
/// neighbourhood of non-nominal equilibria.
///
/// Maximal intervention (beta_min, gamma_max) is simulated until the state
/// enters X_A; the cap I <= i_max must hold on the way. States with
/// S >= s_bar and I (E + I) < epsilon are rejected. A false return is
/// inconclusive. Throws BudgetExceeded if X_A is not reached in time.
bool in_A_prime_inner(const State& x0, const ModelParams& p, const ViabilityOptions& opts = {});

/// True if x sits in the excluded neighbourhood of non-nominal equilibria.
bool in_excluded_neighbourhood(const State& x, const ModelParams& p);

std::string to_string(const State& x);

}  // namespace seir

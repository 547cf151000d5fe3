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

#include "seir_mpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "seir_mpc/certify.hpp"

namespace seir::ocp {

std::size_t OcpSpec::steps() const { return steps_in(horizon, h); }

void OcpSpec::validate() const {
    p.validate();
    check_state(x0);
    steps();
}

std::string_view to_string(OcpStatus status) {
    switch (status) {
        case OcpStatus::converged: return "converged";
        case OcpStatus::max_iter: return "max-iter";
        case OcpStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

std::vector<State> rollout(const State& x0, std::span<const ControlInput> u, const ModelParams& p,
                           double h) {
    std::vector<State> nodes;
    nodes.reserve(u.size() + 1);
    nodes.push_back(x0);
    for (const ControlInput& uk : u) nodes.push_back(euler_increment(nodes.back(), uk, h, p.eta));
    return nodes;
}

namespace {

// Transcribed problem in flat form: z[2k] = beta_k, z[2k+1] = gamma_k.
class Transcription {
public:
    explicit Transcription(const OcpSpec& spec)
        : p_(spec.p), x0_(spec.x0), h_(spec.h), m_(spec.steps()), nodes_(m_ + 1) {}

    std::size_t steps() const { return m_; }
    std::size_t size() const { return 2 * m_; }

    void project(std::span<double> z) const {
        for (std::size_t k = 0; k < m_; ++k) {
            z[2 * k] = std::clamp(z[2 * k], p_.beta_min, p_.beta_nom);
            z[2 * k + 1] = std::clamp(z[2 * k + 1], p_.gamma_nom, p_.gamma_max);
        }
    }

    double lower(std::size_t j) const { return j % 2 == 0 ? p_.beta_min : p_.gamma_nom; }
    double upper(std::size_t j) const { return j % 2 == 0 ? p_.beta_nom : p_.gamma_max; }

    /// Infinity norm of P(z - g) - z.
    double projected_gradient_norm(std::span<const double> z, std::span<const double> g) const {
        double norm = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double moved = std::clamp(z[j] - g[j], lower(j), upper(j));
            norm = std::max(norm, std::abs(moved - z[j]));
        }
        return norm;
    }

    void forward(std::span<const double> z) {
        nodes_[0] = x0_;
        for (std::size_t k = 0; k < m_; ++k) {
            nodes_[k + 1] = euler_increment(nodes_[k], {z[2 * k], z[2 * k + 1]}, h_, p_.eta);
        }
    }

    double cost(std::span<const double> z) const {
        double total = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
            total += stage_cost_unchecked(nodes_[k], {z[2 * k], z[2 * k + 1]}, p_);
        }
        return h_ * total;
    }

    const std::vector<State>& nodes() const { return nodes_; }

    /// Augmented Lagrangian value and, if grad is non-empty, its gradient.
    ///
    /// Penalty per node: ((mu + rho c)_+^2 - mu^2) / (2 rho), c = I_k - i_max.
    /// With rho == 0 (or empty mu) only the objective is evaluated.
    double evaluate(std::span<const double> z, std::span<const double> mu, double rho,
                    std::span<double> grad) {
        forward(z);
        double value = cost(z);
        const bool penalised = rho > 0.0 && !mu.empty();
        if (penalised) {
            for (std::size_t k = 1; k <= m_; ++k) {
                const double shifted = std::max(0.0, mu[k - 1] + rho * (nodes_[k].i - p_.i_max));
                value += (shifted * shifted - mu[k - 1] * mu[k - 1]) / (2.0 * rho);
            }
        }
        if (grad.empty()) return value;

        const double lam = p_.lambda;
        const double w = 1.0 - p_.lambda;
        const double eta = p_.eta;
        // Adjoint of x_M.
        double ps = 0.0;
        double pe = 0.0;
        double pi = penalised ? std::max(0.0, mu[m_ - 1] + rho * (nodes_[m_].i - p_.i_max)) : 0.0;
        for (std::size_t kk = m_; kk-- > 0;) {
            const State& x = nodes_[kk];
            const double b = z[2 * kk];
            const double g = z[2 * kk + 1];
            grad[2 * kk] = h_ * (2.0 * w * (b - p_.beta_nom) + x.s * x.i * (pe - ps));
            grad[2 * kk + 1] = h_ * (2.0 * w * (g - p_.gamma_nom) - x.i * pi);

            const double bi = b * x.i;
            const double bs = b * x.s;
            const double ns = ps + h_ * bi * (pe - ps);
            const double ne = pe + h_ * (2.0 * lam * x.e + eta * (pi - pe));
            double ni = pi + h_ * (2.0 * lam * x.i + bs * (pe - ps) - g * pi);
            if (penalised && kk >= 1) {
                ni += std::max(0.0, mu[kk - 1] + rho * (x.i - p_.i_max));
            }
            ps = ns;
            pe = ne;
            pi = ni;
        }
        return value;
    }

    double violation() const {
        double v = 0.0;
        for (std::size_t k = 1; k <= m_; ++k) v = std::max(v, nodes_[k].i - p_.i_max);
        return v;
    }

private:
    ModelParams p_;
    State x0_;
    double h_;
    std::size_t m_;
    std::vector<State> nodes_;
};

std::vector<double> flatten(std::span<const ControlInput> u) {
    std::vector<double> z(2 * u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        z[2 * k] = u[k].beta;
        z[2 * k + 1] = u[k].gamma;
    }
    return z;
}

DecisionVector unflatten(std::span<const double> z) {
    DecisionVector u(z.size() / 2);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = {z[2 * k], z[2 * k + 1]};
    return u;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

struct InnerResult {
    double value;
    double pg_norm;
    int iterations;
};

// Spectral projected gradient with Barzilai-Borwein steps and a nonmonotone
// Armijo line search along the projected direction.
InnerResult spectral_projected_gradient(Transcription& tr, std::vector<double>& z,
                                        std::span<const double> mu, double rho, double tol,
                                        int max_iter, int memory) {
    constexpr double kAlphaMin = 1e-12;
    constexpr double kAlphaMax = 1e12;
    constexpr double kArmijo = 1e-4;

    const std::size_t n = z.size();
    std::vector<double> g(n), trial(n), g_trial(n), d(n);
    tr.project(z);
    double f = tr.evaluate(z, mu, rho, g);
    double pg = tr.projected_gradient_norm(z, g);
    double alpha = pg > 0.0 ? std::clamp(1.0 / pg, kAlphaMin, kAlphaMax) : 1.0;
    std::deque<double> history{f};

    int it = 0;
    for (; it < max_iter && pg > tol; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            d[j] = std::clamp(z[j] - alpha * g[j], tr.lower(j), tr.upper(j)) - z[j];
        }
        const double gd = dot(g, d);
        const double f_ref = *std::max_element(history.begin(), history.end());

        double step = 1.0;
        double f_trial = 0.0;
        bool accepted = false;
        while (step > 1e-20) {
            for (std::size_t j = 0; j < n; ++j) trial[j] = z[j] + step * d[j];
            f_trial = tr.evaluate(trial, mu, rho, g_trial);
            if (f_trial <= f_ref + kArmijo * step * gd) {
                accepted = true;
                break;
            }
            const double denom = f_trial - f - step * gd;
            double next = denom > 0.0 ? -0.5 * gd * step * step / denom : 0.5 * step;
            step = std::clamp(next, 0.1 * step, 0.5 * step);
        }
        if (!accepted) break;

        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double s = trial[j] - z[j];
            const double y = g_trial[j] - g[j];
            ss += s * s;
            sy += s * y;
        }
        alpha = sy > 0.0 ? std::clamp(ss / sy, kAlphaMin, kAlphaMax) : kAlphaMax;
        z.swap(trial);
        g.swap(g_trial);
        f = f_trial;
        history.push_back(f);
        if (static_cast<int>(history.size()) > memory) history.pop_front();
        pg = tr.projected_gradient_norm(z, g);
    }
    return {f, pg, it};
}

// Projected Newton step on the free variables with a finite-difference
// Hessian of the exact gradient. Used once SPG stalls on ill-conditioned
// subproblems (large penalty, long active arcs of the infection cap).
InnerResult projected_newton(Transcription& tr, std::vector<double>& z, std::span<const double> mu,
                             double rho, double tol, int max_iter) {
    constexpr double kArmijo = 1e-4;
    const std::size_t n = z.size();
    std::vector<double> g(n), trial(n), g_trial(n), zp(n), gp(n), gm(n);
    double f = tr.evaluate(z, mu, rho, g);
    double pg = tr.projected_gradient_norm(z, g);

    int it = 0;
    for (; it < max_iter && pg > tol; ++it) {
        const double eps = std::min(1e-3, pg);
        std::vector<std::size_t> free;
        for (std::size_t j = 0; j < n; ++j) {
            const bool at_lower = z[j] <= tr.lower(j) + eps && g[j] > 0.0;
            const bool at_upper = z[j] >= tr.upper(j) - eps && g[j] < 0.0;
            if (!at_lower && !at_upper) free.push_back(j);
        }
        std::vector<double> d(n);
        for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];

        const auto nf = static_cast<Eigen::Index>(free.size());
        if (nf > 0) {
            Eigen::MatrixXd hess(nf, nf);
            for (Eigen::Index c = 0; c < nf; ++c) {
                const std::size_t j = free[static_cast<std::size_t>(c)];
                const double t = 1e-6 * std::max(1.0, std::abs(z[j]));
                zp = z;
                zp[j] = z[j] + t;
                tr.evaluate(zp, mu, rho, gp);
                zp[j] = z[j] - t;
                tr.evaluate(zp, mu, rho, gm);
                for (Eigen::Index r = 0; r < nf; ++r) {
                    const std::size_t i = free[static_cast<std::size_t>(r)];
                    hess(r, c) = (gp[i] - gm[i]) / (2.0 * t);
                }
            }
            const Eigen::MatrixXd sym = 0.5 * (hess + hess.transpose());
            Eigen::VectorXd rhs(nf);
            for (Eigen::Index r = 0; r < nf; ++r) rhs(r) = -g[free[static_cast<std::size_t>(r)]];

            const double scale = std::max(sym.diagonal().cwiseAbs().maxCoeff(), 1e-300);
            double shift = 0.0;
            Eigen::VectorXd step;
            for (int attempt = 0; attempt < 60; ++attempt) {
                Eigen::LLT<Eigen::MatrixXd> llt(sym + shift * Eigen::MatrixXd::Identity(nf, nf));
                if (llt.info() == Eigen::Success) {
                    step = llt.solve(rhs);
                    if (step.allFinite()) break;
                }
                step.resize(0);
                shift = shift == 0.0 ? 1e-12 * scale : 4.0 * shift;
            }
            if (step.size() == nf) {
                for (Eigen::Index r = 0; r < nf; ++r) d[free[static_cast<std::size_t>(r)]] = step(r);
            }
        }

        double alpha = 1.0;
        bool accepted = false;
        double f_trial = f;
        for (int ls = 0; ls < 60; ++ls) {
            double decrease = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                trial[j] = std::clamp(z[j] + alpha * d[j], tr.lower(j), tr.upper(j));
                decrease += g[j] * (trial[j] - z[j]);
            }
            f_trial = tr.evaluate(trial, mu, rho, g_trial);
            if (decrease < 0.0 && f_trial <= f + kArmijo * decrease) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        z.swap(trial);
        g.swap(g_trial);
        f = f_trial;
        pg = tr.projected_gradient_norm(z, g);
    }
    return {f, pg, it};
}

}  // namespace

double objective(const OcpSpec& spec, std::span<const ControlInput> u) {
    spec.validate();
    if (u.size() != spec.steps()) throw DomainError("decision vector length must equal T/h");
    Transcription tr(spec);
    const auto z = flatten(u);
    return tr.evaluate(z, {}, 0.0, {});
}

std::vector<ControlInput> gradient(const OcpSpec& spec, std::span<const ControlInput> u) {
    spec.validate();
    if (u.size() != spec.steps()) throw DomainError("decision vector length must equal T/h");
    Transcription tr(spec);
    const auto z = flatten(u);
    std::vector<double> g(z.size());
    tr.evaluate(z, {}, 0.0, g);
    return unflatten(g);
}

double constraint_violation(const OcpSpec& spec, std::span<const ControlInput> u) {
    spec.validate();
    Transcription tr(spec);
    tr.forward(flatten(u));
    return tr.violation();
}

DecisionVector constant_sequence(const OcpSpec& spec, const ControlInput& u) {
    return DecisionVector(spec.steps(), u);
}

namespace {

OcpSolution package(const OcpSpec& spec, Transcription& tr, std::span<const double> z) {
    OcpSolution sol;
    sol.u_star = unflatten(z);
    sol.cost = tr.evaluate(z, {}, 0.0, {});
    sol.constraint_violation = tr.violation();
    const auto& nodes = tr.nodes();
    sol.traj = Trajectory::start(0.0, nodes[0], spec.p);
    for (std::size_t k = 0; k < tr.steps(); ++k) {
        sol.traj.push(static_cast<double>(k + 1) * spec.h, sol.u_star[k],
                      stage_cost_unchecked(nodes[k], sol.u_star[k], spec.p), nodes[k + 1], spec.p);
    }
    return sol;
}

}  // namespace

OcpSolution solve(const OcpSpec& spec, const std::optional<DecisionVector>& warm_start,
                  const SolverOptions& opts) {
    spec.validate();
    Transcription tr(spec);
    const std::size_t m = tr.steps();

    std::vector<double> z;
    if (warm_start) {
        if (warm_start->size() != m) throw DomainError("warm start length must equal T/h");
        z = flatten(*warm_start);
    } else {
        z = flatten(constant_sequence(spec, nominal_input(spec.p)));
    }
    tr.project(z);

    tr.forward(z);
    const std::vector<double> z_start = z;
    const double start_cost = tr.cost(z);
    const bool start_feasible = tr.violation() <= opts.feas_tol;

    std::vector<double> mu(m, 0.0), mu_next(m, 0.0);
    double rho = opts.penalty_init;
    std::vector<double> history;  // measures since the last penalty increase
    int total_inner = 0;
    int outer = 0;
    double kkt = std::numeric_limits<double>::infinity();
    double violation = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (; outer < opts.max_outer; ++outer) {
        InnerResult inner = spectral_projected_gradient(
            tr, z, mu, rho, opts.opt_tol, opts.spg_budget, opts.nonmonotone_memory);
        total_inner += inner.iterations;
        int budget = opts.max_inner - inner.iterations;
        while (inner.pg_norm > opts.opt_tol && budget > 0) {
            const InnerResult newton =
                projected_newton(tr, z, mu, rho, opts.opt_tol, std::min(budget, opts.newton_budget));
            total_inner += newton.iterations;
            budget -= std::max(newton.iterations, 1);
            inner = newton;
            if (inner.pg_norm <= opts.opt_tol || budget <= 0) break;
            inner = spectral_projected_gradient(tr, z, mu, rho, opts.opt_tol,
                                                std::min(budget, opts.spg_budget),
                                                opts.nonmonotone_memory);
            total_inner += inner.iterations;
            budget -= std::max(inner.iterations, 1);
        }
        kkt = inner.pg_norm;

        tr.forward(z);
        const auto& nodes = tr.nodes();
        violation = tr.violation();
        double measure = 0.0;      // |max(c, -mu / rho)|
        double complement = 0.0;   // |min(-c, mu_next)|
        for (std::size_t k = 0; k < m; ++k) {
            const double c = nodes[k + 1].i - spec.p.i_max;
            mu_next[k] = std::max(0.0, mu[k] + rho * c);
            measure = std::max(measure, std::abs(std::max(c, -mu[k] / rho)));
            complement = std::max(complement, std::abs(std::min(-c, mu_next[k])));
        }
        if (opts.log) {
            *opts.log << "outer=" << outer << " inner=" << inner.iterations
                      << " f=" << inner.value << " pg=" << inner.pg_norm
                      << " viol=" << violation << " compl=" << complement << " rho=" << rho
                      << '\n';
        }
        mu.swap(mu_next);
        if (violation <= opts.feas_tol && complement <= opts.feas_tol && kkt <= opts.opt_tol) {
            converged = true;
            ++outer;
            break;
        }
        // Slow linear progress (e.g. tiny constraint gradients) also grows the penalty.
        const std::size_t w = static_cast<std::size_t>(std::max(opts.penalty_window, 1));
        const bool stalled = !history.empty() && measure > opts.penalty_decrease * history.back();
        const bool slow = history.size() >= w &&
                          measure > opts.penalty_window_decrease * history[history.size() - w];
        if (stalled || slow) {
            rho *= opts.penalty_growth;
            history.clear();
        }
        history.push_back(measure);
        if (rho > opts.penalty_max) {
            ++outer;
            break;
        }
    }

    OcpSolution sol = package(spec, tr, z);
    sol.kkt_residual = kkt;
    sol.multipliers = mu;
    sol.outer_iterations = outer;
    sol.inner_iterations = total_inner;
    if (converged) {
        sol.status = OcpStatus::converged;
    } else {
        sol.status = violation <= opts.feas_tol ? OcpStatus::max_iter : OcpStatus::infeasible;
    }

    // Never hand back something worse than a feasible starting point.
    if (start_feasible && (!sol.feasible(opts.feas_tol) || sol.cost > start_cost + opts.opt_tol)) {
        OcpSolution fallback = package(spec, tr, z_start);
        fallback.status = OcpStatus::max_iter;
        fallback.kkt_residual = sol.kkt_residual;
        fallback.multipliers = std::vector<double>(m, 0.0);
        fallback.outer_iterations = outer;
        fallback.inner_iterations = total_inner;
        return fallback;
    }
    return sol;
}

double value_T(const State& x0, double horizon, const ModelParams& p, double h,
               const SolverOptions& opts) {
    const OcpSpec spec{x0, horizon, h, p};
    OcpSolution sol = solve(spec, std::nullopt, opts);
    if (!sol.feasible(opts.feas_tol)) {
        sol = solve(spec, constant_sequence(spec, maximal_input(p)), opts);
    }
    if (!sol.feasible(opts.feas_tol)) return std::numeric_limits<double>::infinity();
    return sol.cost;
}

double value_inf_estimate(const State& x0, const ModelParams& p, const ValueEstimateOptions& opts) {
    p.validate();
    check_state(x0);
    if (!(opts.h > 0.0) || !(opts.tail_tol > 0.0) || !(opts.tail_window > 0.0)) {
        throw DomainError("value estimate options must be positive");
    }

    double cost = 0.0;
    State x = x0;
    double t = 0.0;
    if (!in_XM(x0, p)) {
        certify::StagedOptions staged_opts;
        staged_opts.method = opts.method;
        staged_opts.h = opts.h;
        staged_opts.refine_events = false;
        staged_opts.max_days = opts.max_days;
        staged_opts.require_viable = opts.require_viable;
        const certify::StagedResult staged = certify::staged_reach_XM(x0, p, staged_opts);
        cost = staged.traj.cost_integral();
        x = staged.traj.states.back();
        t = staged.t_reach;
    }

    const certify::NominalRun tail = certify::run_nominal(x, p, opts.method, opts.h, opts.tail_tol,
                                                          opts.max_days - t, opts.tail_window);
    return cost + tail.cost + tail.tail_closure;
}

}  // namespace seir::ocp

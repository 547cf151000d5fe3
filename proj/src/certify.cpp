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

#include "seir_mpc/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "seir_mpc/kernels.hpp"

namespace seir::certify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActiveTol = 1e-12;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::optional<double> CertReport::metric(const std::string& key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return v;
    }
    return std::nullopt;
}

void write_report_csv(std::ostream& os, const std::vector<CertReport>& reports) {
    os << "# schema=1\n";
    os << "check,samples,worst_margin,pass,metrics\n";
    for (const CertReport& r : reports) {
        os << r.check << ',' << r.samples << ',' << fmt(r.worst_margin) << ','
           << (r.pass ? "true" : "false") << ',';
        for (std::size_t j = 0; j < r.metrics.size(); ++j) {
            if (j) os << ';';
            os << r.metrics[j].first << '=' << fmt(r.metrics[j].second);
        }
        os << '\n';
    }
}

void write_report_text(std::ostream& os, const CertReport& report) {
    os << report.check << ": " << (report.pass ? "PASS" : "FAIL") << " samples=" << report.samples
       << " worst_margin=" << fmt(report.worst_margin) << '\n';
    for (const auto& [k, v] : report.metrics) os << "  " << k << " = " << fmt(v) << '\n';
    for (const std::string& d : report.details) os << "  - " << d << '\n';
}

// ---------------------------------------------------------------------------

std::vector<State> sample_XM(const ModelParams& p, std::size_t n, Rng& rng) {
    p.validate();
    const DerivedBounds b = derived_bounds(p);
    std::uniform_real_distribution<double> us(0.0, b.s_bar), ue(0.0, b.e_bar), ui(0.0, p.i_max);
    std::vector<State> out;
    out.reserve(n);
    while (out.size() < n) {
        const State x{us(rng), ue(rng), ui(rng)};
        if (x.s + x.e + x.i <= 1.0) out.push_back(x);
    }
    return out;
}

std::vector<State> sample_X(const ModelParams& p, std::size_t n, Rng& rng) {
    p.validate();
    std::uniform_real_distribution<double> unit(0.0, 1.0), ui(0.0, p.i_max);
    std::vector<State> out;
    out.reserve(n);
    while (out.size() < n) {
        const State x{unit(rng), unit(rng), ui(rng)};
        if (x.s + x.e + x.i <= 1.0) out.push_back(x);
    }
    return out;
}

std::vector<State> sample_A_prime_inner(const ModelParams& p, std::size_t n, Rng& rng) {
    std::vector<State> out;
    out.reserve(n);
    const std::size_t max_draws = 1000 * n + 1000;
    std::size_t draws = 0;
    while (out.size() < n) {
        if (++draws > max_draws) {
            throw BudgetExceeded("viability oracle accepted too few samples");
        }
        const State x = sample_X(p, 1, rng).front();
        try {
            if (in_A_prime_inner(x, p)) out.push_back(x);
        } catch (const BudgetExceeded&) {
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<LieDerivative> lie_derivatives_on_XM_boundary(const State& x, const ControlInput& u,
                                                          const ModelParams& p) {
    const DerivedBounds b = derived_bounds(p);
    const auto f = rhs_unchecked(x, u, p.eta);
    std::vector<LieDerivative> out;
    if (std::abs(x.s - b.s_bar) <= kActiveTol) out.push_back({1, f[0]});
    if (std::abs(x.e - b.e_bar) <= kActiveTol) out.push_back({2, f[1]});
    if (std::abs(x.i - p.i_max) <= kActiveTol) out.push_back({3, f[2]});
    if (out.empty()) throw DomainError("no constraint of X_M is active at " + to_string(x));
    return out;
}

CertReport check_boundary_mesh(const ModelParams& p, std::size_t per_face) {
    p.validate();
    if (per_face < 2) throw DomainError("boundary mesh needs at least 2 points per edge");
    const DerivedBounds b = derived_bounds(p);
    const ControlInput u = nominal_input(p);
    const double hi[3] = {b.s_bar, b.e_bar, p.i_max};

    CertReport report;
    report.check = "xm_boundary_mesh";
    double worst = -kInf;
    for (int face = 0; face < 3; ++face) {
        for (std::size_t a = 0; a < per_face; ++a) {
            for (std::size_t c = 0; c < per_face; ++c) {
                double coord[3];
                const int fa = (face + 1) % 3;
                const int fc = (face + 2) % 3;
                coord[face] = hi[face];
                coord[fa] = hi[fa] * static_cast<double>(a) / static_cast<double>(per_face - 1);
                coord[fc] = hi[fc] * static_cast<double>(c) / static_cast<double>(per_face - 1);
                const State x{coord[0], coord[1], coord[2]};
                for (const LieDerivative& d : lie_derivatives_on_XM_boundary(x, u, p)) {
                    worst = std::max(worst, d.value);
                    if (d.value > kActiveTol) {
                        report.details.push_back("L_f g" + std::to_string(d.constraint) + " = " +
                                                 fmt(d.value) + " at " + to_string(x));
                    }
                }
                ++report.samples;
            }
        }
    }
    report.worst_margin = kActiveTol - worst;
    report.pass = report.worst_margin >= 0.0;
    report.add_metric("max_lie_derivative", worst);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

struct LaneOutcome {
    std::vector<double> margin;  // min over time of the box margin
    std::vector<double> max_i;
};

LaneOutcome simulate_lanes(const std::vector<State>& starts, const ModelParams& p,
                           const InvarianceOptions& opts, bool randomized) {
    const std::size_t n = starts.size();
    const DerivedBounds b = derived_bounds(p);
    const kernels::KernelTable& k = kernels::active();

    std::vector<double> s(n), e(n), i(n), beta(n, p.beta_nom), gamma(n, p.gamma_nom);
    for (std::size_t j = 0; j < n; ++j) {
        s[j] = starts[j].s;
        e[j] = starts[j].e;
        i[j] = starts[j].i;
    }
    LaneOutcome out{std::vector<double>(n, kInf), i};
    const kernels::SoaState x{s, e, i};
    const kernels::BoxBounds box{b.s_bar, b.e_bar, p.i_max};
    k.box_margin(x, box, out.margin);

    const std::size_t steps = steps_in(opts.horizon, opts.h);
    const std::size_t hold = steps_in(opts.hold, opts.h);
    Rng rng(opts.seed);
    std::uniform_real_distribution<double> ub(p.beta_min, p.beta_nom), ug(p.gamma_nom, p.gamma_max);

    for (std::size_t step = 0; step < steps; ++step) {
        if (randomized && step % hold == 0) {
            for (std::size_t j = 0; j < n; ++j) {
                beta[j] = ub(rng);
                gamma[j] = ug(rng);
            }
        }
        k.euler_step(x, {beta, gamma}, opts.h, p.eta);
        k.box_margin(x, box, out.margin);
        for (std::size_t j = 0; j < n; ++j) out.max_i[j] = std::max(out.max_i[j], i[j]);
    }
    return out;
}

}  // namespace

CertReport check_XM_invariance_from(const std::vector<State>& starts, const ModelParams& p,
                                    const InvarianceOptions& opts) {
    p.validate();
    if (!(opts.horizon > 0.0) || !(opts.h > 0.0) || !(opts.tolerance >= 0.0)) {
        throw DomainError("invariance options must be positive");
    }
    CertReport report;
    report.check = "xm_invariance";

    std::vector<bool> in_domain(starts.size());
    std::size_t outside = 0;
    for (std::size_t j = 0; j < starts.size(); ++j) {
        in_domain[j] = in_XM(starts[j], p);
        if (!in_domain[j]) ++outside;
    }
    report.samples = starts.size() - outside;

    double min_margin = kInf;
    double outside_min_margin = kInf;
    std::size_t outside_cap_violations = 0;
    const auto run = [&](bool randomized) {
        const LaneOutcome lanes = simulate_lanes(starts, p, opts, randomized);
        const char* law = randomized ? "randomized" : "nominal";
        for (std::size_t j = 0; j < starts.size(); ++j) {
            if (in_domain[j]) {
                min_margin = std::min(min_margin, lanes.margin[j]);
                if (lanes.margin[j] < -opts.tolerance) {
                    report.details.push_back(std::string(law) + " input leaves X_M from " +
                                             to_string(starts[j]) + " by " + fmt(-lanes.margin[j]));
                }
            } else {
                outside_min_margin = std::min(outside_min_margin, lanes.margin[j]);
                if (lanes.max_i[j] > p.i_max) {
                    ++outside_cap_violations;
                    report.details.push_back(std::string("out-of-domain start ") +
                                             to_string(starts[j]) + " exceeds i_max under " + law +
                                             " input (max I = " + fmt(lanes.max_i[j]) + ")");
                }
            }
        }
    };
    if (opts.law != InputLaw::randomized) run(false);
    if (opts.law != InputLaw::nominal) run(true);

    if (report.samples == 0) {
        report.worst_margin = 0.0;
        report.pass = false;
        report.details.push_back("no start inside X_M");
    } else {
        report.worst_margin = min_margin + opts.tolerance;
        report.pass = report.worst_margin >= 0.0;
    }
    report.add_metric("min_distance", report.samples ? min_margin : kInf);
    report.add_metric("out_of_domain", static_cast<double>(outside));
    report.add_metric("out_of_domain_cap_violations", static_cast<double>(outside_cap_violations));
    if (outside) report.add_metric("out_of_domain_min_distance", outside_min_margin);
    report.details.push_back(std::string("kernel: ") + std::string(kernels::name(kernels::active().isa)));
    return report;
}

CertReport check_XM_invariance(const ModelParams& p, std::size_t n_samples,
                               const InvarianceOptions& opts) {
    if (n_samples < 1) throw DomainError("need at least one sample");
    Rng rng(opts.seed);
    return check_XM_invariance_from(sample_XM(p, n_samples, rng), p, opts);
}

// ---------------------------------------------------------------------------

NominalRun run_nominal(const State& x0, const ModelParams& p, Method method, double h,
                       double tail_tol, double max_days, double window) {
    p.validate();
    check_state(x0);
    if (!(h > 0.0) || !(tail_tol > 0.0) || !(window > 0.0)) {
        throw DomainError("nominal run options must be positive");
    }
    const ControlInput u = nominal_input(p);
    const std::size_t window_steps = steps_in(window, h);
    std::vector<double> history;  // stage cost at every node
    NominalRun run;
    State x = x0;
    std::size_t k = 0;
    for (;; ++k) {
        const double t = static_cast<double>(k) * h;
        const double l = p.lambda * (x.e * x.e + x.i * x.i);
        history.push_back(l);
        if (k >= window_steps && l < tail_tol) {
            run.t_end = t;
            break;
        }
        if (t >= max_days) {
            throw BudgetExceeded("stage cost did not fall below " + fmt(tail_tol) + " within " +
                                 fmt(max_days) + " days from " + to_string(x0));
        }
        run.cost += h * l;
        x = step(method, x, u, h, p);
    }
    run.x_end = x;

    const double l_end = history.back();
    const double l_start = history[k - window_steps];
    if (l_end <= 0.0) {
        run.decay_rate = kInf;
        run.tail_closure = 0.0;
    } else {
        run.decay_rate = std::log(l_start / l_end) / window;
        // Geometric sum of the left-endpoint rule for l_end e^{-rate t}.
        run.tail_closure = run.decay_rate > 0.0 ? h * l_end / -std::expm1(-run.decay_rate * h) : kInf;
    }
    return run;
}

BoundC uniform_bound_C(const State& x0, const ModelParams& p, const BoundOptions& opts) {
    p.validate();
    if (!in_XM(x0, p)) throw DomainError("uniform_bound_C requires x0 in X_M: " + to_string(x0));
    const NominalRun run = run_nominal(x0, p, opts.method, opts.h, opts.tail_tol, opts.max_days);
    BoundC out;
    out.s_inf = std::min(run.x_end.s, x0.s);
    const double drop = x0.s - out.s_inf;
    out.C = p.lambda * ((drop + x0.e) / p.eta + (drop + x0.e + x0.i) / p.gamma_nom);
    out.j_inf = run.cost + run.tail_closure;
    out.margin = out.C - out.j_inf;
    return out;
}

CertReport check_bound_C(const ModelParams& p, std::size_t n_samples, std::uint64_t seed,
                         const BoundOptions& opts) {
    constexpr double kSlack = 1e-8;
    Rng rng(seed);
    CertReport report;
    report.check = "bound_C";
    double worst = kInf;
    double max_c = 0.0;
    for (const State& x : sample_XM(p, n_samples, rng)) {
        const BoundC b = uniform_bound_C(x, p, opts);
        worst = std::min(worst, b.margin);
        max_c = std::max(max_c, b.C);
        if (b.margin < -kSlack) {
            report.details.push_back("J_inf exceeds C at " + to_string(x) + " by " + fmt(-b.margin));
        }
        ++report.samples;
    }
    report.worst_margin = worst + kSlack;
    report.pass = report.samples > 0 && report.worst_margin >= 0.0;
    report.add_metric("min_C_minus_J", worst);
    report.add_metric("max_C", max_c);
    return report;
}

// ---------------------------------------------------------------------------

DecayFit estimate_decay(const std::vector<State>& starts, const ModelParams& p,
                        const DecayOptions& opts) {
    p.validate();
    if (!(opts.window > 0.0) || !(opts.h > 0.0)) throw DomainError("decay options must be positive");
    std::vector<State> lanes;
    std::vector<double> norm0;
    for (const State& x : starts) {
        const double z = std::hypot(x.e, x.i);
        if (z > 0.0) {
            lanes.push_back(x);
            norm0.push_back(z);
        }
    }
    DecayFit fit;
    fit.samples_used = lanes.size();
    if (lanes.empty()) return fit;

    const std::size_t n = lanes.size();
    const std::size_t steps = steps_in(opts.window, opts.h);
    std::vector<double> s(n), e(n), i(n);
    const std::vector<double> beta(n, p.beta_nom), gamma(n, p.gamma_nom);
    for (std::size_t j = 0; j < n; ++j) {
        s[j] = lanes[j].s;
        e[j] = lanes[j].e;
        i[j] = lanes[j].i;
    }
    // log of |z_k| / |z_0| per lane, row-major in time.
    std::vector<double> log_ratio((steps + 1) * n, 0.0);
    const kernels::KernelTable& k = kernels::active();
    const kernels::SoaState x{s, e, i};
    for (std::size_t step = 1; step <= steps; ++step) {
        k.euler_step(x, {beta, gamma}, opts.h, p.eta);
        for (std::size_t j = 0; j < n; ++j) {
            const double z = std::hypot(e[j], i[j]);
            log_ratio[step * n + j] = z > 0.0 ? std::log(z / norm0[j]) : -kInf;
        }
    }

    // Least-squares slope over the second half of the window, per lane.
    const std::size_t first = steps / 2;
    double rate = kInf;
    std::vector<std::pair<double, double>> lines(n);  // (slope, intercept)
    for (std::size_t j = 0; j < n; ++j) {
        double st = 0, sy = 0, stt = 0, sty = 0, cnt = 0;
        for (std::size_t step = first; step <= steps; ++step) {
            const double y = log_ratio[step * n + j];
            if (!std::isfinite(y)) continue;
            const double t = static_cast<double>(step) * opts.h;
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
            cnt += 1;
        }
        if (cnt < 2) continue;  // decayed to exactly zero; any rate is valid
        const double slope = (cnt * sty - st * sy) / (cnt * stt - st * st);
        lines[j] = {slope, (sy - slope * st) / cnt};
        rate = std::min(rate, -slope);
    }
    if (!std::isfinite(rate) || !(rate > 0.0)) {
        fit.rate = std::isfinite(rate) ? rate : 0.0;
        return fit;
    }

    double log_gamma = 0.0;
    double sq = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t step = 0; step <= steps; ++step) {
            const double y = log_ratio[step * n + j];
            if (!std::isfinite(y)) continue;
            const double t = static_cast<double>(step) * opts.h;
            log_gamma = std::max(log_gamma, y + rate * t);
            if (step >= first) {
                const double r = y - (lines[j].first * t + lines[j].second);
                sq += r * r;
                ++cnt;
            }
        }
    }
    fit.rate = rate;
    fit.gamma = std::exp(log_gamma);
    fit.fit_rmse = cnt ? std::sqrt(sq / static_cast<double>(cnt)) : 0.0;
    fit.ok = true;
    return fit;
}

DecayFit estimate_decay(const ModelParams& p, std::size_t n_samples, std::uint64_t seed,
                        const DecayOptions& opts) {
    if (n_samples < 10) throw DomainError("decay fit needs at least 10 samples");
    Rng rng(seed);
    return estimate_decay(sample_XM(p, n_samples, rng), p, opts);
}

CostControllability cost_controllability(const ModelParams& p, std::size_t n_samples,
                                         std::uint64_t seed) {
    p.validate();
    if (n_samples < 10) throw DomainError("cost controllability needs at least 10 samples");
    CostControllability out;
    Rng rng(seed);
    while (out.samples.size() < n_samples) {
        const State x = sample_XM(p, 1, rng).front();
        if (stage_cost_min(x, p) >= 1e-14) out.samples.push_back(x);
    }
    out.fit = estimate_decay(out.samples, p);

    CertReport& report = out.report;
    report.check = "cost_controllability";
    report.samples = out.samples.size();
    bool all_finite = true;
    for (const State& x : out.samples) {
        double ratio = kInf;
        try {
            ratio = ocp::value_inf_estimate(x, p) / stage_cost_min(x, p);
        } catch (const BudgetExceeded& e) {
            report.details.push_back(e.what());
        }
        if (!std::isfinite(ratio)) {
            all_finite = false;
            report.details.push_back("non-finite ratio at " + to_string(x));
        }
        out.ratios.push_back(ratio);
        out.rho_emp = std::max(out.rho_emp, ratio);
    }
    out.rho_bound = out.fit.ok ? 2.0 * p.lambda * out.fit.gamma * out.fit.gamma / out.fit.rate : kInf;
    if (!out.fit.ok) report.details.push_back("decay fit failed");

    report.worst_margin = out.fit.ok && all_finite ? (1.05 * out.rho_bound - out.rho_emp) / out.rho_bound
                                                   : -kInf;
    report.pass = report.worst_margin >= 0.0;
    report.add_metric("rho_emp", out.rho_emp);
    report.add_metric("rho_bound", out.rho_bound);
    report.add_metric("decay_gamma", out.fit.gamma);
    report.add_metric("decay_rate", out.fit.rate);
    report.add_metric("decay_rmse", out.fit.fit_rmse);
    return out;
}

std::vector<double> cost_controllability_outside_XM(const ModelParams& p, double s0,
                                                    const std::vector<double>& scales) {
    p.validate();
    if (!(s0 > derived_bounds(p).s_bar)) throw DomainError("negative control needs s0 > s_bar");
    ocp::ValueEstimateOptions opts;
    opts.require_viable = false;
    std::vector<double> out;
    out.reserve(scales.size());
    for (double scale : scales) {
        const State x{s0, scale, scale};
        double ratio = kInf;
        try {
            ratio = ocp::value_inf_estimate(x, p, opts) / stage_cost_min(x, p);
        } catch (const BudgetExceeded&) {
        }
        out.push_back(ratio);
    }
    return out;
}

// ---------------------------------------------------------------------------

ControlInput holding_feedback(const State& x, const ModelParams& p) {
    if (x.i <= 1e-14 || x.s <= 0.0) return nominal_input(p);
    const double flow = p.eta * x.e;
    return {std::clamp(flow / (x.s * x.i), p.beta_min, p.beta_nom),
            std::clamp(flow / x.i, p.gamma_nom, p.gamma_max)};
}

StagedResult staged_reach_XM(const State& x0, const ModelParams& p, const StagedOptions& opts) {
    p.validate();
    check_state(x0);
    if (!(opts.h > 0.0) || !(opts.event_tol > 0.0)) throw DomainError("staged options must be positive");
    if (opts.require_viable && !in_A_prime_inner(x0, p)) {
        throw DomainError("viability oracle rejects " + to_string(x0));
    }
    const DerivedBounds b = derived_bounds(p);
    const ControlInput u_hat = maximal_input(p);

    StagedResult res;
    res.traj = Trajectory::start(0.0, x0, p);
    if (in_XM(x0, p)) return res;

    State x = x0;
    double t = 0.0;
    const auto advance = [&](const ControlInput& u, double dt) {
        const State next = step(opts.method, x, u, dt, p);
        const double cost = stage_cost_unchecked(x, u, p);
        t += dt;
        res.traj.push(t, u, cost, next, p);
        x = next;
        if (x.i > p.i_max + 1e-9) {
            throw ConstraintViolation("staged strategy exceeds i_max at t = " + fmt(t) + " from " +
                                      to_string(x0));
        }
        if (t > opts.max_days) {
            throw BudgetExceeded("staged strategy did not reach X_M within " + fmt(opts.max_days) +
                                 " days from " + to_string(x0));
        }
    };
    const auto growth = [&](const State& y) { return p.eta * y.e - u_hat.gamma * y.i; };
    const auto phase1_done = [&](const State& y) { return growth(y) <= 0.0 && y.s <= b.s_under; };

    // Phase 1: maximal intervention until I stops growing.
    while (!phase1_done(x) && !in_XM(x, p)) {
        const State next = step(opts.method, x, u_hat, opts.h, p);
        if (opts.refine_events && phase1_done(next) && growth(x) > 0.0) {
            double lo = 0.0, hi = opts.h;
            while (hi - lo > opts.event_tol) {
                const double mid = 0.5 * (lo + hi);
                if (growth(step(opts.method, x, u_hat, mid, p)) <= 0.0) hi = mid;
                else lo = mid;
            }
            advance(u_hat, hi);
            break;
        }
        advance(u_hat, opts.h);
    }
    res.t_phase1_end = t;

    // Phase 2: hold I (and E) with the saturated feedback until inside X_M.
    while (!in_XM(x, p)) {
        const ControlInput u = holding_feedback(x, p);
        if (!res.t_beta_nominal && u.beta >= p.beta_nom) res.t_beta_nominal = t;
        if (!res.t_gamma_nominal && u.gamma <= p.gamma_nom) res.t_gamma_nominal = t;
        advance(u, opts.h);
    }
    res.t_reach = t;
    return res;
}

// ---------------------------------------------------------------------------

double a3_constant(const ModelParams& p, double horizon) {
    return std::exp(2.0 * horizon * std::max(p.eta, p.gamma_max));
}

CertReport check_A3(const ModelParams& p, double horizon, const std::vector<State>& starts,
                    const std::vector<double>& deltas, const A3Options& opts) {
    p.validate();
    for (double d : deltas) {
        if (!(d > 0.0) || d > horizon) throw DomainError("delta must lie in (0, T]");
    }
    const double c_bar = a3_constant(p, horizon);
    CertReport report;
    report.check = "a3_lower_bound";
    double worst = kInf;
    double min_ratio = kInf;
    std::size_t excluded = 0;
    for (const State& x : starts) {
        const double l_star = stage_cost_min(x, p);
        for (double d : deltas) {
            const double v = ocp::value_T(x, d, p, opts.h, opts.solver);
            if (!std::isfinite(v)) {
                ++excluded;
                report.details.push_back("V_delta infeasible at " + to_string(x) + ", delta " + fmt(d));
                continue;
            }
            const double margin = c_bar * v - d * l_star;
            worst = std::min(worst, margin);
            if (l_star > 0.0) min_ratio = std::min(min_ratio, c_bar * v / (d * l_star));
            if (margin < 0.0) {
                report.details.push_back("violated at " + to_string(x) + ", delta " + fmt(d));
            }
            ++report.samples;
        }
    }
    report.worst_margin = report.samples ? worst : -kInf;
    report.pass = report.samples > 0 && report.worst_margin >= 0.0;
    report.add_metric("C_bar", c_bar);
    report.add_metric("min_ratio", min_ratio);
    report.add_metric("excluded", static_cast<double>(excluded));
    return report;
}

LyapunovSummary lyapunov_monitor(const mpc::MpcLog& log) {
    LyapunovSummary out;
    out.alpha_max = -kInf;
    for (const mpc::IterationRecord& r : log) {
        if (r.status != ocp::OcpStatus::converged) out.all_converged = false;
        if (!(r.stage_integral >= 1e-14)) continue;
        const double alpha = std::isfinite(r.next_value)
                                 ? 1.0 - (r.value - r.next_value) / r.stage_integral
                                 : kInf;
        out.alpha_max = std::max(out.alpha_max, alpha);
        ++out.iterations_used;
    }
    out.vacuous = out.iterations_used == 0;
    if (out.vacuous) out.alpha_max = 0.0;
    out.pass = out.alpha_max < 1.0;
    return out;
}

CertReport lyapunov_report(const mpc::MpcLog& log) {
    const LyapunovSummary s = lyapunov_monitor(log);
    CertReport report;
    report.check = "lyapunov_decrease";
    report.samples = s.iterations_used;
    report.worst_margin = 1.0 - s.alpha_max;
    report.pass = s.pass;
    report.add_metric("alpha_max", s.alpha_max);
    report.add_metric("all_converged", s.all_converged ? 1.0 : 0.0);
    if (s.vacuous) report.details.push_back("vacuous: no iteration with positive stage cost");
    if (!s.all_converged) report.details.push_back("some solves did not converge");
    return report;
}

}  // namespace seir::certify

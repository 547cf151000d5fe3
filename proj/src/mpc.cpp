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

#include "seir_mpc/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace seir::mpc {

std::size_t MpcConfig::segment_steps() const { return steps_in(delta, h); }

void MpcConfig::validate() const {
    p.validate();
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (n_steps < 1) throw DomainError("N must be at least 1");
    if (!(termination_tol > 0.0)) throw DomainError("termination_tol must be positive");
    if (!(max_sim_days > 0.0)) throw DomainError("max_sim_days must be positive");
    segment_steps();
}

std::string_view to_string(MpcStatus status) {
    switch (status) {
        case MpcStatus::terminated: return "terminated";
        case MpcStatus::infeasible: return "infeasible";
        case MpcStatus::max_days: return "max-days";
    }
    return "unknown";
}

FeedbackResult solve_with_retry(const State& x, const MpcConfig& cfg,
                                const std::optional<ocp::DecisionVector>& warm) {
    const ocp::OcpSpec spec{x, cfg.horizon(), cfg.h, cfg.p};
    std::vector<std::optional<ocp::DecisionVector>> starts;
    if (warm) starts.push_back(warm);
    starts.push_back(std::nullopt);
    starts.push_back(ocp::constant_sequence(spec, maximal_input(cfg.p)));

    FeedbackResult best;
    bool have = false;
    for (const auto& start : starts) {
        ocp::OcpSolution sol = ocp::solve(spec, start, cfg.solver);
        ++best.attempts;
        const bool feasible = sol.feasible(cfg.solver.feas_tol);
        const bool better = !have || (feasible && (!best.solution.feasible(cfg.solver.feas_tol) ||
                                                   sol.cost < best.solution.cost));
        if (better) {
            best.solution = std::move(sol);
            have = true;
        }
        if (best.solution.status == ocp::OcpStatus::converged) break;
    }
    return best;
}

std::vector<ControlInput> mpc_feedback(const State& x, const MpcConfig& cfg,
                                       const std::optional<ocp::DecisionVector>& warm) {
    cfg.validate();
    const FeedbackResult fb = solve_with_retry(x, cfg, warm);
    if (!fb.solution.feasible(cfg.solver.feas_tol)) {
        throw DomainError("no feasible input found from " + to_string(x));
    }
    const std::size_t n = cfg.segment_steps();
    return {fb.solution.u_star.begin(), fb.solution.u_star.begin() + static_cast<long>(n)};
}

ocp::DecisionVector shift_warm_start(const ocp::DecisionVector& u, std::size_t applied,
                                     const ModelParams& p) {
    ocp::DecisionVector next(u.begin() + static_cast<long>(std::min(applied, u.size())), u.end());
    next.resize(u.size(), nominal_input(p));
    return next;
}

MpcResult run_mpc(const State& x0, const MpcConfig& cfg) {
    cfg.validate();
    check_state(x0);
    const std::size_t seg = cfg.segment_steps();
    const auto done = [&](const State& x) {
        return std::max(x.e, x.i) <= cfg.termination_tol;
    };
    const auto feasible = [&](const ocp::OcpSolution& sol) {
        return sol.feasible(cfg.solver.feas_tol);
    };

    MpcResult result;
    result.traj = Trajectory::start(0.0, x0, cfg.p);
    result.final_state = x0;
    if (done(x0)) return result;

    using Clock = std::chrono::steady_clock;
    auto tic = Clock::now();
    FeedbackResult current = solve_with_retry(x0, cfg, std::nullopt);
    double solve_ms = std::chrono::duration<double, std::milli>(Clock::now() - tic).count();

    State x = x0;
    double t = 0.0;
    for (int k = 0;; ++k) {
        if (!feasible(current.solution)) {
            result.status = MpcStatus::infeasible;
            result.failed_iteration = k;
            break;
        }
        IterationRecord rec;
        rec.iteration = k;
        rec.t = t;
        rec.x = x;
        rec.value = current.solution.cost;
        rec.status = current.solution.status;
        rec.attempts = current.attempts;
        rec.wall_ms = solve_ms;
        rec.segment.assign(current.solution.u_star.begin(),
                           current.solution.u_star.begin() + static_cast<long>(seg));

        for (std::size_t j = 0; j < seg; ++j) {
            const ControlInput& u = rec.segment[j];
            const double cost = stage_cost_unchecked(x, u, cfg.p);
            rec.stage_integral += cfg.h * cost;
            State next = euler_increment(x, u, cfg.h, cfg.p.eta);
            if (clamp_nonnegative(next)) ++result.traj.clamp_events;
            t = static_cast<double>(k) * cfg.delta + static_cast<double>(j + 1) * cfg.h;
            result.traj.push(t, u, cost, next, cfg.p);
            x = next;
        }

        const auto warm = shift_warm_start(current.solution.u_star, seg, cfg.p);
        tic = Clock::now();
        current = solve_with_retry(x, cfg, warm);
        solve_ms = std::chrono::duration<double, std::milli>(Clock::now() - tic).count();
        rec.next_value = feasible(current.solution) ? current.solution.cost
                                                    : std::numeric_limits<double>::infinity();
        rec.decrease_margin = rec.next_value - rec.value + rec.stage_integral;
        result.log.push_back(std::move(rec));

        if (done(x)) break;
        if (t >= cfg.max_sim_days) {
            result.status = MpcStatus::max_days;
            break;
        }
    }
    result.final_state = x;
    return result;
}

std::vector<double> default_thresholds() { return {1e-5, 1e-6, 1e-7, 1e-8}; }

std::vector<double> epidemic_lifetime(const Trajectory& traj,
                                      const std::vector<double>& thresholds) {
    std::vector<double> out;
    out.reserve(thresholds.size());
    for (double val : thresholds) {
        std::optional<double> hit;
        double prev_level = 0.0;
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            const double level = std::max(traj.states[k].e, traj.states[k].i);
            if (level < val) {
                if (k == 0) {
                    hit = traj.times[0];
                } else {
                    const double frac = (prev_level - val) / (prev_level - level);
                    hit = traj.times[k - 1] + frac * (traj.times[k] - traj.times[k - 1]);
                }
                break;
            }
            prev_level = level;
        }
        if (!hit) {
            std::ostringstream msg;
            msg << "max(E, I) never drops below " << val;
            throw DomainError(msg.str());
        }
        out.push_back(*hit);
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DomainError("malformed number in MPC log: " + s);
    }
    if (pos != s.size()) throw DomainError("malformed number in MPC log: " + s);
    return v;
}

}  // namespace

void write_log(std::ostream& os, const MpcLog& log) {
    os << "# seir-mpc log schema=1\n";
    for (const IterationRecord& r : log) {
        os << "iter=" << r.iteration << " t=" << fmt(r.t) << " S=" << fmt(r.x.s)
           << " E=" << fmt(r.x.e) << " I=" << fmt(r.x.i) << " V_T=" << fmt(r.value)
           << " stage_integral=" << fmt(r.stage_integral) << " V_T_next=" << fmt(r.next_value)
           << " decrease_margin=" << fmt(r.decrease_margin) << " status=" << to_string(r.status)
           << " attempts=" << r.attempts << " wall_ms=" << fmt(r.wall_ms) << " segment=";
        for (std::size_t j = 0; j < r.segment.size(); ++j) {
            if (j) os << ';';
            os << fmt(r.segment[j].beta) << ':' << fmt(r.segment[j].gamma);
        }
        os << '\n';
    }
}

MpcLog read_log(std::istream& is) {
    MpcLog log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        IterationRecord r;
        std::istringstream tokens(line);
        std::string tok;
        int seen = 0;
        while (tokens >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) throw DomainError("malformed MPC log token: " + tok);
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            ++seen;
            if (key == "iter") r.iteration = static_cast<int>(parse_double(val));
            else if (key == "t") r.t = parse_double(val);
            else if (key == "S") r.x.s = parse_double(val);
            else if (key == "E") r.x.e = parse_double(val);
            else if (key == "I") r.x.i = parse_double(val);
            else if (key == "V_T") r.value = parse_double(val);
            else if (key == "stage_integral") r.stage_integral = parse_double(val);
            else if (key == "V_T_next") r.next_value = parse_double(val);
            else if (key == "decrease_margin") r.decrease_margin = parse_double(val);
            else if (key == "attempts") r.attempts = static_cast<int>(parse_double(val));
            else if (key == "wall_ms") r.wall_ms = parse_double(val);
            else if (key == "status") {
                if (val == "converged") r.status = ocp::OcpStatus::converged;
                else if (val == "max-iter") r.status = ocp::OcpStatus::max_iter;
                else if (val == "infeasible") r.status = ocp::OcpStatus::infeasible;
                else throw DomainError("unknown solver status in MPC log: " + val);
            } else if (key == "segment") {
                std::istringstream pairs(val);
                std::string pair;
                while (std::getline(pairs, pair, ';')) {
                    const auto colon = pair.find(':');
                    if (colon == std::string::npos) throw DomainError("malformed segment: " + pair);
                    r.segment.push_back({parse_double(pair.substr(0, colon)),
                                         parse_double(pair.substr(colon + 1))});
                }
            } else {
                throw DomainError("unknown MPC log key: " + key);
            }
        }
        if (seen < 13) throw DomainError("incomplete MPC log line: " + line);
        log.push_back(std::move(r));
    }
    return log;
}

}  // namespace seir::mpc

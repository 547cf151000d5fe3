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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "seir_mpc/certify.hpp"
#include "seir_mpc/mpc.hpp"
#include "seir_mpc/ocp.hpp"

namespace {

using namespace seir;

const State kX0{0.5, 0.18, 0.01};
const std::vector<double> kLambdas{0.01, 0.2, 0.5, 0.7, 0.99};
const std::map<double, std::array<double, 4>> kReference{
    {0.5, {196.75, 239.0, 281.25, 323.75}},
    {0.99, {612.0, 801.25, 988.0, 1175.0}},
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : " ") + fmt("%.2f", x);
    return out;
}

bool within(const std::vector<double>& got, const std::array<double, 4>& want, double rel) {
    if (got.size() != want.size()) return false;
    for (std::size_t j = 0; j < want.size(); ++j) {
        if (std::abs(got[j] - want[j]) > rel * want[j]) return false;
    }
    return true;
}

struct SweepRun {
    mpc::MpcResult result;
    std::vector<double> lifetimes;
    double seconds = 0.0;
    double max_i = 0.0;
};

std::map<double, SweepRun>& sweep() {
    static std::map<double, SweepRun> runs = [] {
        std::map<double, SweepRun> out;
        for (double lambda : kLambdas) {
            mpc::MpcConfig cfg;
            cfg.p.lambda = lambda;
            const auto tic = std::chrono::steady_clock::now();
            SweepRun r;
            r.result = mpc::run_mpc(kX0, cfg);
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
            for (const State& x : r.result.traj.states) r.max_i = std::max(r.max_i, x.i);
            try {
                r.lifetimes = mpc::epidemic_lifetime(r.result.traj, mpc::default_thresholds());
            } catch (const DomainError&) {
            }
            out.emplace(lambda, std::move(r));
        }
        return out;
    }();
    return runs;
}

Outcome criterion1() {
    const SweepRun& r = sweep().at(0.5);
    Outcome o;
    o.pass = r.result.status == mpc::MpcStatus::terminated &&
             within(r.lifetimes, kReference.at(0.5), 0.15) && r.seconds <= 900.0;
    o.detail = "lifetimes [" + list(r.lifetimes) + "] days, runtime " + fmt("%.1f s", r.seconds);
    return o;
}

Outcome criterion2() {
    Outcome o;
    o.pass = true;
    for (std::size_t j = 1; j < kLambdas.size(); ++j) {
        const auto& lo = sweep().at(kLambdas[j - 1]).lifetimes;
        const auto& hi = sweep().at(kLambdas[j]).lifetimes;
        if (lo.size() != 4 || hi.size() != 4) {
            o.pass = false;
            continue;
        }
        for (std::size_t k = 0; k < 4; ++k) o.pass = o.pass && hi[k] >= lo[k];
    }
    const auto& top = sweep().at(0.99).lifetimes;
    o.pass = o.pass && !top.empty() && top[0] > 500.0 && within(top, kReference.at(0.99), 0.20);
    o.detail = "lambda=0.99 lifetimes [" + list(top) + "] days";
    return o;
}

Outcome criterion3() {
    double worst = 0.0;
    for (const auto& [lambda, r] : sweep()) worst = std::max(worst, r.max_i);
    return {worst <= 0.05 + 1e-8, fmt("max I over sweep %.12g", worst)};
}

Outcome criterion4() {
    mpc::MpcConfig cfg;
    cfg.n_steps = 2;
    const mpc::MpcResult r = mpc::run_mpc(kX0, cfg);
    const ModelParams p;
    bool feasible = r.status != mpc::MpcStatus::infeasible;
    for (const State& x : r.traj.states) feasible = feasible && x.i <= p.i_max + 1e-8;
    const bool converged = r.status == mpc::MpcStatus::terminated && in_E_nom(r.final_state, p, 1e-8);
    return {feasible && converged,
            fmt("T=2: %.0f iterations, ", static_cast<double>(r.log.size())) +
                std::string(mpc::to_string(r.status))};
}

Outcome criterion5() {
    const certify::LyapunovSummary s = certify::lyapunov_monitor(sweep().at(0.5).result.log);
    return {s.pass && !s.vacuous && s.alpha_max < 1.0,
            fmt("alpha_max %.6f", s.alpha_max) +
                fmt(" over %.0f iterations", static_cast<double>(s.iterations_used))};
}

Outcome criterion6() {
    const ModelParams p;
    certify::InvarianceOptions opts;
    opts.horizon = 300.0;
    opts.tolerance = 1e-9;
    opts.law = certify::InputLaw::both;
    const certify::CertReport inv = certify::check_XM_invariance(p, 1000, opts);
    const certify::CertReport mesh = certify::check_boundary_mesh(p);
    const double mesh_max = 1e-12 - mesh.worst_margin;
    return {inv.pass && mesh.pass && mesh_max <= 1e-12,
            fmt("worst distance %.3g", inv.worst_margin) + fmt(", mesh max Lie derivative %.3g", mesh_max)};
}

Outcome criterion7() {
    const ModelParams p;
    certify::Rng rng(7);
    const auto starts = certify::sample_A_prime_inner(p, 200, rng);
    const certify::CertReport r = certify::check_A3(p, 20.0, starts, {0.25, 1.0, 5.0, 20.0});
    return {r.pass && starts.size() == 200,
            fmt("C_bar %.5g", r.metric("C_bar").value_or(NAN)) +
                fmt(", min ratio %.3g", r.metric("min_ratio").value_or(NAN)) +
                fmt(", excluded %.0f", r.metric("excluded").value_or(NAN))};
}

Outcome criterion8() {
    const ModelParams p;
    const certify::CostControllability cc = certify::cost_controllability(p, 200, 8);
    const certify::CertReport bound = certify::check_bound_C(p, 200, 8);
    return {cc.report.pass && std::isfinite(cc.rho_emp) && bound.pass && bound.worst_margin >= -1e-8,
            fmt("rho_emp %.4g", cc.rho_emp) + fmt(", rho_bound %.4g", cc.rho_bound) +
                fmt(", worst C margin %.3g", bound.worst_margin)};
}

Outcome criterion9() {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    certify::Rng srng(9);
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
        ModelParams p;
        p.lambda = 0.05 + 0.95 * unit(rng);
        const State x0 = certify::sample_X(p, 1, srng).front();
        const std::size_t m = 1 + static_cast<std::size_t>(unit(rng) * 20.0);
        const ocp::OcpSpec spec{x0, 0.25 * static_cast<double>(m), 0.25, p};
        ocp::DecisionVector u(m);
        for (auto& uk : u) {
            uk = {p.beta_min + unit(rng) * (p.beta_nom - p.beta_min),
                  p.gamma_nom + unit(rng) * (p.gamma_max - p.gamma_nom)};
        }
        const auto g = ocp::gradient(spec, u);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            for (int c = 0; c < 2; ++c) {
                double& v = c == 0 ? u[k].beta : u[k].gamma;
                const double keep = v, t = 1e-6;
                v = keep + t;
                const double fp = ocp::objective(spec, u);
                v = keep - t;
                const double fm = ocp::objective(spec, u);
                v = keep;
                const double fd = (fp - fm) / (2 * t);
                err = std::max(err, std::abs((c == 0 ? g[k].beta : g[k].gamma) - fd));
                scale = std::max(scale, std::abs(fd));
            }
        }
        worst = std::max(worst, err / std::max(scale, 1e-12));
    }
    return {worst <= 1e-5, fmt("worst relative error %.3g", worst)};
}

double sup_gap(const Trajectory& a, const Trajectory& b, std::size_t stride) {
    double gap = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        const State& x = a.states[k];
        const State& y = b.states[k * stride];
        gap = std::max({gap, std::abs(x.s - y.s), std::abs(x.e - y.e), std::abs(x.i - y.i)});
    }
    return gap;
}

Outcome criterion10() {
    const ModelParams p;
    const PiecewiseConstant u{0.25, {nominal_input(p)}};
    const double gap = sup_gap(simulate(kX0, u, 300.0, 0.25, Method::euler, p),
                               simulate(kX0, u, 300.0, 0.25, Method::rk4, p), 1);
    const double self = sup_gap(simulate(kX0, u, 300.0, 0.25, Method::rk4, p),
                                simulate(kX0, u, 300.0, 0.001, Method::rk4, p), 250);
    return {gap <= 1e-2 && self <= 1e-6,
            fmt("Euler/RK4 gap %.3g", gap) + fmt(", RK4 self-convergence %.3g", self)};
}

Outcome criterion11() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    certify::Rng srng(11);
    double worst = -INFINITY;
    int compared = 0;
    bool pass = true;
    for (int n = 0; n < 20; ++n) {
        ModelParams p;
        p.lambda = 0.05 + 0.95 * unit(rng);
        const State x0 = certify::sample_X(p, 1, srng).front();
        const std::size_t m = 1 + static_cast<std::size_t>(unit(rng) * 3.0) % 3;
        const ocp::OcpSolution sol = ocp::solve({x0, 0.25 * static_cast<double>(m), 0.25, p});
        oracle::Params op;
        op.lambda = p.lambda;
        const long double best = oracle::lattice_minimum({x0.s, x0.e, x0.i}, m, 0.25L, 7, op, 1e-8L);
        if (!std::isfinite(static_cast<double>(best))) continue;
        ++compared;
        const double excess = sol.feasible(1e-8) ? sol.cost - static_cast<double>(best) : INFINITY;
        worst = std::max(worst, excess);
        pass = pass && excess <= 1e-6;
    }
    return {pass && compared > 0,
            fmt("worst excess over lattice %.3g", worst) +
                fmt(" on %.0f feasible instances", static_cast<double>(compared))};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion1}, {2, criterion2},   {3, criterion3},   {4, criterion4},
        {5, criterion5}, {6, criterion6},   {7, criterion7},   {8, criterion8},
        {9, criterion9}, {10, criterion10}, {11, criterion11},
    };
    int failures = 0;
    for (const auto& [id, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("criterion %d: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

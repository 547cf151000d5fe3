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

#include "seir_mpc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "seir_mpc/certify.hpp"
#include "seir_mpc/config.hpp"
#include "seir_mpc/ocp.hpp"

namespace seir::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "# schema=1\n";

// Flags shared by every subcommand; they override values from --config.
struct CommonFlags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double horizon = 0.0;
    double delta = 0.0;
    double h = 0.0;
    std::string x0;
    std::vector<CLI::Option*> opts;

    bool given(const char* name) const {
        for (const CLI::Option* o : opts) {
            if (o->check_lname(name) && o->count() > 0) return true;
        }
        return false;
    }
};

void add_common(CLI::App* sub, CommonFlags& f) {
    f.opts.push_back(sub->add_option("--config", f.config, "Scenario file (key = value)"));
    f.opts.push_back(sub->add_option("--out", f.out, "Output directory"));
    f.opts.push_back(sub->add_option("--seed", f.seed, "Random seed"));
    f.opts.push_back(sub->add_option("--lambda", f.lambda, "State weight in the stage cost"));
    f.opts.push_back(sub->add_option("--horizon", f.horizon, "Prediction horizon T (days)"));
    f.opts.push_back(sub->add_option("--delta", f.delta, "Sampling period (days)"));
    f.opts.push_back(sub->add_option("--h", f.h, "Integration step (days)"));
    f.opts.push_back(sub->add_option("--x0", f.x0, "Initial state S,E,I"));
}

ScenarioConfig resolve(const CommonFlags& f) {
    ScenarioConfig cfg;
    if (!f.config.empty()) cfg = load_config(f.config);
    if (f.given("delta")) cfg.delta = f.delta;
    if (f.given("horizon")) set_key(cfg, "T", format_double(f.horizon));
    if (f.given("lambda")) cfg.p.lambda = f.lambda;
    if (f.given("h")) cfg.h = f.h;
    if (f.given("seed")) cfg.seed = f.seed;
    if (f.given("x0")) cfg.x0 = parse_triple(f.x0);
    if (f.given("out")) set_key(cfg, "out", f.out);
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

void write_effective_config(const ScenarioConfig& cfg, const fs::path& dir) {
    open_output(dir, "effective_config.txt") << serialize_config(cfg);
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

void write_lifetime_csv(std::ostream& os, const std::vector<double>& thresholds,
                        const std::vector<double>& days) {
    os << kSchema << "threshold,days\n";
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        os << format_double(thresholds[j]) << ',' << format_double(days[j]) << '\n';
    }
}

// ---------------------------------------------------------------------------

ControlInput parse_constant_policy(const std::string& spec) {
    const std::string body = spec.substr(std::string("constant:").size());
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ConfigError("constant policy needs beta,gamma");
    ControlInput u;
    try {
        u.beta = std::stod(body.substr(0, comma));
        u.gamma = std::stod(body.substr(comma + 1));
    } catch (const std::exception&) {
        throw ConfigError("malformed constant policy '" + spec + "'");
    }
    return u;
}

Trajectory concatenate(Trajectory head, const Trajectory& tail, const ModelParams& p) {
    const double offset = head.times.back();
    for (std::size_t k = 0; k < tail.intervals(); ++k) {
        head.push(offset + tail.times[k + 1], tail.inputs[k], tail.cost_samples[k],
                  tail.states[k + 1], p);
    }
    head.clamp_events += tail.clamp_events;
    return head;
}

int cmd_simulate(const ScenarioConfig& cfg, const std::string& policy, double days,
                 const std::string& method_name, std::ostream& out) {
    Method method;
    if (method_name == "rk4") method = Method::rk4;
    else if (method_name == "euler") method = Method::euler;
    else throw ConfigError("unknown method '" + method_name + "'");

    Trajectory traj;
    if (policy == "holding-staged") {
        certify::StagedOptions opts;
        opts.method = method;
        opts.h = cfg.h;
        const certify::StagedResult staged = certify::staged_reach_XM(cfg.x0, cfg.p, opts);
        traj = staged.traj;
        out << "phase 1 end: " << format_double(staged.t_phase1_end) << '\n';
        out << "beta nominal from: " << fmt_opt(staged.t_beta_nominal) << '\n';
        out << "gamma nominal from: " << fmt_opt(staged.t_gamma_nominal) << '\n';
        const double remaining = days - staged.t_reach;
        if (remaining > 0.0) {
            const double span = std::ceil(remaining / cfg.h - 1e-9) * cfg.h;
            const Trajectory tail = simulate(traj.states.back(),
                                             PiecewiseConstant{cfg.h, {nominal_input(cfg.p)}}, span,
                                             cfg.h, method, cfg.p);
            traj = concatenate(std::move(traj), tail, cfg.p);
        }
    } else {
        ControlInput u;
        if (policy == "nominal") u = nominal_input(cfg.p);
        else if (policy == "maximal") u = maximal_input(cfg.p);
        else if (policy.rfind("constant:", 0) == 0) u = parse_constant_policy(policy);
        else throw ConfigError("unknown policy '" + policy + "'");
        traj = simulate(cfg.x0, PiecewiseConstant{cfg.h, {u}}, days, cfg.h, method, cfg.p);
    }

    const fs::path dir(cfg.out);
    write_effective_config(cfg, dir);
    auto os = open_output(dir, "trajectory.csv");
    write_trajectory_csv(os, traj);

    if (traj.started_outside_X) out << "warning: initial state is outside X\n";
    out << "X_A entry: " << fmt_opt(traj.xa_entry) << '\n';
    out << "X_M entry: " << fmt_opt(traj.xm_entry) << '\n';
    out << "constraint violation: " << fmt_opt(traj.first_violation) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct RunSummary {
    int code = kOk;
    std::string message;
    std::vector<double> lifetimes;
    double max_i = 0.0;
    std::size_t iterations = 0;
    mpc::MpcStatus status = mpc::MpcStatus::terminated;
};

RunSummary run_and_write(const ScenarioConfig& cfg, const fs::path& dir) {
    RunSummary s;
    const mpc::MpcResult result = mpc::run_mpc(cfg.x0, cfg.mpc_config());
    s.status = result.status;
    s.iterations = result.log.size();
    for (const State& x : result.traj.states) s.max_i = std::max(s.max_i, x.i);

    write_effective_config(cfg, dir);
    {
        auto os = open_output(dir, "closed_loop.csv");
        write_closed_loop_csv(os, result);
    }
    {
        auto os = open_output(dir, "mpc_log.txt");
        mpc::write_log(os, result.log);
    }

    const auto thresholds = mpc::default_thresholds();
    try {
        s.lifetimes = mpc::epidemic_lifetime(result.traj, thresholds);
        auto os = open_output(dir, "lifetime.csv");
        write_lifetime_csv(os, thresholds, s.lifetimes);
    } catch (const DomainError&) {
        s.lifetimes.clear();
    }

    if (result.status == mpc::MpcStatus::infeasible) {
        s.code = kInfeasible;
        s.message = "infeasible OCP at iteration " + std::to_string(*result.failed_iteration);
    } else if (result.status == mpc::MpcStatus::max_days) {
        s.code = kMaxDays;
        s.message = "termination tolerance not reached within max_sim_days";
    }
    return s;
}

void print_lifetimes(std::ostream& out, const std::vector<double>& days) {
    const auto thresholds = mpc::default_thresholds();
    out << "lifetime (days):";
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        out << ' ' << format_double(thresholds[j]) << '='
            << (j < days.size() ? format_double(days[j]) : "n/a");
    }
    out << '\n';
}

int cmd_mpc(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    const RunSummary s = run_and_write(cfg, cfg.out);
    out << "iterations: " << s.iterations << '\n';
    out << "max I: " << format_double(s.max_i) << '\n';
    print_lifetimes(out, s.lifetimes);
    if (s.code != kOk) err << "error: " << s.message << '\n';
    return s.code;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::vector<double>& lambdas, std::ostream& out,
              std::ostream& err) {
    for (double l : lambdas) {
        if (!(l > 0.0 && l <= 1.0)) throw DomainError("lambda values must lie in (0, 1]");
    }
    const fs::path root(cfg.out);
    write_effective_config(cfg, root);

    std::vector<RunSummary> rows(lambdas.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < lambdas.size();) {
            ScenarioConfig run = cfg;
            run.p.lambda = lambdas[j];
            run.out = (root / ("lambda_" + format_double(lambdas[j]))).string();
            try {
                rows[j] = run_and_write(run, run.out);
            } catch (const std::exception& e) {
                rows[j].code = kDomainError;
                rows[j].message = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = sweep_threads(lambdas.size());
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    const auto thresholds = mpc::default_thresholds();
    auto os = open_output(root, "lifetime_table.csv");
    os << kSchema << "lambda,status";
    for (double th : thresholds) os << ",days_" << format_double(th);
    os << ",max_I,iterations\n";
    int code = kOk;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        const RunSummary& r = rows[j];
        os << format_double(lambdas[j]) << ',' << (r.code == kOk ? "ok" : "failed");
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            os << ',' << (k < r.lifetimes.size() ? format_double(r.lifetimes[k]) : "");
        }
        os << ',' << format_double(r.max_i) << ',' << r.iterations << '\n';

        out << "lambda " << format_double(lambdas[j]) << ": ";
        print_lifetimes(out, r.lifetimes);
        if (r.code != kOk) {
            err << "lambda " << format_double(lambdas[j]) << ": " << r.message << '\n';
            if (code == kOk) code = r.code;
        }
    }
    return code;
}

// ---------------------------------------------------------------------------

int cmd_ocp(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
    const ocp::OcpSpec spec{cfg.x0, cfg.horizon(), cfg.h, cfg.p};
    const ocp::OcpSolution sol = ocp::solve(spec);

    const fs::path dir(cfg.out);
    write_effective_config(cfg, dir);
    auto os = open_output(dir, "ocp_solution.csv");
    write_trajectory_csv(os, sol.traj);

    out << "status: " << ocp::to_string(sol.status) << '\n';
    out << "cost: " << format_double(sol.cost) << '\n';
    out << "kkt residual: " << format_double(sol.kkt_residual) << '\n';
    out << "constraint violation: " << format_double(sol.constraint_violation) << '\n';
    out << "outer/inner iterations: " << sol.outer_iterations << '/' << sol.inner_iterations << '\n';
    if (!sol.feasible(ocp::SolverOptions{}.feas_tol)) {
        err << "error: no feasible solution found\n";
        return kInfeasible;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& all_checks() {
    static const std::vector<std::string> checks{"boundary-mesh", "xm-invariance", "bound-c",
                                                 "decay",         "cost-controllability",
                                                 "a3",            "staged",
                                                 "lyapunov"};
    return checks;
}

certify::CertReport run_check(const std::string& check, const ScenarioConfig& cfg,
                              std::size_t samples, const std::string& from_log) {
    const auto n_or = [&](std::size_t fallback) { return samples ? samples : fallback; };
    const ModelParams& p = cfg.p;
    if (check == "boundary-mesh") return certify::check_boundary_mesh(p);
    if (check == "xm-invariance") {
        certify::InvarianceOptions opts;
        opts.seed = cfg.seed;
        return certify::check_XM_invariance(p, n_or(1000), opts);
    }
    if (check == "bound-c") return certify::check_bound_C(p, n_or(200), cfg.seed);
    if (check == "decay") {
        const certify::DecayFit fit = certify::estimate_decay(p, std::max<std::size_t>(n_or(200), 10), cfg.seed);
        certify::CertReport r;
        r.check = "decay_fit";
        r.samples = fit.samples_used;
        r.pass = fit.ok;
        r.worst_margin = fit.ok ? fit.rate : -1.0;
        r.add_metric("gamma", fit.gamma);
        r.add_metric("rate", fit.rate);
        r.add_metric("fit_rmse", fit.fit_rmse);
        return r;
    }
    if (check == "cost-controllability") {
        return certify::cost_controllability(p, std::max<std::size_t>(n_or(200), 10), cfg.seed).report;
    }
    if (check == "a3") {
        certify::Rng rng(cfg.seed);
        const auto starts = certify::sample_A_prime_inner(p, n_or(200), rng);
        std::vector<double> deltas;
        for (double d : {0.25, 1.0, 5.0, 20.0}) {
            if (d <= cfg.horizon()) deltas.push_back(d);
        }
        if (deltas.empty() || deltas.back() != cfg.horizon()) deltas.push_back(cfg.horizon());
        certify::A3Options opts;
        opts.h = cfg.h;
        return certify::check_A3(p, cfg.horizon(), starts, deltas, opts);
    }
    if (check == "staged") {
        certify::CertReport r;
        r.check = "staged_reach";
        r.samples = 1;
        try {
            const certify::StagedResult s = certify::staged_reach_XM(cfg.x0, p);
            double max_i = 0.0;
            for (const State& x : s.traj.states) max_i = std::max(max_i, x.i);
            r.worst_margin = p.i_max - max_i;
            r.pass = r.worst_margin >= 0.0;
            r.add_metric("t_reach", s.t_reach);
            r.add_metric("cost", s.traj.cost_integral());
            r.add_metric("max_I", max_i);
        } catch (const std::exception& e) {
            r.worst_margin = -1.0;
            r.details.push_back(e.what());
        }
        return r;
    }
    if (check == "lyapunov") {
        mpc::MpcLog log;
        if (!from_log.empty()) {
            std::ifstream in(from_log);
            if (!in) throw ConfigError("cannot open log " + from_log);
            log = mpc::read_log(in);
        } else {
            log = mpc::run_mpc(cfg.x0, cfg.mpc_config()).log;
        }
        return certify::lyapunov_report(log);
    }
    throw ConfigError("unknown check '" + check + "'");
}

int cmd_certify(const ScenarioConfig& cfg, std::vector<std::string> checks, std::size_t samples,
                const std::string& from_log, std::ostream& out) {
    if (checks.empty() || std::find(checks.begin(), checks.end(), "all") != checks.end()) {
        checks = all_checks();
    }
    std::vector<certify::CertReport> reports;
    bool pass = true;
    for (const std::string& c : checks) {
        reports.push_back(run_check(c, cfg, samples, from_log));
        certify::write_report_text(out, reports.back());
        pass = pass && reports.back().pass;
    }
    const fs::path dir(cfg.out);
    write_effective_config(cfg, dir);
    auto os = open_output(dir, "certify_report.csv");
    certify::write_report_csv(os, reports);
    return pass ? kOk : kCertifyFailed;
}

}  // namespace

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kSchema << "t,S,E,I,R,beta,gamma,stage_cost\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const State& x = traj.states[k];
        os << format_double(traj.times[k]) << ',' << format_double(x.s) << ',' << format_double(x.e)
           << ',' << format_double(x.i) << ',' << format_double(x.removed()) << ',';
        if (k < traj.intervals()) {
            os << format_double(traj.inputs[k].beta) << ',' << format_double(traj.inputs[k].gamma)
               << ',' << format_double(traj.cost_samples[k]);
        } else {
            os << ",,";
        }
        os << '\n';
    }
}

void write_closed_loop_csv(std::ostream& os, const mpc::MpcResult& result) {
    const Trajectory& traj = result.traj;
    os << kSchema << "t,S,E,I,R,beta,gamma,stage_cost,V_T,decrease_margin\n";
    std::size_t next_rec = 0;
    const double tol = 1e-9;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const State& x = traj.states[k];
        os << format_double(traj.times[k]) << ',' << format_double(x.s) << ',' << format_double(x.e)
           << ',' << format_double(x.i) << ',' << format_double(x.removed()) << ',';
        if (k < traj.intervals()) {
            os << format_double(traj.inputs[k].beta) << ',' << format_double(traj.inputs[k].gamma)
               << ',' << format_double(traj.cost_samples[k]);
        } else {
            os << ",,";
        }
        os << ',';
        if (next_rec < result.log.size() && std::abs(result.log[next_rec].t - traj.times[k]) <= tol) {
            const mpc::IterationRecord& r = result.log[next_rec++];
            os << format_double(r.value) << ',' << format_double(r.decrease_margin);
        } else {
            os << ',';
        }
        os << '\n';
    }
}

std::size_t sweep_threads(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SEIR_MPC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = std::min(n, static_cast<std::size_t>(v));
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Model predictive control of the SEIR epidemic model", "seir-mpc"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print this help message and exit");  // -h is taken by --h

    CommonFlags sim_f, mpc_f, sweep_f, ocp_f, cert_f;
    std::string policy = "nominal";
    std::string method = "rk4";
    double days = 300.0;
    std::vector<double> lambdas{0.01, 0.2, 0.5, 0.7, 0.99};
    std::vector<std::string> checks;
    std::size_t samples = 0;
    std::string from_log;

    CLI::App* sim = app.add_subcommand("simulate", "Open-loop simulation under a fixed policy");
    add_common(sim, sim_f);
    sim->add_option("--policy", policy, "nominal | maximal | holding-staged | constant:<beta>,<gamma>");
    sim->add_option("--days", days, "Simulated days")->check(CLI::PositiveNumber);
    sim->add_option("--method", method, "rk4 | euler");

    CLI::App* mpc_cmd = app.add_subcommand("mpc", "Closed-loop MPC run");
    add_common(mpc_cmd, mpc_f);

    CLI::App* sweep = app.add_subcommand("sweep-lambda", "MPC runs over a list of lambda values");
    add_common(sweep, sweep_f);
    sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values")->delimiter(',');

    CLI::App* ocp_cmd = app.add_subcommand("ocp", "Single open-loop optimal control solve");
    add_common(ocp_cmd, ocp_f);

    CLI::App* cert = app.add_subcommand("certify", "Numerical certificates");
    add_common(cert, cert_f);
    cert->add_option("--check", checks, "Checks to run (default: all)")->delimiter(',');
    cert->add_option("--samples", samples, "Sample count override");
    cert->add_option("--from-log", from_log, "MPC log for the lyapunov check");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(resolve(sim_f), policy, days, method, out);
        if (mpc_cmd->parsed()) return cmd_mpc(resolve(mpc_f), out, err);
        if (sweep->parsed()) return cmd_sweep(resolve(sweep_f), lambdas, out, err);
        if (ocp_cmd->parsed()) return cmd_ocp(resolve(ocp_f), out, err);
        if (cert->parsed()) return cmd_certify(resolve(cert_f), checks, samples, from_log, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kDomainError;
    } catch (const certify::ConstraintViolation& e) {
        err << "constraint violation: " << e.what() << '\n';
        return kInfeasible;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << '\n';
        return kMaxDays;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
    return kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int j = 1; j < argc; ++j) args.emplace_back(argv[j]);
    return run_cli(args, out, err);
}

}  // namespace seir::cli

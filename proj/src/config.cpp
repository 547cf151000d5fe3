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

#include "seir_mpc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>

namespace seir::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(text) + "'");
    }
    return v;
}

void set_horizon(ScenarioConfig& cfg, double horizon) {
    const double n = horizon / cfg.delta;
    const double rounded = std::round(n);
    if (!(rounded >= 1.0) || std::abs(n - rounded) > 1e-9 * rounded) {
        throw ConfigError("T must be a positive integer multiple of delta");
    }
    cfg.n_steps = static_cast<int>(rounded);
}

}  // namespace

mpc::MpcConfig ScenarioConfig::mpc_config() const {
    mpc::MpcConfig m;
    m.delta = delta;
    m.n_steps = n_steps;
    m.h = h;
    m.termination_tol = termination_tol;
    m.max_sim_days = max_sim_days;
    m.p = p;
    return m;
}

void ScenarioConfig::validate() const {
    mpc_config().validate();
    check_state(x0);
}

const std::vector<std::string_view>& config_keys() {
    static const std::vector<std::string_view> keys{
        "beta_min", "beta_nom", "gamma_nom", "gamma_max", "eta",           "i_max",
        "epsilon",  "lambda",   "x0",        "delta",     "N",             "T",
        "h",        "termination_tol",       "max_sim_days", "seed", "out"};
    return keys;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

State parse_triple(std::string_view text) {
    double parts[3];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                             : comma - start);
        if (count == 3) throw ConfigError("x0 needs exactly three components");
        parts[count++] = to_double("x0", piece);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (count != 3) throw ConfigError("x0 needs exactly three components");
    return {parts[0], parts[1], parts[2]};
}

void set_key(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
    value = trim(value);
    ModelParams& p = cfg.p;
    if (key == "beta_min") p.beta_min = to_double(key, value);
    else if (key == "beta_nom") p.beta_nom = to_double(key, value);
    else if (key == "gamma_nom") p.gamma_nom = to_double(key, value);
    else if (key == "gamma_max") p.gamma_max = to_double(key, value);
    else if (key == "eta") p.eta = to_double(key, value);
    else if (key == "i_max") p.i_max = to_double(key, value);
    else if (key == "epsilon") p.epsilon = to_double(key, value);
    else if (key == "lambda") p.lambda = to_double(key, value);
    else if (key == "x0") cfg.x0 = parse_triple(value);
    else if (key == "delta") cfg.delta = to_double(key, value);
    else if (key == "N") {
        const std::uint64_t n = to_uint(key, value);
        if (n < 1 || n > 1000000) throw ConfigError("N must be between 1 and 1000000");
        cfg.n_steps = static_cast<int>(n);
    } else if (key == "T") set_horizon(cfg, to_double(key, value));
    else if (key == "h") cfg.h = to_double(key, value);
    else if (key == "termination_tol") cfg.termination_tol = to_double(key, value);
    else if (key == "max_sim_days") cfg.max_sim_days = to_double(key, value);
    else if (key == "seed") cfg.seed = to_uint(key, value);
    else if (key == "out") {
        if (value.empty()) throw ConfigError("out must not be empty");
        cfg.out = std::string(value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

ScenarioConfig parse_config(std::istream& is, ScenarioConfig base) {
    std::set<std::string> seen;
    std::optional<std::string> horizon;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(view.substr(0, eq)));
        const std::string_view value = trim(view.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        try {
            if (key == "T") {
                horizon = std::string(value);
            } else {
                set_key(base, key, value);
            }
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (horizon) {
        if (seen.count("N")) throw ConfigError("N and T are mutually exclusive");
        set_key(base, "T", *horizon);
    }
    return base;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, std::move(base));
}

std::string serialize_config(const ScenarioConfig& cfg) {
    const ModelParams& p = cfg.p;
    std::ostringstream os;
    os << "# seir-mpc effective configuration\n";
    os << "beta_min = " << format_double(p.beta_min) << '\n';
    os << "beta_nom = " << format_double(p.beta_nom) << '\n';
    os << "gamma_nom = " << format_double(p.gamma_nom) << '\n';
    os << "gamma_max = " << format_double(p.gamma_max) << '\n';
    os << "eta = " << format_double(p.eta) << '\n';
    os << "i_max = " << format_double(p.i_max) << '\n';
    os << "epsilon = " << format_double(p.epsilon) << '\n';
    os << "lambda = " << format_double(p.lambda) << '\n';
    os << "x0 = " << format_double(cfg.x0.s) << ',' << format_double(cfg.x0.e) << ','
       << format_double(cfg.x0.i) << '\n';
    os << "delta = " << format_double(cfg.delta) << '\n';
    os << "N = " << cfg.n_steps << '\n';
    os << "h = " << format_double(cfg.h) << '\n';
    os << "termination_tol = " << format_double(cfg.termination_tol) << '\n';
    os << "max_sim_days = " << format_double(cfg.max_sim_days) << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "out = " << cfg.out << '\n';
    return os.str();
}

}  // namespace seir::cli

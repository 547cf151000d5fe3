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

// Scenario configuration: a flat `key = value` file with `#` comments.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seir_mpc/model.hpp"
#include "seir_mpc/mpc.hpp"

namespace seir::cli {

/// Malformed configuration text: unknown key, bad number, duplicate key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    ModelParams p;
    State x0{0.5, 0.18, 0.01};
    double delta = 1.0;
    int n_steps = 20;
    double h = 0.25;
    double termination_tol = 1e-8;
    double max_sim_days = 5000.0;
    std::uint64_t seed = 1;
    std::string out = "out";

    double horizon() const { return n_steps * delta; }
    mpc::MpcConfig mpc_config() const;
    /// Throws DomainError for values outside their valid ranges.
    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Recognised keys, in serialization order.
const std::vector<std::string_view>& config_keys();

/// Applies one key. `T` is resolved against the current delta. Throws ConfigError.
void set_key(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Parses on top of `base`. Keys may appear at most once; `N` and `T` are
/// mutually exclusive, and `T` is resolved after `delta` regardless of order.
ScenarioConfig parse_config(std::istream& is, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base = {});

/// Text that parse_config maps back to an equal configuration.
std::string serialize_config(const ScenarioConfig& cfg);

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

/// Parses "a,b,c" into a state. Throws ConfigError.
State parse_triple(std::string_view text);

}  // namespace seir::cli

/*
* Copyright (C) 2026 cswarm contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef CSWARM_CONFIG_HPP
#define CSWARM_CONFIG_HPP

#include "cswarm/density.hpp"
#include "cswarm/diffdrive.hpp"
#include "cswarm/kernel.hpp"
#include "cswarm/oracle.hpp"
#include "cswarm/swarm.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cswarm
{

/// Configuration problem; field() is the dotted key that caused it.
class ConfigError : public std::invalid_argument
{
public:
    ConfigError(std::string field, const std::string& constraint);
    const std::string& field() const
    {
        return m_field;
    }

private:
    std::string m_field;
};

struct NetworkConfig {
    bool enabled     = false;
    std::string host = "127.0.0.1";
    int port         = 5757;
    double fps       = 20.0;
    double frame_timeout   = 2.0;
    /// Seconds the station waits for every robot to connect.
    double connect_timeout = 60.0;
    double drop_probability = 0.0;
};

struct ExtendedDomainConfig {
    bool enabled = false;
    /// Outer density as a fraction of the peak of the embedded target.
    double floor   = 1e-3;
    int seam_cells = 4;
};

struct OutputConfig {
    std::string directory = "cswarm-out";
    /// Snapshot times; empty means {0, T/2, T}.
    std::vector<double> snapshots;
    bool write_fields = true;
};

struct OracleConfig {
    /// Total mass of the continuum densities.
    double mass     = 1.0;
    int grid        = 128;
    double dt       = 1e-3;
    double duration = 1.0;
    MacroIntegrator integrator = MacroIntegrator::euler;
    int record_every           = 1;
};

struct ScenarioConfig {
    std::string name = "custom";
    int dimension    = 2;
    int grid         = 200;
    double dt        = 0.01;
    double duration  = 10.0;
    std::uint64_t seed = 1;

    int n_virtual  = 100;
    int n_robots   = 0;
    /// Uniform start jitter in units of the lattice step.
    double jitter  = 0.0;
    double heading = 0.0;

    KernelSpec kernel;
    KDEParams kde;
    double k_p          = 5.0;
    int fourier_modes   = 0;
    /// Floor on the density when dividing the flux, as a fraction of the uniform density N / (2 pi)^d.
    double rho_floor    = 1e-3;
    bool target_feedforward = true;
    double mass_tolerance   = 1e-6;
    InteractionMode interaction = InteractionMode::direct;

    /// Target modes and mean trajectories; total_mass is always the agent count.
    std::vector<ModeProgram> target;
    ExtendedDomainConfig extended;

    RobotLimits limits;
    double tracking_gain = 10.0;
    double pose_noise    = 0.0;

    NetworkConfig network;
    OutputConfig output;
    OracleConfig oracle;

    std::size_t agent_count() const
    {
        return static_cast<std::size_t>(n_virtual + n_robots);
    }
    TargetProgram target_program() const;
    /// Snapshot times with the default applied.
    std::vector<double> snapshot_times() const;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

nlohmann::ordered_json to_json(const ScenarioConfig& config);
/// Strict: unknown keys and wrongly typed values raise ConfigError. Missing keys keep their defaults.
ScenarioConfig config_from_json(const nlohmann::ordered_json& j);
ScenarioConfig load_config(const std::string& path);
/// Canonical, re-loadable rendering of the configuration.
std::string dump_config(const ScenarioConfig& config);

/// Applies "a.b.c=value"; value is read as JSON when it parses, as a string otherwise.
/// The key must already exist in the configuration.
ScenarioConfig apply_override(const ScenarioConfig& config, const std::string& assignment);

std::vector<std::string> preset_names();
/// Throws ConfigError (field "preset") for an unknown name.
ScenarioConfig preset(const std::string& name);

} // namespace cswarm

#endif // CSWARM_CONFIG_HPP

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
#ifndef CSWARM_SCENARIO_HPP
#define CSWARM_SCENARIO_HPP

#include "cswarm/config.hpp"
#include "cswarm/metrics.hpp"
#include "cswarm/oracle.hpp"
#include "cswarm/swarm.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cswarm
{

/**
 * With the extended domain the loop integrates in y = x / 2 and tau = t / 2 on a doubled grid,
 * where the arena is the middle half of the canonical torus. Velocities keep their values,
 * rates (gains, turn rates) double and lengths halve. Without it the scale is 1.
 */
double coordinate_scale(const ScenarioConfig& config);
LoopParams loop_params(const ScenarioConfig& config);

/// Desired density and its time derivative in loop coordinates, indexed by arena time.
class TargetSchedule
{
public:
    explicit TargetSchedule(const ScenarioConfig& config);
    ScalarField at(double t) const;
    /// Derivative with respect to loop time; nullopt for a static target.
    std::optional<ScalarField> rate(double t) const;
    const Grid& grid() const
    {
        return m_loop_grid;
    }

private:
    ScenarioConfig m_config;
    TargetProgram m_program;
    Grid m_arena_grid;
    Grid m_loop_grid;
};

/// Lattice start in arena coordinates.
SwarmState initial_state(const ScenarioConfig& config);

struct ScenarioResult {
    TrialTrace trace;
    /// Final positions in arena coordinates.
    SwarmState final_state;
    /// Integral of the density estimate, per frame.
    std::vector<double> kde_mass;
    /// Root mean square over robots of the point-B tracking error (arena units), per frame.
    std::vector<double> tracking_rms;
    /// Robot midpoints per frame (arena coordinates), flattened robot-major within a frame.
    std::vector<std::vector<Point>> robot_paths;
    double wall_seconds = 0.0;
};

struct RunOptions {
    bool write_outputs = true;
    /// Overrides the robot backend chosen from the configuration.
    RobotBackend* backend = nullptr;
    /// Overrides the lattice start (arena coordinates).
    std::optional<SwarmState> initial;
    std::function<void(const FrameResult&)> observer;
};

/// Runs duration / dt frames. Writes config.json first, then trace.csv, snapshots and summary.json.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Continuum oracle from the uniform density towards the target at t = 0 (oracle.* settings).
/// Writes oracle.csv when write_outputs is set.
MacroTrace run_oracle(const ScenarioConfig& config, bool write_outputs = true);

class FieldFormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Header line "# cswarm-field dim=<d> G=<G> components=<c> order=row-major-x1-fastest", then one
/// value per line in %.17g.
void export_field(const ScalarField& field, const std::string& path);
void export_field(const VectorField& field, const std::string& path);
/// With an expected grid, a mismatch raises FieldFormatError naming expected and actual.
ScalarField import_scalar_field(const std::string& path, const std::optional<Grid>& expected = std::nullopt);
VectorField import_vector_field(const std::string& path, const std::optional<Grid>& expected = std::nullopt);

} // namespace cswarm

#endif // CSWARM_SCENARIO_HPP

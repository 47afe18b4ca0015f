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
#ifndef CSWARM_SWARM_HPP
#define CSWARM_SWARM_HPP

#include "cswarm/control.hpp"
#include "cswarm/density.hpp"
#include "cswarm/diffdrive.hpp"
#include "cswarm/kernel.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace cswarm
{

struct SwarmState {
    std::vector<Point> virtual_agents;
    std::vector<RobotState> robots;
    double t  = 0.0;
    long step = 0;

    std::size_t size() const
    {
        return virtual_agents.size() + robots.size();
    }
    /// Virtual agents first, then robot wheel midpoints.
    std::vector<Point> all_positions() const;
};

/// Sum of the periodized kernel over every partner k != i.
Point interaction_sum(std::span<const Point> positions, std::size_t i, const KernelSpec& kernel);
/// Same, evaluated at an arbitrary point against every position except skip (if any).
Point interaction_at(const Point& x, std::span<const Point> positions, const KernelSpec& kernel,
                     std::optional<std::size_t> skip = std::nullopt);

enum class InteractionMode
{
    direct,
    grid,
};

/// Interaction sums for every position: direct pairwise, or by sampling the grid
/// convolution of the kernel with the nearest-node deposit (self term removed).
std::vector<Point> interaction_sums(std::span<const Point> positions, const KernelSpec& kernel, const Grid& grid,
                                    InteractionMode mode);

/// Moves the virtual agents by dt * (interaction + input) and wraps. Robots are left alone.
SwarmState euler_step(const SwarmState& state, std::span<const Point> inputs, const KernelSpec& kernel, double dt,
                      const Grid& grid, InteractionMode mode = InteractionMode::direct);

/// Desired motion handed to a robot for one frame.
struct RobotReference {
    Point x_des{0.0, 0.0};
    Point v_des{0.0, 0.0};
};

/// Moves the robots towards their references. The in-process backend integrates the
/// kinematics directly; the network backend relays commands to remote clients.
class RobotBackend
{
public:
    virtual ~RobotBackend() = default;
    virtual std::vector<RobotState> actuate(const std::vector<RobotState>& robots,
                                            const std::vector<RobotReference>& refs, double dt) = 0;
};

struct LoopParams {
    Grid grid{2, 200};
    KernelSpec kernel;
    KDEParams kde;
    ControlGains gains;
    RobotLimits limits;
    double tracking_gain = 10.0;
    double dt            = 0.01;
    InteractionMode interaction = InteractionMode::direct;
    /// Standard deviation of the Gaussian noise on observed robot poses; 0 disables it.
    double pose_noise = 0.0;
};

class InProcessRobots : public RobotBackend
{
public:
    InProcessRobots(const LoopParams& params, std::uint64_t seed = 0);
    std::vector<RobotState> actuate(const std::vector<RobotState>& robots, const std::vector<RobotReference>& refs,
                                    double dt) override;

private:
    RobotLimits m_limits;
    double m_gain;
    double m_noise;
    std::mt19937_64 m_rng;
};

struct FrameRecord {
    long step = 0;
    double t  = 0.0;
    double error_sq = 0.0;
    double kl       = 0.0;
    double mass     = 0.0;
    std::vector<Point> positions;
    /// Point-B distance to the reference, per robot, after actuation.
    std::vector<double> tracking_error;
};

struct FrameResult {
    SwarmState state;
    ControlFields fields;
    FrameRecord record;
    ScalarField density;
};

/**
 * One frame of the closed loop:
 * estimate the density of every agent, run the control chain against the target,
 * step the virtual agents, and drive each robot towards the point obtained by
 * advancing its reference with the local microscopic velocity.
 */
FrameResult closed_loop_frame(const SwarmState& state, const ScalarField& target,
                              const std::optional<ScalarField>& target_rate, const LoopParams& params,
                              RobotBackend& robots);

/// Lattice start: n_virtual + n_robots sites, robots spread evenly over the site list.
/// jitter is a uniform displacement amplitude in units of the lattice step.
SwarmState initial_lattice(std::size_t n_virtual, std::size_t n_robots, int dim, double jitter = 0.0,
                           std::uint64_t seed = 0, double heading = 0.0, double lookahead = 0.05);

/// Smallest wrapped pairwise distance.
double min_pairwise_distance(std::span<const Point> positions, int dim = 2);

} // namespace cswarm

#endif // CSWARM_SWARM_HPP

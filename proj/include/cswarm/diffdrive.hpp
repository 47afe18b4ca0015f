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
#ifndef CSWARM_DIFFDRIVE_HPP
#define CSWARM_DIFFDRIVE_HPP

#include "cswarm/domain.hpp"

namespace cswarm
{

/// Arena side 2 m maps to 2*pi, one time unit is 5 s.
namespace units
{
inline constexpr double meters_per_length  = 2.0 / two_pi;
inline constexpr double seconds_per_time   = 5.0;
inline constexpr double length_per_meter   = two_pi / 2.0;

inline constexpr double speed_to_nondim(double meters_per_second)
{
    return meters_per_second * length_per_meter * seconds_per_time;
}
inline constexpr double speed_to_si(double nondim)
{
    return nondim * meters_per_length / seconds_per_time;
}
inline constexpr double rate_to_nondim(double rad_per_second)
{
    return rad_per_second * seconds_per_time;
}
inline constexpr double rate_to_si(double nondim)
{
    return nondim / seconds_per_time;
}
} // namespace units

struct RobotLimits {
    double v_max     = units::speed_to_nondim(0.8);
    double omega_max = units::rate_to_nondim(14.0);
    double lookahead = 0.05;

    void validate() const;
};

struct WheelCommand {
    double v     = 0.0;
    double omega = 0.0;

    bool operator==(const WheelCommand&) const = default;
};

struct RobotState {
    /// Wheel midpoint.
    Point position{0.0, 0.0};
    double heading = 0.0;
    WheelCommand command;
    /// Desired position the point B is steered to (tracking-controller state).
    Point reference{0.0, 0.0};
};

/// Offset point at distance b ahead of the wheel midpoint.
Point point_b(const RobotState& state, double lookahead);

/// One forward-Euler step of the unicycle kinematics; wraps position and heading.
RobotState kinematics_step(const RobotState& state, const WheelCommand& u, double dt);

/// Joint scaling by min(1, V_max/|V|, w_max/|w|).
WheelCommand saturate(const WheelCommand& u, const RobotLimits& limits);

/// Input/output linearization about point B: V = v1 cos + v2 sin, w = (v2 cos - v1 sin)/b, then saturated.
WheelCommand feedback_linearize(const RobotState& state, const Point& v_des, const RobotLimits& limits);

/// Point-B tracking command: linearization of v_des + K_t (x_des - B).
WheelCommand tracking_command(const RobotState& state, const Point& x_des, const Point& v_des, double gain,
                              const RobotLimits& limits);

/// tracking_command followed by one kinematics step.
RobotState track_reference(const RobotState& state, const Point& x_des, const Point& v_des, double gain,
                           const RobotLimits& limits, double dt);

} // namespace cswarm

#endif // CSWARM_DIFFDRIVE_HPP

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
#include "cswarm/diffdrive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cswarm
{

void RobotLimits::validate() const
{
    if (!(v_max > 0.0) || !(omega_max > 0.0) || !(lookahead > 0.0)) {
        throw std::invalid_argument("robot limits (v_max, omega_max, lookahead) must be positive");
    }
}

Point point_b(const RobotState& state, double lookahead)
{
    return wrap_point({state.position[0] + lookahead * std::cos(state.heading),
                       state.position[1] + lookahead * std::sin(state.heading)});
}

RobotState kinematics_step(const RobotState& state, const WheelCommand& u, double dt)
{
    RobotState next = state;
    next.position   = wrap_point({state.position[0] + dt * u.v * std::cos(state.heading),
                                  state.position[1] + dt * u.v * std::sin(state.heading)});
    next.heading    = wrap_coordinate(state.heading + dt * u.omega);
    next.command    = u;
    return next;
}

WheelCommand saturate(const WheelCommand& u, const RobotLimits& limits)
{
    double scale = 1.0;
    if (std::abs(u.v) > 0.0) {
        scale = std::min(scale, limits.v_max / std::abs(u.v));
    }
    if (std::abs(u.omega) > 0.0) {
        scale = std::min(scale, limits.omega_max / std::abs(u.omega));
    }
    return {u.v * scale, u.omega * scale};
}

WheelCommand feedback_linearize(const RobotState& state, const Point& v_des, const RobotLimits& limits)
{
    const double c = std::cos(state.heading);
    const double s = std::sin(state.heading);
    WheelCommand u{v_des[0] * c + v_des[1] * s, (v_des[1] * c - v_des[0] * s) / limits.lookahead};
    return saturate(u, limits);
}

WheelCommand tracking_command(const RobotState& state, const Point& x_des, const Point& v_des, double gain,
                              const RobotLimits& limits)
{
    const Point err = wrapped_disp(x_des, point_b(state, limits.lookahead));
    return feedback_linearize(state, {v_des[0] + gain * err[0], v_des[1] + gain * err[1]}, limits);
}

RobotState track_reference(const RobotState& state, const Point& x_des, const Point& v_des, double gain,
                           const RobotLimits& limits, double dt)
{
    RobotState next = kinematics_step(state, tracking_command(state, x_des, v_des, gain, limits), dt);
    next.reference  = wrap_point(x_des);
    return next;
}

} // namespace cswarm

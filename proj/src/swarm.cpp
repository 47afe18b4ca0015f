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
#include "cswarm/swarm.hpp"

#include "cswarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cswarm
{

std::vector<Point> SwarmState::all_positions() const
{
    std::vector<Point> out(virtual_agents);
    out.reserve(size());
    for (const auto& r : robots) {
        out.push_back(r.position);
    }
    return out;
}

Point interaction_at(const Point& x, std::span<const Point> positions, const KernelSpec& kernel,
                     std::optional<std::size_t> skip)
{
    Point acc{0.0, 0.0};
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (skip && *skip == k) {
            continue;
        }
        const Point f = periodize(kernel, wrapped_disp(x, positions[k], kernel.dim));
        acc[0] += f[0];
        acc[1] += f[1];
    }
    return acc;
}

Point interaction_sum(std::span<const Point> positions, std::size_t i, const KernelSpec& kernel)
{
    if (i >= positions.size()) {
        throw std::out_of_range("interaction_sum: agent index out of range");
    }
    return interaction_at(positions[i], positions, kernel, i);
}

namespace
{

std::vector<Point> grid_interactions(std::span<const Point> positions, const KernelSpec& kernel, const Grid& grid)
{
    const auto table   = kernel_table(kernel, grid);
    const VectorField v = circ_conv(table->spectrum, deposit_nearest(positions, grid));
    const int g        = grid.cells_per_axis();
    const double h     = grid.spacing();

    // Sum of kernel values at displacement (node - own node), weighted like sample_bilinear.
    auto self_term = [&](const Point& x, std::size_t own) {
        std::array<int, 2> own_k{static_cast<int>(own % static_cast<std::size_t>(g)),
                                 grid.dim() == 2 ? static_cast<int>(own / static_cast<std::size_t>(g)) : 0};
        std::array<int, 2> lo{0, 0};
        std::array<double, 2> fr{0.0, 0.0};
        for (int a = 0; a < grid.dim(); ++a) {
            auto i   = static_cast<std::size_t>(a);
            double s = (wrap_coordinate(x[i]) + pi) / h;
            double f = std::floor(s);
            lo[i]    = ((static_cast<int>(f) % g) + g) % g;
            fr[i]    = s - f;
        }
        auto kernel_at = [&](int c1, int c2) {
            const int d1 = ((c1 - own_k[0] + g / 2) % g + g) % g;
            const int d2 = grid.dim() == 2 ? ((c2 - own_k[1] + g / 2) % g + g) % g : 0;
            const std::size_t idx = grid.index(d1, d2);
            return Point{table->field[0][idx], grid.dim() == 2 ? table->field[1][idx] : 0.0};
        };
        Point acc{0.0, 0.0};
        const int ny = grid.dim() == 2 ? 2 : 1;
        for (int b = 0; b < ny; ++b) {
            for (int a = 0; a < 2; ++a) {
                const double w = (a ? fr[0] : 1.0 - fr[0]) * (grid.dim() == 2 ? (b ? fr[1] : 1.0 - fr[1]) : 1.0);
                const Point k  = kernel_at((lo[0] + a) % g, (lo[1] + b) % g);
                acc[0] += w * k[0];
                acc[1] += w * k[1];
            }
        }
        return acc;
    };

    std::vector<Point> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
        Point s       = sample_bilinear(v, p);
        const Point z = self_term(p, nearest_node(grid, p));
        out.push_back({s[0] - z[0], s[1] - z[1]});
    }
    return out;
}

} // namespace

std::vector<Point> interaction_sums(std::span<const Point> positions, const KernelSpec& kernel, const Grid& grid,
                                    InteractionMode mode)
{
    if (mode == InteractionMode::grid) {
        return grid_interactions(positions, kernel, grid);
    }
    std::vector<Point> out;
    out.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        out.push_back(interaction_sum(positions, i, kernel));
    }
    return out;
}

SwarmState euler_step(const SwarmState& state, std::span<const Point> inputs, const KernelSpec& kernel, double dt,
                      const Grid& grid, InteractionMode mode)
{
    if (inputs.size() != state.virtual_agents.size()) {
        throw std::invalid_argument("euler_step: expected one input per virtual agent");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("euler_step: dt must be > 0");
    }
    const auto all  = state.all_positions();
    const auto sums = interaction_sums(all, kernel, grid, mode);
    SwarmState next = state;
    for (std::size_t i = 0; i < state.virtual_agents.size(); ++i) {
        const Point& x = state.virtual_agents[i];
        next.virtual_agents[i] = wrap_point(
            {x[0] + dt * (sums[i][0] + inputs[i][0]), x[1] + dt * (sums[i][1] + inputs[i][1])}, kernel.dim);
    }
    next.step = state.step + 1;
    next.t    = static_cast<double>(next.step) * dt;
    return next;
}

InProcessRobots::InProcessRobots(const LoopParams& params, std::uint64_t seed)
    : m_limits(params.limits)
    , m_gain(params.tracking_gain)
    , m_noise(params.pose_noise)
    , m_rng(seed)
{
}

std::vector<RobotState> InProcessRobots::actuate(const std::vector<RobotState>& robots,
                                                 const std::vector<RobotReference>& refs, double dt)
{
    std::vector<RobotState> out;
    out.reserve(robots.size());
    std::normal_distribution<double> noise(0.0, m_noise > 0.0 ? m_noise : 1.0);
    for (std::size_t i = 0; i < robots.size(); ++i) {
        RobotState observed = robots[i];
        if (m_noise > 0.0) {
            observed.position = wrap_point({observed.position[0] + noise(m_rng), observed.position[1] + noise(m_rng)});
        }
        const WheelCommand u = tracking_command(observed, refs[i].x_des, refs[i].v_des, m_gain, m_limits);
        RobotState next      = kinematics_step(robots[i], u, dt);
        next.reference       = wrap_point(refs[i].x_des);
        out.push_back(next);
    }
    return out;
}

FrameResult closed_loop_frame(const SwarmState& state, const ScalarField& target,
                              const std::optional<ScalarField>& target_rate, const LoopParams& params,
                              RobotBackend& robots)
{
    const Grid& grid = params.grid;
    const auto all   = state.all_positions();
    if (all.empty()) {
        throw std::invalid_argument("closed_loop_frame: empty swarm");
    }

    ScalarField rho      = estimate_density(all, params.kde, grid);
    ControlFields fields = control_step(rho, target, params.kernel, params.gains, target_rate);

    FrameRecord rec;
    rec.step     = state.step;
    rec.t        = state.t;
    rec.mass     = integrate(rho);
    const double err = l2_error(rho, target);
    rec.error_sq = err * err;
    rec.kl       = kl_divergence(rho, target, default_kl_floor(integrate(target), grid.dim()));
    rec.positions = all;

    const auto inputs = microscopic_inputs(fields.u, state.virtual_agents);
    SwarmState next   = euler_step(state, inputs, params.kernel, params.dt, grid, params.interaction);

    if (!state.robots.empty()) {
        // The reference of each robot moves like a virtual agent would at that point.
        std::vector<RobotReference> refs;
        refs.reserve(state.robots.size());
        const std::size_t offset = state.virtual_agents.size();
        for (std::size_t r = 0; r < state.robots.size(); ++r) {
            const Point& ref = state.robots[r].reference;
            const Point f    = interaction_at(ref, all, params.kernel, offset + r);
            const Point u    = sample_bilinear(fields.u, ref);
            const Point v{f[0] + u[0], f[1] + u[1]};
            refs.push_back({wrap_point({ref[0] + params.dt * v[0], ref[1] + params.dt * v[1]}), v});
        }
        next.robots = robots.actuate(state.robots, refs, params.dt);
        for (std::size_t r = 0; r < next.robots.size(); ++r) {
            const Point b = point_b(next.robots[r], params.limits.lookahead);
            rec.tracking_error.push_back(norm(wrapped_disp(next.robots[r].reference, b)));
        }
    }
    return {std::move(next), std::move(fields), std::move(rec), std::move(rho)};
}

SwarmState initial_lattice(std::size_t n_virtual, std::size_t n_robots, int dim, double jitter, std::uint64_t seed,
                           double heading, double lookahead)
{
    const std::size_t n = n_virtual + n_robots;
    if (n == 0) {
        throw std::invalid_argument("initial_lattice: at least one agent is required");
    }
    std::vector<Point> sites = square_lattice(n, dim);
    if (jitter > 0.0) {
        const double side = dim == 1 ? static_cast<double>(n) : std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12);
        const double amp  = jitter * two_pi / side;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-amp, amp);
        for (auto& p : sites) {
            p[0] += u(rng);
            if (dim == 2) {
                p[1] += u(rng);
            }
            p = wrap_point(p, dim);
        }
    }
    std::vector<bool> is_robot(n, false);
    for (std::size_t k = 0; k < n_robots; ++k) {
        // Evenly spaced picks; distinct because n >= n_robots.
        is_robot[(2 * k + 1) * n / (2 * n_robots)] = true;
    }
    SwarmState s;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_robot[i]) {
            RobotState r;
            r.position  = sites[i];
            r.heading   = wrap_coordinate(heading);
            r.reference = point_b(r, lookahead);
            s.robots.push_back(r);
        }
        else {
            s.virtual_agents.push_back(sites[i]);
        }
    }
    return s;
}

double min_pairwise_distance(std::span<const Point> positions, int dim)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t k = i + 1; k < positions.size(); ++k) {
            best = std::min(best, norm(wrapped_disp(positions[i], positions[k], dim)));
        }
    }
    return best;
}

} // namespace cswarm

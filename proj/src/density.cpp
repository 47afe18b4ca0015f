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
#include "cswarm/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cswarm
{

void KDEParams::validate() const
{
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("kde bandwidth must be > 0");
    }
}

std::size_t nearest_node(const Grid& grid, const Point& x)
{
    const int g = grid.cells_per_axis();
    std::array<int, 2> k{0, 0};
    for (int a = 0; a < grid.dim(); ++a) {
        auto i   = static_cast<std::size_t>(a);
        double s = (wrap_coordinate(x[i]) + pi) / grid.spacing();
        k[i]     = static_cast<int>(std::lround(s)) % g;
    }
    return grid.index(k[0], k[1]);
}

ScalarField deposit_nearest(std::span<const Point> positions, const Grid& grid)
{
    ScalarField out(grid);
    const double unit = 1.0 / grid.cell_volume();
    for (const auto& p : positions) {
        out[nearest_node(grid, p)] += unit;
    }
    return out;
}

ScalarField deposit_linear(std::span<const Point> positions, const Grid& grid)
{
    ScalarField out(grid);
    const double unit = 1.0 / grid.cell_volume();
    const int g       = grid.cells_per_axis();
    const double h    = grid.spacing();
    for (const auto& p : positions) {
        std::array<int, 2> lo{0, 0};
        std::array<double, 2> fr{0.0, 0.0};
        for (int a = 0; a < grid.dim(); ++a) {
            const auto i   = static_cast<std::size_t>(a);
            const double s = (wrap_coordinate(p[i]) + pi) / h;
            const double f = std::floor(s);
            lo[i]          = ((static_cast<int>(f) % g) + g) % g;
            fr[i]          = s - f;
        }
        if (grid.dim() == 1) {
            out[grid.index(lo[0])] += unit * (1.0 - fr[0]);
            out[grid.index((lo[0] + 1) % g)] += unit * fr[0];
            continue;
        }
        for (int b = 0; b < 2; ++b) {
            for (int a = 0; a < 2; ++a) {
                const double w = (a ? fr[0] : 1.0 - fr[0]) * (b ? fr[1] : 1.0 - fr[1]);
                out[grid.index((lo[0] + a) % g, (lo[1] + b) % g)] += unit * w;
            }
        }
    }
    return out;
}

ScalarField estimate_density(std::span<const Point> positions, const KDEParams& params, const Grid& grid)
{
    if (positions.empty()) {
        throw std::invalid_argument("estimate_density: density of an empty swarm is undefined");
    }
    params.validate();
    Spectrum hat    = forward(grid, deposit_linear(positions, grid).values);
    const double h2 = params.bandwidth * params.bandwidth;
    for (std::size_t i = 0; i < hat.coeffs.size(); ++i) {
        hat.coeffs[i] *= std::exp(-0.5 * h2 * hat.wavenumber(i).norm_sq());
    }
    ScalarField out(grid);
    out.values = inverse(std::move(hat));
    // The wrapped Gaussian is positive; anything below zero is round-off.
    for (auto& v : out.values) {
        v = std::max(v, 0.0);
    }
    return out;
}

ScalarField von_mises_2d(std::span<const VonMisesMode> modes, const Grid& grid, double total_mass)
{
    if (grid.dim() != 2) {
        throw std::invalid_argument("von_mises_2d requires a 2D grid");
    }
    if (modes.empty()) {
        throw std::invalid_argument("von_mises_2d needs at least one mode");
    }
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.node(i);
        double v      = 0.0;
        for (const auto& m : modes) {
            v += m.weight * std::exp(m.k1 * std::cos(x[0] - m.mu) + m.k2 * std::cos(x[1] - m.nu));
        }
        out[i] = v;
    }
    const double z = total_mass / integrate(out);
    for (auto& v : out.values) {
        v *= z;
    }
    return out;
}

bool TargetProgram::is_static() const
{
    for (const auto& m : modes) {
        for (const auto& ph : m.phases) {
            if (const auto* lin = std::get_if<LinearPhase>(&ph)) {
                if (lin->velocity[0] != 0.0 || lin->velocity[1] != 0.0) {
                    return false;
                }
            }
            else if (const auto* orb = std::get_if<OrbitPhase>(&ph)) {
                if (orb->rate != 0.0) {
                    return false;
                }
            }
        }
    }
    return true;
}

namespace
{

Point advance(const TrajectoryPhase& phase, const Point& start, double tau)
{
    if (std::holds_alternative<HoldPhase>(phase)) {
        return start;
    }
    if (const auto* lin = std::get_if<LinearPhase>(&phase)) {
        return {start[0] + lin->velocity[0] * tau, start[1] + lin->velocity[1] * tau};
    }
    const auto& orb     = std::get<OrbitPhase>(phase);
    const double dx     = start[0] - orb.center[0];
    const double dy     = start[1] - orb.center[1];
    const double radius = std::hypot(dx, dy);
    const double angle  = std::atan2(dy, dx) + orb.rate * tau;
    return {orb.center[0] + radius * std::cos(angle), orb.center[1] + radius * std::sin(angle)};
}

double duration_of(const TrajectoryPhase& phase)
{
    return std::visit([](const auto& p) { return p.duration; }, phase);
}

} // namespace

std::vector<Point> means_at(const TargetProgram& program, double t)
{
    std::vector<Point> out;
    out.reserve(program.modes.size());
    for (const auto& m : program.modes) {
        // Means are tracked unwrapped so orbits and segments stay continuous.
        Point p{m.mode.mu, m.mode.nu};
        double remaining = std::max(t, 0.0);
        for (std::size_t k = 0; k < m.phases.size(); ++k) {
            const bool last   = k + 1 == m.phases.size();
            const double span = last ? remaining : std::min(remaining, duration_of(m.phases[k]));
            p                 = advance(m.phases[k], p, span);
            remaining -= span;
            if (remaining <= 0.0) {
                break;
            }
        }
        out.push_back(wrap_point(p));
    }
    return out;
}

ScalarField target_density(const TargetProgram& program, const Grid& grid, double t)
{
    const auto means = means_at(program, t);
    std::vector<VonMisesMode> modes;
    modes.reserve(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        VonMisesMode m = program.modes[i].mode;
        m.mu           = means[i][0];
        m.nu           = means[i][1];
        modes.push_back(m);
    }
    return von_mises_2d(modes, grid, program.total_mass);
}

Point arena_to_extended(const Point& x)
{
    return {0.5 * x[0], 0.5 * x[1]};
}

Point extended_to_arena(const Point& x)
{
    return {2.0 * x[0], 2.0 * x[1]};
}

ScalarField embed_extended(const ScalarField& inner, double floor, int seam_cells)
{
    const Grid& g_in = inner.grid;
    if (g_in.dim() != 2) {
        throw std::invalid_argument("embed_extended requires a 2D field");
    }
    if (!(floor > 0.0)) {
        throw std::invalid_argument("embed_extended floor must be > 0");
    }
    const int n      = g_in.cells_per_axis();
    const double mass = integrate(inner);
    Grid g_out(2, 2 * n);
    ScalarField out(g_out, floor);

    auto taper = [seam_cells](int d) {
        if (d >= seam_cells || seam_cells <= 0) {
            return 1.0;
        }
        return 0.5 * (1.0 - std::cos(pi * d / seam_cells));
    };
    // The arena covers a quarter of the extended area, so densities scale by 4.
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double w = taper(std::min(i, n - 1 - i)) * taper(std::min(j, n - 1 - j));
            const double v = 4.0 * inner[g_in.index(i, j)];
            out[g_out.index(i + n / 2, j + n / 2)] = w * v + (1.0 - w) * floor;
        }
    }
    const double z = mass / integrate(out);
    for (auto& v : out.values) {
        v *= z;
    }
    return out;
}

std::vector<Point> square_lattice(std::size_t n, int dim)
{
    std::vector<Point> out;
    out.reserve(n);
    if (dim == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back({-pi + (static_cast<double>(i) + 0.5) * two_pi / static_cast<double>(n), 0.0});
        }
        return out;
    }
    auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12));
    const double step = two_pi / static_cast<double>(side);
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = k % side;
        const auto j = k / side;
        out.push_back({-pi + (static_cast<double>(i) + 0.5) * step, -pi + (static_cast<double>(j) + 0.5) * step});
    }
    return out;
}

} // namespace cswarm

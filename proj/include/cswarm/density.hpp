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
#ifndef CSWARM_DENSITY_HPP
#define CSWARM_DENSITY_HPP

#include "cswarm/domain.hpp"

#include <span>
#include <variant>
#include <vector>

namespace cswarm
{

struct KDEParams {
    double bandwidth = 0.4;

    void validate() const;
};

/// Periodic Gaussian kernel density estimate of the agent positions.
/// Each agent is spread bilinearly over the four surrounding nodes, then smoothed
/// spectrally; the result integrates to positions.size().
ScalarField estimate_density(std::span<const Point> positions, const KDEParams& params, const Grid& grid);

/// Nearest-node deposit (unit mass per agent, divided by the cell volume).
ScalarField deposit_nearest(std::span<const Point> positions, const Grid& grid);
/// Bilinear deposit, the transpose of sample_bilinear.
ScalarField deposit_linear(std::span<const Point> positions, const Grid& grid);
/// Flat index of the node nearest to x.
std::size_t nearest_node(const Grid& grid, const Point& x);

struct VonMisesMode {
    double mu     = 0.0;
    double nu     = 0.0;
    double k1     = 0.0;
    double k2     = 0.0;
    double weight = 1.0;
};

/// Separable 2D von Mises mixture normalized on the grid to total_mass.
ScalarField von_mises_2d(std::span<const VonMisesMode> modes, const Grid& grid, double total_mass);

// Mean trajectories are a sequence of phases, each starting where the previous ended.
struct HoldPhase {
    double duration = 0.0;
};
struct LinearPhase {
    Point velocity{0.0, 0.0};
    double duration = 0.0;
};
/// Circular motion about center, radius fixed by where the phase starts.
struct OrbitPhase {
    Point center{0.0, 0.0};
    double rate     = 0.0;
    double duration = 0.0;
};
using TrajectoryPhase = std::variant<HoldPhase, LinearPhase, OrbitPhase>;

struct ModeProgram {
    VonMisesMode mode;
    /// Phases run in order; the last one is extended indefinitely.
    std::vector<TrajectoryPhase> phases;
};

struct TargetProgram {
    std::vector<ModeProgram> modes;
    double total_mass = 1.0;

    /// True if no mean ever moves.
    bool is_static() const;
};

/// Means of every mode at time t, wrapped to [-pi, pi).
std::vector<Point> means_at(const TargetProgram& program, double t);
ScalarField target_density(const TargetProgram& program, const Grid& grid, double t);

/// Embeds a field on the arena grid into the middle of a doubled grid covering
/// twice the side length, rescaled back to [-pi, pi)^2. The outside carries floor,
/// a cosine taper of seam_cells nodes blends the arena edge into it, and the result
/// is renormalized to the original mass.
ScalarField embed_extended(const ScalarField& inner, double floor, int seam_cells = 4);

/// Maps an arena coordinate to the extended canonical domain and back.
Point arena_to_extended(const Point& x);
Point extended_to_arena(const Point& x);

/// Positions on a perfect square lattice with ceil(sqrt(n)) sites per axis,
/// filled row by row from cell centers.
std::vector<Point> square_lattice(std::size_t n, int dim = 2);

} // namespace cswarm

#endif // CSWARM_DENSITY_HPP

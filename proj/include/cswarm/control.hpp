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
#ifndef CSWARM_CONTROL_HPP
#define CSWARM_CONTROL_HPP

#include "cswarm/domain.hpp"
#include "cswarm/kernel.hpp"

#include <optional>
#include <span>
#include <vector>

namespace cswarm
{

struct ControlGains {
    double k_p = 5.0;
    /// Fourier modes per axis kept in the Poisson solve; 0 means the full grid spectrum.
    int fourier_modes = 0;
    /// Lower clamp on the density when converting flux to velocity.
    double rho_floor = 1e-3;
    /// Relative tolerance on the mass mismatch between estimate and target.
    double mass_tolerance = 1e-6;
    /// Adds rho_d_t + div(rho_d V_d) to the source so a prescribed target that does not
    /// follow the reference dynamics is still reached (the residual is zero otherwise).
    bool target_feedforward = false;

    void validate(const Grid& grid) const;
};

/// Every intermediate of one control evaluation.
struct ControlFields {
    ScalarField e;
    VectorField v;
    VectorField v_d;
    VectorField v_e;
    ScalarField q;
    ScalarField phi;
    VectorField w;
    VectorField u;
};

/// Interaction velocity V = f * rho.
VectorField velocity_field(const ScalarField& rho, const KernelSpec& kernel);

/// q = K_p e - div(e V_d) - div(rho V_e).
ScalarField control_source(const ScalarField& e, const ScalarField& rho, const VectorField& v_d,
                           const VectorField& v_e, const ControlGains& gains);

struct PoissonSolution {
    ScalarField phi;
    VectorField w;
};

/// Solves lap(phi) = q with gamma_m = -c_m / |m|^2, gamma_0 = 0, and returns w = -grad(phi).
/// Rejects q whose mean exceeds zero_mode_tol * ||q||_L2.
PoissonSolution poisson_invert(const ScalarField& q, const ControlGains& gains, double zero_mode_tol = 1e-6);

/// U = w / max(rho, rho_floor).
VectorField flux_to_velocity(const VectorField& w, const ScalarField& rho, const ControlGains& gains);

std::vector<Point> microscopic_inputs(const VectorField& u, std::span<const Point> positions);

/// Full chain from the estimated and desired densities to the velocity field U.
/// rho_d_rate is the time derivative of the prescribed target, used by the feedforward term.
ControlFields control_step(const ScalarField& rho, const ScalarField& rho_d, const KernelSpec& kernel,
                           const ControlGains& gains, const std::optional<ScalarField>& rho_d_rate = std::nullopt);

/// rho_d_t + div(rho_d V_d): zero when the target follows its own interaction dynamics.
ScalarField reference_residual(const ScalarField& rho_d, const VectorField& v_d,
                               const std::optional<ScalarField>& rho_d_rate);

double l2_norm(const ScalarField& s);

} // namespace cswarm

#endif // CSWARM_CONTROL_HPP

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
#ifndef CSWARM_ORACLE_HPP
#define CSWARM_ORACLE_HPP

#include "cswarm/control.hpp"
#include "cswarm/domain.hpp"
#include "cswarm/kernel.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace cswarm
{

/// Continuum density state of the mass-balance equation rho_t + div(rho V) = q.
struct MacroState {
    ScalarField rho;
    double t = 0.0;
};

enum class MacroIntegrator
{
    euler,
    midpoint,
};

/// Thrown when dt exceeds the advective bound 0.5 * spacing / max|V|.
class StabilityError : public std::runtime_error
{
public:
    StabilityError(double dt, double bound);
    double dt() const
    {
        return m_dt;
    }
    double bound() const
    {
        return m_bound;
    }

private:
    double m_dt;
    double m_bound;
};

/// Spectral divergence with the 2/3 rule applied to the flux (modes with |m_a| >= G/3 dropped).
ScalarField dealiased_divergence(const VectorField& flux);

/// Largest stable dt for the transport velocity of rho.
double stable_dt(const ScalarField& rho, const KernelSpec& kernel);

/// One forward-Euler step: rho <- rho - dt div(rho V) + dt q.
/// Undershoot below -1e-8 aborts; smaller undershoot is clipped and the mass restored.
MacroState macro_step(const MacroState& state, const KernelSpec& kernel, const std::optional<ScalarField>& q,
                      double dt);

struct MacroTrace {
    std::vector<double> times;
    std::vector<double> error_norm;
    std::vector<double> mass;
    std::vector<double> mass_d;

    /// Least-squares slope of log(error_norm) against time.
    double fitted_rate() const;
};

struct MacroRunOptions {
    MacroIntegrator integrator = MacroIntegrator::euler;
    /// Record every n-th step (the last step is always recorded).
    int record_every = 1;
};

/**
 * Co-integrates the controlled density and the reference density, the latter following
 * its own interaction dynamics rho_d_t + div(rho_d V_d) = 0, with the control source
 * q = K_p e - div(e V_d) - div(rho V_e) evaluated every step.
 */
MacroTrace run_controlled_macro(const ScalarField& rho0, const ScalarField& rho_d0, const KernelSpec& kernel,
                                const ControlGains& gains, double duration, double dt,
                                const MacroRunOptions& options = {});

/// Uncontrolled evolution, recording ||rho - mean|| and the mass.
MacroTrace run_uncontrolled_macro(const ScalarField& rho0, const KernelSpec& kernel, double duration, double dt,
                                  const MacroRunOptions& options = {});

} // namespace cswarm

#endif // CSWARM_ORACLE_HPP

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
#include "cswarm/oracle.hpp"

#include "cswarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cswarm
{

namespace
{

std::string stability_message(double dt, double bound)
{
    std::ostringstream msg;
    msg << "macro_step: dt = " << dt << " exceeds the advective stability bound " << bound;
    return msg.str();
}

} // namespace

StabilityError::StabilityError(double dt, double bound)
    : std::runtime_error(stability_message(dt, bound))
    , m_dt(dt)
    , m_bound(bound)
{
}

ScalarField dealiased_divergence(const VectorField& flux)
{
    const Grid& grid = flux.grid;
    const int g      = grid.cells_per_axis();
    Spectrum acc{grid, {}};
    for (int axis = 0; axis < grid.dim(); ++axis) {
        Spectrum s = forward(grid, flux[axis]);
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
            const MultiIndex m = s.wavenumber(i);
            bool kept          = true;
            for (int a = 0; a < grid.dim(); ++a) {
                kept = kept && 3 * std::abs(m.n[static_cast<std::size_t>(a)]) < g;
            }
            s.coeffs[i] = kept ? s.coeffs[i] * std::complex<double>(0.0, m.n[static_cast<std::size_t>(axis)]) : 0.0;
        }
        if (axis == 0) {
            acc = std::move(s);
        }
        else {
            for (std::size_t i = 0; i < acc.coeffs.size(); ++i) {
                acc.coeffs[i] += s.coeffs[i];
            }
        }
    }
    ScalarField out(grid);
    out.values = inverse(std::move(acc));
    return out;
}

namespace
{

double max_speed(const VectorField& v)
{
    double m = 0.0;
    for (std::size_t i = 0; i < v[0].size(); ++i) {
        double s = 0.0;
        for (const auto& c : v.components) {
            s += c[i] * c[i];
        }
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

double bound_for(const Grid& grid, const VectorField& v)
{
    const double speed = max_speed(v);
    return speed > 0.0 ? 0.5 * grid.spacing() / speed : std::numeric_limits<double>::infinity();
}

VectorField product(const ScalarField& s, const VectorField& v)
{
    VectorField out(v.grid);
    for (int a = 0; a < v.grid.dim(); ++a) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out[a][i] = s[i] * v[a][i];
        }
    }
    return out;
}

// -div(rho V), dealiased.
ScalarField transport(const ScalarField& rho, const VectorField& v)
{
    ScalarField d = dealiased_divergence(product(rho, v));
    for (auto& x : d.values) {
        x = -x;
    }
    return d;
}

void fix_undershoot(ScalarField& rho, double mass)
{
    const double lowest = *std::min_element(rho.values.begin(), rho.values.end());
    if (lowest >= 0.0) {
        return;
    }
    if (lowest < -1e-8) {
        std::ostringstream msg;
        msg << "macro_step: density undershoot " << lowest << " signals an under-resolved grid";
        throw std::runtime_error(msg.str());
    }
    for (auto& x : rho.values) {
        x = std::max(x, 0.0);
    }
    const double z = mass / integrate(rho);
    for (auto& x : rho.values) {
        x *= z;
    }
}

} // namespace

double stable_dt(const ScalarField& rho, const KernelSpec& kernel)
{
    return bound_for(rho.grid, velocity_field(rho, kernel));
}

MacroState macro_step(const MacroState& state, const KernelSpec& kernel, const std::optional<ScalarField>& q,
                      double dt)
{
    const ScalarField& rho = state.rho;
    const VectorField v    = velocity_field(rho, kernel);
    const double bound     = bound_for(rho.grid, v);
    if (dt > bound) {
        throw StabilityError(dt, bound);
    }
    ScalarField rate = transport(rho, v);
    double expected  = integrate(rho);
    if (q) {
        for (std::size_t i = 0; i < rate.size(); ++i) {
            rate[i] += (*q)[i];
        }
        expected += dt * integrate(*q);
    }
    MacroState next{ScalarField(rho.grid), state.t + dt};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        next.rho[i] = rho[i] + dt * rate[i];
    }
    fix_undershoot(next.rho, expected);
    return next;
}

double MacroTrace::fitted_rate() const
{
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(error_norm[i] > 0.0)) {
            continue;
        }
        const double y = std::log(error_norm[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        n += 1.0;
    }
    const double den = n * stt - st * st;
    return den != 0.0 ? (n * sty - st * sy) / den : 0.0;
}

namespace
{

struct PairRates {
    ScalarField rho;
    ScalarField rho_d;
    double bound;
};

// Right-hand sides of the controlled density and the reference density.
PairRates controlled_rates(const ScalarField& rho, const ScalarField& rho_d, const KernelSpec& kernel,
                           const ControlGains& gains)
{
    const Grid& grid = rho.grid;
    ScalarField e(grid);
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = rho_d[i] - rho[i];
    }
    const VectorField v   = velocity_field(rho, kernel);
    const VectorField v_d = velocity_field(rho_d, kernel);
    const VectorField v_e = velocity_field(e, kernel);

    // Same dealiased divergence for the transport and the control terms so they cancel.
    VectorField flux = product(e, v_d);
    const VectorField rho_ve = product(rho, v_e);
    for (int a = 0; a < grid.dim(); ++a) {
        for (std::size_t i = 0; i < e.size(); ++i) {
            flux[a][i] += rho_ve[a][i];
        }
    }
    const ScalarField div_terms = dealiased_divergence(flux);

    PairRates r{transport(rho, v), transport(rho_d, v_d), std::min(bound_for(grid, v), bound_for(grid, v_d))};
    for (std::size_t i = 0; i < e.size(); ++i) {
        r.rho[i] += gains.k_p * e[i] - div_terms[i];
    }
    return r;
}

ScalarField axpy(const ScalarField& x, double a, const ScalarField& y)
{
    ScalarField out(x.grid);
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] + a * y[i];
    }
    return out;
}

} // namespace

MacroTrace run_controlled_macro(const ScalarField& rho0, const ScalarField& rho_d0, const KernelSpec& kernel,
                                const ControlGains& gains, double duration, double dt,
                                const MacroRunOptions& options)
{
    if (!(rho0.grid == rho_d0.grid)) {
        throw std::invalid_argument("run_controlled_macro: fields live on different grids");
    }
    gains.validate(rho0.grid);
    const double mass   = integrate(rho0);
    const double mass_d = integrate(rho_d0);
    if (std::abs(mass - mass_d) > gains.mass_tolerance * std::abs(mass_d)) {
        throw std::invalid_argument("run_controlled_macro: initial and reference densities differ in mass");
    }
    if (!(dt > 0.0) || duration < 0.0) {
        throw std::invalid_argument("run_controlled_macro: need dt > 0 and duration >= 0");
    }

    ScalarField rho   = rho0;
    ScalarField rho_d = rho_d0;
    MacroTrace trace;
    auto record = [&](double t) {
        trace.times.push_back(t);
        trace.error_norm.push_back(l2_error(rho, rho_d));
        trace.mass.push_back(integrate(rho));
        trace.mass_d.push_back(integrate(rho_d));
    };
    const long steps = std::lround(duration / dt);
    record(0.0);
    for (long n = 0; n < steps; ++n) {
        PairRates k1 = controlled_rates(rho, rho_d, kernel, gains);
        if (dt > k1.bound) {
            throw StabilityError(dt, k1.bound);
        }
        if (options.integrator == MacroIntegrator::euler) {
            rho   = axpy(rho, dt, k1.rho);
            rho_d = axpy(rho_d, dt, k1.rho_d);
        }
        else {
            const ScalarField rho_h   = axpy(rho, 0.5 * dt, k1.rho);
            const ScalarField rho_d_h = axpy(rho_d, 0.5 * dt, k1.rho_d);
            PairRates k2              = controlled_rates(rho_h, rho_d_h, kernel, gains);
            rho                       = axpy(rho, dt, k2.rho);
            rho_d                     = axpy(rho_d, dt, k2.rho_d);
        }
        fix_undershoot(rho, mass);
        fix_undershoot(rho_d, mass_d);
        if ((n + 1) % std::max(options.record_every, 1) == 0 || n + 1 == steps) {
            record(static_cast<double>(n + 1) * dt);
        }
    }
    return trace;
}

MacroTrace run_uncontrolled_macro(const ScalarField& rho0, const KernelSpec& kernel, double duration, double dt,
                                  const MacroRunOptions& options)
{
    MacroState state{rho0, 0.0};
    const double uniform = integrate(rho0) / std::pow(two_pi, rho0.grid.dim());
    const ScalarField flat(rho0.grid, uniform);
    MacroTrace trace;
    auto record = [&] {
        trace.times.push_back(state.t);
        trace.error_norm.push_back(l2_error(state.rho, flat));
        trace.mass.push_back(integrate(state.rho));
        trace.mass_d.push_back(integrate(flat));
    };
    record();
    const long steps = std::lround(duration / dt);
    for (long n = 0; n < steps; ++n) {
        state   = macro_step(state, kernel, std::nullopt, dt);
        state.t = static_cast<double>(n + 1) * dt;
        if ((n + 1) % std::max(options.record_every, 1) == 0 || n + 1 == steps) {
            record();
        }
    }
    return trace;
}

} // namespace cswarm

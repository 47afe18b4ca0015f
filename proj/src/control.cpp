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
#include "cswarm/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cswarm
{

void ControlGains::validate(const Grid& grid) const
{
    if (!(k_p > 0.0)) {
        throw std::invalid_argument("gains.K_p must be > 0");
    }
    if (fourier_modes < 0 || fourier_modes > grid.cells_per_axis()) {
        throw std::invalid_argument("gains.fourier_modes must lie in [0, G]");
    }
    if (!(rho_floor > 0.0)) {
        throw std::invalid_argument("gains.rho_floor must be > 0");
    }
}

double l2_norm(const ScalarField& s)
{
    double acc = 0.0;
    for (double v : s.values) {
        acc += v * v;
    }
    return std::sqrt(acc * s.grid.cell_volume());
}

VectorField velocity_field(const ScalarField& rho, const KernelSpec& kernel)
{
    return circ_conv(kernel_table(kernel, rho.grid)->spectrum, rho);
}

namespace
{

VectorField scaled_product(const ScalarField& s, const VectorField& v)
{
    VectorField out(v.grid);
    for (int a = 0; a < v.grid.dim(); ++a) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out[a][i] = s[i] * v[a][i];
        }
    }
    return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b)) {
        throw std::invalid_argument(std::string(what) + ": fields live on different grids");
    }
}

} // namespace

ScalarField control_source(const ScalarField& e, const ScalarField& rho, const VectorField& v_d,
                           const VectorField& v_e, const ControlGains& gains)
{
    require_same_grid(e.grid, rho.grid, "control_source");
    require_same_grid(e.grid, v_d.grid, "control_source");
    require_same_grid(e.grid, v_e.grid, "control_source");

    // Both transport terms share one divergence since it is linear.
    VectorField flux = scaled_product(e, v_d);
    for (int a = 0; a < e.grid.dim(); ++a) {
        for (std::size_t i = 0; i < e.size(); ++i) {
            flux[a][i] += rho[i] * v_e[a][i];
        }
    }
    ScalarField q = spectral_divergence(flux);
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = gains.k_p * e[i] - q[i];
    }
    return q;
}

ScalarField reference_residual(const ScalarField& rho_d, const VectorField& v_d,
                               const std::optional<ScalarField>& rho_d_rate)
{
    ScalarField r = spectral_divergence(scaled_product(rho_d, v_d));
    if (rho_d_rate) {
        require_same_grid(rho_d.grid, rho_d_rate->grid, "reference_residual");
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] += (*rho_d_rate)[i];
        }
    }
    return r;
}

PoissonSolution poisson_invert(const ScalarField& q, const ControlGains& gains, double zero_mode_tol)
{
    const Grid& grid = q.grid;
    const double mean = integrate(q) / std::pow(two_pi, grid.dim());
    const double qn   = l2_norm(q);
    if (std::abs(mean) > zero_mode_tol * qn && std::abs(mean) > 0.0) {
        std::ostringstream msg;
        msg << "poisson_invert: source has non-zero mean " << mean << " (||q|| = " << qn
            << "); the periodic Poisson problem has no solution";
        throw std::invalid_argument(msg.str());
    }
    const int modes = gains.fourier_modes == 0 ? grid.cells_per_axis() : gains.fourier_modes;

    Spectrum hat = forward(grid, q.values);
    for (std::size_t i = 0; i < hat.coeffs.size(); ++i) {
        const MultiIndex m = hat.wavenumber(i);
        const int m2       = m.norm_sq();
        bool kept          = m2 != 0;
        for (int a = 0; a < grid.dim(); ++a) {
            // Symmetric truncation: |m_a| < M/2 on every axis.
            kept = kept && 2 * std::abs(m.n[static_cast<std::size_t>(a)]) < modes;
        }
        hat.coeffs[i] = kept ? -hat.coeffs[i] / static_cast<double>(m2) : 0.0;
    }
    ScalarField phi(grid);
    phi.values = inverse(std::move(hat));

    VectorField w = spectral_gradient(phi);
    for (auto& comp : w.components) {
        for (auto& v : comp) {
            v = -v;
        }
    }
    return {std::move(phi), std::move(w)};
}

VectorField flux_to_velocity(const VectorField& w, const ScalarField& rho, const ControlGains& gains)
{
    require_same_grid(w.grid, rho.grid, "flux_to_velocity");
    VectorField u(w.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double denom = std::max(rho[i], gains.rho_floor);
        for (int a = 0; a < w.grid.dim(); ++a) {
            u[a][i] = w[a][i] / denom;
        }
    }
    return u;
}

std::vector<Point> microscopic_inputs(const VectorField& u, std::span<const Point> positions)
{
    std::vector<Point> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
        out.push_back(sample_bilinear(u, p));
    }
    return out;
}

ControlFields control_step(const ScalarField& rho, const ScalarField& rho_d, const KernelSpec& kernel,
                           const ControlGains& gains, const std::optional<ScalarField>& rho_d_rate)
{
    require_same_grid(rho.grid, rho_d.grid, "control_step");
    gains.validate(rho.grid);
    const double mass   = integrate(rho);
    const double mass_d = integrate(rho_d);
    if (std::abs(mass - mass_d) > gains.mass_tolerance * std::max(std::abs(mass_d), 1e-300)) {
        std::ostringstream msg;
        msg << "control_step: mass mismatch between estimate (" << mass << ") and target (" << mass_d << ")";
        throw std::invalid_argument(msg.str());
    }

    ScalarField e(rho.grid);
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = rho_d[i] - rho[i];
    }
    VectorField v   = velocity_field(rho, kernel);
    VectorField v_d = velocity_field(rho_d, kernel);
    VectorField v_e = velocity_field(e, kernel);
    ScalarField q   = control_source(e, rho, v_d, v_e, gains);
    if (gains.target_feedforward) {
        const ScalarField r = reference_residual(rho_d, v_d, rho_d_rate);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] += r[i];
        }
    }
    // Masses agree to mass_tolerance; drop what is left of the mean so the Poisson problem is solvable.
    const double mean = integrate(q) / std::pow(two_pi, rho.grid.dim());
    for (auto& x : q.values) {
        x -= mean;
    }
    PoissonSolution sol = poisson_invert(q, gains);
    VectorField u       = flux_to_velocity(sol.w, rho, gains);
    return {std::move(e), std::move(v), std::move(v_d), std::move(v_e), std::move(q),
            std::move(sol.phi), std::move(sol.w), std::move(u)};
}

} // namespace cswarm

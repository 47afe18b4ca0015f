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
#include "cswarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace cswarm
{

double l2_error(const ScalarField& rho, const ScalarField& rho_d)
{
    if (!(rho.grid == rho_d.grid)) {
        throw std::invalid_argument("l2_error: fields live on different grids");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double e = rho_d[i] - rho[i];
        acc += e * e;
    }
    return std::sqrt(acc * rho.grid.cell_volume());
}

std::vector<double> percent_error(std::span<const double> error_sq)
{
    const double peak = error_sq.empty() ? 0.0 : *std::max_element(error_sq.begin(), error_sq.end());
    std::vector<double> out(error_sq.size(), 0.0);
    if (peak <= 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < error_sq.size(); ++i) {
        out[i] = error_sq[i] == peak ? 100.0 : error_sq[i] / peak * 100.0;
    }
    return out;
}

double default_kl_floor(double total_mass, int dim)
{
    return 1e-9 * total_mass / std::pow(two_pi, dim);
}

double kl_divergence(const ScalarField& rho, const ScalarField& rho_d, double floor)
{
    if (!(rho.grid == rho_d.grid)) {
        throw std::invalid_argument("kl_divergence: fields live on different grids");
    }
    double mass = 0.0;
    double mass_d = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        mass += std::max(rho[i], floor);
        mass_d += std::max(rho_d[i], floor);
    }
    const double dv = rho.grid.cell_volume();
    mass *= dv;
    mass_d *= dv;
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double p  = std::max(rho[i], floor) / mass;
        const double pd = std::max(rho_d[i], floor) / mass_d;
        acc += p * std::log(p / pd);
    }
    // Gibbs: exact value is non-negative, the sum can dip below by round-off.
    return std::max(acc * dv, 0.0);
}

double ProvisionalPercentError::push(double error_sq)
{
    m_max = std::max(m_max, error_sq);
    return m_max > 0.0 ? error_sq / m_max * 100.0 : 0.0;
}

void TrialTrace::append(long step, double t, double err_sq, double kl_value)
{
    steps.push_back(step);
    times.push_back(t);
    error_sq.push_back(err_sq);
    e_bar_provisional.push_back(m_live.push(err_sq));
    kl.push_back(kl_value);
}

void TrialTrace::write_csv(std::ostream& out, bool finalized) const
{
    out << "step,t,error_sq,E_bar_provisional,kl";
    if (finalized) {
        out << ",E_bar_final";
    }
    out << '\n';
    const auto final_bar = finalized ? e_bar() : std::vector<double>{};
    char buf[256];
    for (std::size_t i = 0; i < size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g", steps[i], times[i], error_sq[i],
                      e_bar_provisional[i], kl[i]);
        out << buf;
        if (finalized) {
            std::snprintf(buf, sizeof(buf), ",%.17g", final_bar[i]);
            out << buf;
        }
        out << '\n';
    }
}

} // namespace cswarm

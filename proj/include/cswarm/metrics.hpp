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
#ifndef CSWARM_METRICS_HPP
#define CSWARM_METRICS_HPP

#include "cswarm/domain.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace cswarm
{

/// L2 norm of rho_d - rho over the torus.
double l2_error(const ScalarField& rho, const ScalarField& rho_d);

/// Percentage error: series / max(series) * 100. An all-zero series maps to zeros.
std::vector<double> percent_error(std::span<const double> error_sq);

/// KL divergence D(p || p_d) of the floored, normalized densities.
double kl_divergence(const ScalarField& rho, const ScalarField& rho_d, double floor);
/// 1e-9 * N / (2 pi)^d.
double default_kl_floor(double total_mass, int dim);

/// Live percentage error against the largest value seen so far.
class ProvisionalPercentError
{
public:
    double push(double error_sq);

private:
    double m_max = 0.0;
};

struct TrialTrace {
    std::vector<long> steps;
    std::vector<double> times;
    std::vector<double> error_sq;
    std::vector<double> e_bar_provisional;
    std::vector<double> kl;

    void append(long step, double t, double err_sq, double kl_value);
    std::size_t size() const
    {
        return times.size();
    }
    /// Post-hoc percentage error over the whole trial.
    std::vector<double> e_bar() const
    {
        return percent_error(error_sq);
    }

    /// CSV with columns step,t,error_sq,E_bar_provisional,kl[,E_bar_final].
    void write_csv(std::ostream& out, bool finalized) const;

private:
    ProvisionalPercentError m_live;
};

} // namespace cswarm

#endif // CSWARM_METRICS_HPP

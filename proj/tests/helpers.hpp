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
#ifndef CSWARM_TESTS_HELPERS_HPP
#define CSWARM_TESTS_HELPERS_HPP

#include "cswarm/domain.hpp"

#include <cmath>
#include <random>

namespace cswarm::test
{

/// Largest absolute difference between two equally sized sequences.
template <class A, class B>
double max_diff(const A& a, const B& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

inline ScalarField random_field(const Grid& grid, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField f(grid);
    for (auto& v : f.values) {
        v = u(rng);
    }
    return f;
}

/// Random trigonometric polynomial with modes up to kmax per axis, zero mean.
inline ScalarField smooth_zero_mean(const Grid& grid, std::mt19937_64& rng, int kmax = 4)
{
    std::normal_distribution<double> n(0.0, 1.0);
    ScalarField f(grid);
    for (int a = 0; a <= kmax; ++a) {
        for (int b = grid.dim() == 2 ? -kmax : 0; b <= (grid.dim() == 2 ? kmax : 0); ++b) {
            if (a == 0 && b <= 0) {
                continue;
            }
            const double c = n(rng), s = n(rng);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Point x  = grid.node(i);
                const double p = a * x[0] + b * x[1];
                f[i] += c * std::cos(p) + s * std::sin(p);
            }
        }
    }
    return f;
}

} // namespace cswarm::test

#endif // CSWARM_TESTS_HELPERS_HPP

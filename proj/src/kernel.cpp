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
#include "cswarm/kernel.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace cswarm
{

void KernelSpec::validate() const
{
    if (!(length_scale > 0.0)) {
        throw std::invalid_argument("kernel length_scale must be > 0");
    }
    if (periodization_layers < 0) {
        throw std::invalid_argument("kernel periodization_layers must be >= 0");
    }
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("kernel dim must be 1 or 2");
    }
    if (kind == KernelKind::morse) {
        if (!(morse.c_rep > 0.0) || !(morse.l_rep > 0.0) || !(morse.l_att > 0.0) || morse.c_att < 0.0) {
            throw std::invalid_argument("morse amplitudes and ranges must be positive");
        }
    }
}

double morse_potential(const KernelSpec& spec, double r)
{
    const auto& m = spec.morse;
    return m.c_rep * std::exp(-r / m.l_rep) - m.c_att * std::exp(-r / m.l_att);
}

Point eval_morse(const KernelSpec& spec, const Point& x)
{
    if (spec.kind != KernelKind::morse) {
        throw std::invalid_argument("eval_morse called with a non-morse kernel spec");
    }
    const double r = norm(x);
    if (r == 0.0) {
        return {0.0, 0.0};
    }
    const auto& m = spec.morse;
    // -F'(r), positive means outward.
    const double mag = m.c_rep / m.l_rep * std::exp(-r / m.l_rep) - m.c_att / m.l_att * std::exp(-r / m.l_att);
    return {mag * x[0] / r, mag * x[1] / r};
}

Point eval_base(const KernelSpec& spec, const Point& x)
{
    if (spec.kind == KernelKind::morse) {
        return eval_morse(spec, x);
    }
    const double r = norm(x);
    if (r == 0.0) {
        return {0.0, 0.0};
    }
    const double mag = std::exp(-r / spec.length_scale) / r;
    return {mag * x[0], mag * x[1]};
}

namespace
{

Point image_sum(const KernelSpec& spec, const Point& x)
{
    const int p = spec.periodization_layers;
    Point acc{0.0, 0.0};
    if (spec.dim == 1) {
        for (int k = -p; k <= p; ++k) {
            Point f = eval_base(spec, {x[0] + two_pi * k, 0.0});
            acc[0] += f[0];
        }
        return acc;
    }
    for (int k2 = -p; k2 <= p; ++k2) {
        for (int k1 = -p; k1 <= p; ++k1) {
            Point f = eval_base(spec, {x[0] + two_pi * k1, x[1] + two_pi * k2});
            acc[0] += f[0];
            acc[1] += f[1];
        }
    }
    return acc;
}

} // namespace

Point periodize(const KernelSpec& spec, const Point& x)
{
    // Collect the representatives: one per axis normally, two for an axis on +-pi.
    std::vector<Point> reps{x};
    for (int a = 0; a < spec.dim; ++a) {
        auto i = static_cast<std::size_t>(a);
        if (std::abs(x[i]) == pi) {
            const std::size_t n = reps.size();
            for (std::size_t r = 0; r < n; ++r) {
                Point flipped = reps[r];
                flipped[i]    = -flipped[i];
                reps.push_back(flipped);
            }
        }
    }
    Point acc{0.0, 0.0};
    for (const auto& r : reps) {
        Point f = image_sum(spec, r);
        acc[0] += f[0];
        acc[1] += f[1];
    }
    const double w = 1.0 / static_cast<double>(reps.size());
    return {acc[0] * w, acc[1] * w};
}

VectorField kernel_field(const KernelSpec& spec, const Grid& grid)
{
    if (spec.dim != grid.dim()) {
        throw std::invalid_argument("kernel dimension does not match grid dimension");
    }
    spec.validate();
    VectorField out(grid);
    const Point origin{0.0, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point z = grid.node(i);
        const Point f = z == origin ? origin : periodize(spec, z);
        for (int a = 0; a < grid.dim(); ++a) {
            out[a][i] = f[static_cast<std::size_t>(a)];
        }
    }
    return out;
}

std::shared_ptr<const KernelTable> kernel_table(const KernelSpec& spec, const Grid& grid)
{
    static std::mutex mutex;
    static std::vector<std::shared_ptr<const KernelTable>> cache;

    std::lock_guard lock(mutex);
    for (const auto& t : cache) {
        if (t->spec == spec && t->field.grid == grid) {
            return t;
        }
    }
    VectorField field = kernel_field(spec, grid);
    auto spectrum     = kernel_spectrum(field);
    auto table = std::make_shared<const KernelTable>(KernelTable{spec, std::move(field), std::move(spectrum)});
    cache.push_back(table);
    return table;
}

} // namespace cswarm

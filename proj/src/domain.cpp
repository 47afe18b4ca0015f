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
#include "cswarm/domain.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace cswarm
{

Grid::Grid(int dim, int cells_per_axis)
    : m_dim(dim)
    , m_cells(cells_per_axis)
{
    if (dim == 3) {
        throw std::invalid_argument("grid dimension 3 is not supported (only d = 1 or d = 2)");
    }
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(dim));
    }
    if (cells_per_axis < 4 || cells_per_axis % 2 != 0) {
        throw std::invalid_argument("cells per axis must be even and >= 4, got " + std::to_string(cells_per_axis));
    }
}

double Grid::cell_volume() const
{
    return m_dim == 1 ? spacing() : spacing() * spacing();
}

std::size_t Grid::size() const
{
    auto n = static_cast<std::size_t>(m_cells);
    return m_dim == 1 ? n : n * n;
}

Point Grid::node(std::size_t flat) const
{
    auto n = static_cast<std::size_t>(m_cells);
    if (m_dim == 1) {
        return {coordinate(static_cast<int>(flat)), 0.0};
    }
    return {coordinate(static_cast<int>(flat % n)), coordinate(static_cast<int>(flat / n))};
}

MultiIndex Spectrum::wavenumber(std::size_t flat) const
{
    const int g = grid.cells_per_axis();
    const auto h = static_cast<std::size_t>(half());
    MultiIndex m;
    auto signed_k = [g](int k) {
        return k < g / 2 ? k : k - g;
    };
    // The halved axis stores k1 = 0..G/2; report G/2 as the Nyquist -G/2 like the full axis does.
    m.n[0] = signed_k(static_cast<int>(flat % h));
    if (grid.dim() == 2) {
        m.n[1] = signed_k(static_cast<int>(flat / h));
    }
    return m;
}

namespace
{

// FFTW planning is not thread-safe; execution on fresh arrays is. Plans are built once
// per grid under a lock and shared read-only afterwards.
struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

PlanPair plans_for(const Grid& grid)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, PlanPair> cache;

    std::lock_guard lock(mutex);
    auto key = std::make_pair(grid.dim(), grid.cells_per_axis());
    auto it  = cache.find(key);
    if (it != cache.end()) {
        return it->second;
    }
    const int g = grid.cells_per_axis();
    std::vector<double> real(grid.size());
    const std::size_t complex_size = grid.dim() == 1 ? static_cast<std::size_t>(g / 2 + 1)
                                                     : static_cast<std::size_t>(g) * static_cast<std::size_t>(g / 2 + 1);
    std::vector<std::complex<double>> cplx(complex_size);
    auto* out = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

    PlanPair p;
    if (grid.dim() == 1) {
        p.r2c = fftw_plan_dft_r2c_1d(g, real.data(), out, flags);
        p.c2r = fftw_plan_dft_c2r_1d(g, out, real.data(), flags);
    }
    else {
        // Row-major storage with the first axis fastest is C order with dims {x2, x1}.
        p.r2c = fftw_plan_dft_r2c_2d(g, g, real.data(), out, flags);
        p.c2r = fftw_plan_dft_c2r_2d(g, g, out, real.data(), flags);
    }
    if (!p.r2c || !p.c2r) {
        throw std::runtime_error("FFTW planning failed");
    }
    cache.emplace(key, p);
    return p;
}

} // namespace

Spectrum forward(const Grid& grid, std::span<const double> values)
{
    if (values.size() != grid.size()) {
        throw std::invalid_argument("field size does not match grid");
    }
    Spectrum s{grid, {}};
    const auto h = static_cast<std::size_t>(s.half());
    s.coeffs.resize(grid.dim() == 1 ? h : h * static_cast<std::size_t>(grid.cells_per_axis()));
    std::vector<double> in(values.begin(), values.end());
    fftw_execute_dft_r2c(plans_for(grid).r2c, in.data(), reinterpret_cast<fftw_complex*>(s.coeffs.data()));
    return s;
}

std::vector<double> inverse(Spectrum spec)
{
    const Grid& grid = spec.grid;
    std::vector<double> out(grid.size());
    fftw_execute_dft_c2r(plans_for(grid).c2r, reinterpret_cast<fftw_complex*>(spec.coeffs.data()), out.data());
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& v : out) {
        v *= scale;
    }
    return out;
}

double wrap_coordinate(double x)
{
    if (!std::isfinite(x)) {
        throw std::invalid_argument("cannot wrap a non-finite coordinate");
    }
    if (x >= -pi && x < pi) {
        return x;
    }
    double r = std::fmod(x + pi, two_pi);
    if (r < 0) {
        r += two_pi;
    }
    r -= pi;
    // fmod can land exactly on the excluded endpoint after the shift.
    if (r >= pi) {
        r -= two_pi;
    }
    return r;
}

Point wrap_point(const Point& x, int dim)
{
    Point out{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        out[static_cast<std::size_t>(a)] = wrap_coordinate(x[static_cast<std::size_t>(a)]);
    }
    return out;
}

Point wrapped_disp(const Point& a, const Point& b, int dim)
{
    Point d{0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
        auto i = static_cast<std::size_t>(k);
        d[i]   = wrap_coordinate(a[i] - b[i]);
    }
    return d;
}

double norm(const Point& x)
{
    return std::hypot(x[0], x[1]);
}

std::vector<Spectrum> kernel_spectrum(const VectorField& kernel)
{
    const Grid& grid = kernel.grid;
    const int g      = grid.cells_per_axis();
    std::vector<Spectrum> out;
    std::vector<double> rolled(grid.size());
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const auto& src = kernel[axis];
        // Node k holds displacement (k - G/2) h; move it to index (k - G/2) mod G.
        if (grid.dim() == 1) {
            for (int k = 0; k < g; ++k) {
                rolled[static_cast<std::size_t>((k + g / 2) % g)] = src[static_cast<std::size_t>(k)];
            }
        }
        else {
            for (int k2 = 0; k2 < g; ++k2) {
                for (int k1 = 0; k1 < g; ++k1) {
                    rolled[grid.index((k1 + g / 2) % g, (k2 + g / 2) % g)] = src[grid.index(k1, k2)];
                }
            }
        }
        out.push_back(forward(grid, rolled));
    }
    return out;
}

VectorField circ_conv(const std::vector<Spectrum>& kernel_hat, const ScalarField& weight)
{
    const Grid& grid = weight.grid;
    if (kernel_hat.size() != static_cast<std::size_t>(grid.dim()) || !(kernel_hat.front().grid == grid)) {
        throw std::invalid_argument("circ_conv: kernel and weight live on different grids");
    }
    Spectrum w     = forward(grid, weight.values);
    const double dv = grid.cell_volume();
    VectorField out(grid);
    for (int axis = 0; axis < grid.dim(); ++axis) {
        Spectrum prod = w;
        const auto& k = kernel_hat[static_cast<std::size_t>(axis)].coeffs;
        for (std::size_t i = 0; i < prod.coeffs.size(); ++i) {
            prod.coeffs[i] *= k[i] * dv;
        }
        out[axis] = inverse(std::move(prod));
    }
    return out;
}

VectorField circ_conv(const VectorField& kernel, const ScalarField& weight)
{
    if (!(kernel.grid == weight.grid)) {
        throw std::invalid_argument("circ_conv: kernel and weight live on different grids");
    }
    return circ_conv(kernel_spectrum(kernel), weight);
}

namespace
{

// Multiplies every coefficient by j*m_axis, zeroing the Nyquist column.
Spectrum derivative(Spectrum s, int axis)
{
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
        const MultiIndex m = s.wavenumber(i);
        if (s.on_nyquist(m, axis)) {
            s.coeffs[i] = 0.0;
        }
        else {
            s.coeffs[i] *= std::complex<double>(0.0, m.n[static_cast<std::size_t>(axis)]);
        }
    }
    return s;
}

} // namespace

VectorField spectral_gradient(const ScalarField& s)
{
    const Spectrum hat = forward(s.grid, s.values);
    VectorField out(s.grid);
    for (int axis = 0; axis < s.grid.dim(); ++axis) {
        out[axis] = inverse(derivative(hat, axis));
    }
    return out;
}

ScalarField spectral_divergence(const VectorField& v)
{
    const Grid& grid = v.grid;
    Spectrum acc{grid, {}};
    for (int axis = 0; axis < grid.dim(); ++axis) {
        Spectrum d = derivative(forward(grid, v[axis]), axis);
        if (axis == 0) {
            acc = std::move(d);
        }
        else {
            for (std::size_t i = 0; i < acc.coeffs.size(); ++i) {
                acc.coeffs[i] += d.coeffs[i];
            }
        }
    }
    ScalarField out(grid);
    out.values = inverse(std::move(acc));
    return out;
}

ScalarField spectral_laplacian(const ScalarField& s)
{
    Spectrum hat = forward(s.grid, s.values);
    for (std::size_t i = 0; i < hat.coeffs.size(); ++i) {
        hat.coeffs[i] *= -static_cast<double>(hat.wavenumber(i).norm_sq());
    }
    ScalarField out(s.grid);
    out.values = inverse(std::move(hat));
    return out;
}

ScalarField spectral_curl(const VectorField& v)
{
    const Grid& grid = v.grid;
    if (grid.dim() != 2) {
        throw std::invalid_argument("spectral_curl requires d = 2");
    }
    Spectrum d1v2 = derivative(forward(grid, v[1]), 0);
    Spectrum d2v1 = derivative(forward(grid, v[0]), 1);
    for (std::size_t i = 0; i < d1v2.coeffs.size(); ++i) {
        d1v2.coeffs[i] -= d2v1.coeffs[i];
    }
    ScalarField out(grid);
    out.values = inverse(std::move(d1v2));
    return out;
}

double integrate(const ScalarField& s)
{
    double sum = 0.0;
    for (double v : s.values) {
        sum += v;
    }
    return sum * s.grid.cell_volume();
}

double max_abs(std::span<const double> values)
{
    double m = 0.0;
    for (double v : values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

namespace
{

struct Stencil {
    std::array<int, 2> lo{0, 0};
    std::array<int, 2> hi{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
};

Stencil locate(const Grid& grid, const Point& x)
{
    const int g    = grid.cells_per_axis();
    const double h = grid.spacing();
    Stencil st;
    for (int a = 0; a < grid.dim(); ++a) {
        auto i    = static_cast<std::size_t>(a);
        double s  = (wrap_coordinate(x[i]) + pi) / h;
        double fl = std::floor(s);
        int k     = static_cast<int>(fl);
        st.frac[i] = s - fl;
        st.lo[i]   = ((k % g) + g) % g;
        st.hi[i]   = (st.lo[i] + 1) % g;
    }
    return st;
}

double interpolate(const Grid& grid, const std::vector<double>& values, const Stencil& st)
{
    if (grid.dim() == 1) {
        return (1.0 - st.frac[0]) * values[static_cast<std::size_t>(st.lo[0])] +
               st.frac[0] * values[static_cast<std::size_t>(st.hi[0])];
    }
    const double fx = st.frac[0];
    const double fy = st.frac[1];
    return (1.0 - fx) * (1.0 - fy) * values[grid.index(st.lo[0], st.lo[1])] +
           fx * (1.0 - fy) * values[grid.index(st.hi[0], st.lo[1])] +
           (1.0 - fx) * fy * values[grid.index(st.lo[0], st.hi[1])] + fx * fy * values[grid.index(st.hi[0], st.hi[1])];
}

} // namespace

Point sample_bilinear(const VectorField& v, const Point& x)
{
    const Stencil st = locate(v.grid, x);
    Point out{0.0, 0.0};
    for (int a = 0; a < v.grid.dim(); ++a) {
        out[static_cast<std::size_t>(a)] = interpolate(v.grid, v[a], st);
    }
    return out;
}

double sample_bilinear(const ScalarField& s, const Point& x)
{
    return interpolate(s.grid, s.values, locate(s.grid, x));
}

} // namespace cswarm

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
#ifndef CSWARM_DOMAIN_HPP
#define CSWARM_DOMAIN_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace cswarm
{

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// A point or displacement in the periodic cube. Components beyond the grid
/// dimension are kept at zero.
using Point = std::array<double, 2>;

/**
 * Uniform periodic grid on [-pi, pi)^d.
 * Nodes sit at -pi + k * spacing, k = 0..G-1 on every axis, so node G/2 is the origin.
 * Only d = 1 and d = 2 are supported; G must be even and at least 4.
 */
class Grid
{
public:
    Grid(int dim, int cells_per_axis);

    int dim() const
    {
        return m_dim;
    }
    int cells_per_axis() const
    {
        return m_cells;
    }
    double spacing() const
    {
        return two_pi / m_cells;
    }
    double cell_volume() const;
    std::size_t size() const;

    /// Coordinate of node k along any axis.
    double coordinate(int k) const
    {
        return -pi + k * spacing();
    }
    /// Flat row-major index, first axis fastest.
    std::size_t index(int i1, int i2 = 0) const
    {
        return static_cast<std::size_t>(i1) + static_cast<std::size_t>(m_cells) * static_cast<std::size_t>(i2);
    }
    Point node(std::size_t flat) const;

    bool operator==(const Grid&) const = default;

private:
    int m_dim;
    int m_cells;
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g)
        , values(g.size(), fill)
    {
    }
    std::size_t size() const
    {
        return values.size();
    }
    double& operator[](std::size_t i)
    {
        return values[i];
    }
    double operator[](std::size_t i) const
    {
        return values[i];
    }
};

struct VectorField {
    Grid grid;
    std::vector<std::vector<double>> components;

    explicit VectorField(const Grid& g)
        : grid(g)
        , components(static_cast<std::size_t>(g.dim()), std::vector<double>(g.size(), 0.0))
    {
    }
    std::vector<double>& operator[](int axis)
    {
        return components[static_cast<std::size_t>(axis)];
    }
    const std::vector<double>& operator[](int axis) const
    {
        return components[static_cast<std::size_t>(axis)];
    }
};

/// Signed wavenumber vector of a spectral coefficient, each component in [-G/2, G/2).
struct MultiIndex {
    std::array<int, 2> n{0, 0};

    int norm_sq() const
    {
        return n[0] * n[0] + n[1] * n[1];
    }
};

/// Half-spectrum of a real field as produced by a real-to-complex DFT.
/// The first axis is halved (G/2 + 1 entries); entry (k1, k2) lives at k1 + (G/2 + 1) * k2.
struct Spectrum {
    Grid grid;
    std::vector<std::complex<double>> coeffs;

    int half() const
    {
        return grid.cells_per_axis() / 2 + 1;
    }
    MultiIndex wavenumber(std::size_t flat) const;
    /// True when some component sits on the Nyquist wavenumber -G/2.
    bool on_nyquist(const MultiIndex& m, int axis) const
    {
        return m.n[static_cast<std::size_t>(axis)] == -grid.cells_per_axis() / 2;
    }
};

/// Forward DFT without normalization.
Spectrum forward(const Grid& grid, std::span<const double> values);
/// Inverse DFT including the 1/G^d normalization, so inverse(forward(x)) = x.
std::vector<double> inverse(Spectrum spec);

Point wrap_point(const Point& x, int dim = 2);
double wrap_coordinate(double x);
Point wrapped_disp(const Point& a, const Point& b, int dim = 2);
double norm(const Point& x);

/// Circular convolution of a kernel with a weight, scaled by the cell volume.
/// The kernel is laid out like any field: node k holds the kernel at coordinate -pi + k*h.
VectorField circ_conv(const VectorField& kernel, const ScalarField& weight);
/// Same as circ_conv with the kernel already transformed into displacement layout
/// (see kernel_spectrum). Used by callers that convolve repeatedly with one kernel.
VectorField circ_conv(const std::vector<Spectrum>& kernel_hat, const ScalarField& weight);
/// Spectra of the kernel components, rolled so displacement zero sits at index 0.
std::vector<Spectrum> kernel_spectrum(const VectorField& kernel);

VectorField spectral_gradient(const ScalarField& s);
ScalarField spectral_divergence(const VectorField& v);
ScalarField spectral_laplacian(const ScalarField& s);
/// Scalar curl d1 v2 - d2 v1. Only defined for d = 2.
ScalarField spectral_curl(const VectorField& v);

double integrate(const ScalarField& s);
double max_abs(std::span<const double> values);

Point sample_bilinear(const VectorField& v, const Point& x);
double sample_bilinear(const ScalarField& s, const Point& x);

/// Grid-function builder: evaluates f at every node.
template <class F>
ScalarField sample_function(const Grid& grid, F&& f)
{
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = f(grid.node(i));
    }
    return out;
}

} // namespace cswarm

#endif // CSWARM_DOMAIN_HPP

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
#ifndef CSWARM_KERNEL_HPP
#define CSWARM_KERNEL_HPP

#include "cswarm/domain.hpp"

#include <memory>

namespace cswarm
{

enum class KernelKind
{
    repulsive_exp,
    morse,
};

struct MorseParams {
    double c_rep   = 1.0;
    double l_rep   = 0.5;
    double c_att   = 0.5;
    double l_att   = 1.0;

    bool operator==(const MorseParams&) const = default;
};

/// Pairwise velocity interaction kernel f(z), z being the wrapped displacement x_i - x_k.
struct KernelSpec {
    KernelKind kind          = KernelKind::repulsive_exp;
    double length_scale      = 1.0;
    MorseParams morse        = {};
    int periodization_layers = 2;
    int dim                  = 2;

    void validate() const;
    bool operator==(const KernelSpec&) const = default;
};

/// Non-periodic kernel on R^d. Zero at the origin for every kind (soft-core).
Point eval_base(const KernelSpec& spec, const Point& x);

/// Morse force -grad F with F(r) = C_r exp(-r/l_r) - C_a exp(-r/l_a).
Point eval_morse(const KernelSpec& spec, const Point& x);
double morse_potential(const KernelSpec& spec, double r);

/// Truncated image sum over offsets 2*pi*k with |k|_inf <= P.
/// A coordinate sitting exactly on +-pi is the same torus point seen from both sides;
/// the two representatives are averaged so the result stays odd and periodic there.
Point periodize(const KernelSpec& spec, const Point& x);

/// Periodized kernel sampled at every grid node.
VectorField kernel_field(const KernelSpec& spec, const Grid& grid);

/// Kernel field together with its displacement-layout spectrum, built once per
/// (spec, grid) and shared read-only.
struct KernelTable {
    KernelSpec spec;
    VectorField field;
    std::vector<Spectrum> spectrum;
};
std::shared_ptr<const KernelTable> kernel_table(const KernelSpec& spec, const Grid& grid);

} // namespace cswarm

#endif // CSWARM_KERNEL_HPP

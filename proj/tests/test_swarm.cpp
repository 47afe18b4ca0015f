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
#include "cswarm/swarm.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace cswarm;

namespace
{

LoopParams small_loop()
{
    LoopParams p;
    p.grid                     = Grid(2, 64);
    p.gains.target_feedforward = true;
    p.gains.rho_floor          = 1e-3 * 100.0 / (two_pi * two_pi);
    return p;
}

ScalarField mono_target(const Grid& g, double n = 100.0)
{
    const std::vector<VonMisesMode> m{{0.0, 0.0, 1.5, 1.5, 1.0}};
    return von_mises_2d(m, g, n);
}

} // namespace

TEST_SUITE("swarm")
{

TEST_CASE("interaction sums")
{
    KernelSpec k;
    const std::vector<Point> one{{0.4, 0.1}};
    CHECK(interaction_sum(one, 0, k) == Point{0.0, 0.0});

    const std::vector<Point> two{{0.0, 0.0}, {1.0, 0.0}};
    const Point a = interaction_sum(two, 0, k);
    const Point b = interaction_sum(two, 1, k);
    CHECK(std::abs(a[0] + b[0]) <= 1e-15);
    CHECK(std::abs(a[1] + b[1]) <= 1e-15);
    CHECK(a[0] < 0.0);

    const auto lattice = square_lattice(100);
    double worst       = 0.0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        worst = std::max(worst, norm(interaction_sum(lattice, i, k)));
    }
    CHECK(worst <= 1e-9);
    CHECK_THROWS_AS(interaction_sum(two, 2, k), std::out_of_range);
}

TEST_CASE("grid interaction sums approximate the direct sums")
{
    KernelSpec k;
    Grid g(2, 128);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-pi, pi);
    std::vector<Point> pts(30);
    for (auto& p : pts) {
        p = {u(rng), u(rng)};
    }
    const auto direct = interaction_sums(pts, k, g, InteractionMode::direct);
    const auto approx = interaction_sums(pts, k, g, InteractionMode::grid);
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        scale = std::max(scale, norm(direct[i]));
        err   = std::max(err, norm({approx[i][0] - direct[i][0], approx[i][1] - direct[i][1]}));
    }
    CHECK(err <= 0.05 * scale);
}

TEST_CASE("euler_step")
{
    KernelSpec k;
    Grid g(2, 16);
    SwarmState s;
    s.virtual_agents = {{0.2, -0.3}};
    const std::vector<Point> none{{0.0, 0.0}};
    CHECK(euler_step(s, none, k, 0.01, g).virtual_agents[0] == s.virtual_agents[0]);

    const std::vector<Point> push{{1.0, 0.0}};
    const SwarmState moved = euler_step(s, push, k, 0.01, g);
    CHECK(moved.virtual_agents[0][0] == doctest::Approx(0.21).epsilon(1e-14));
    CHECK(moved.t == doctest::Approx(0.01));
    CHECK(moved.step == 1);

    s.virtual_agents = {{pi - 0.005, 0.0}};
    CHECK(euler_step(s, push, k, 0.01, g).virtual_agents[0][0] == doctest::Approx(-pi + 0.005).epsilon(1e-12));

    const std::vector<Point> two_inputs{{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(euler_step(s, two_inputs, k, 0.01, g), std::invalid_argument);
    CHECK_THROWS_AS(euler_step(s, push, k, 0.0, g), std::invalid_argument);
}

TEST_CASE("two repelling agents separate monotonically")
{
    KernelSpec k;
    Grid g(2, 16);
    SwarmState s;
    s.virtual_agents = {{-0.3, 0.1}, {0.2, -0.2}};
    const std::vector<Point> none(2, Point{0.0, 0.0});
    double last = min_pairwise_distance(s.virtual_agents);
    for (int n = 0; n < 200; ++n) {
        s                = euler_step(s, none, k, 0.01, g);
        const double now = min_pairwise_distance(s.virtual_agents);
        CHECK(now >= last - 1e-12);
        last = now;
    }
}

TEST_CASE("closed loop drives the error down")
{
    LoopParams p = small_loop();
    p.grid       = Grid(2, 200);
    const ScalarField target = mono_target(p.grid);
    InProcessRobots robots(p);
    SwarmState s = initial_lattice(100, 0, 2);
    double last  = std::numeric_limits<double>::infinity();
    for (int n = 0; n < 50; ++n) {
        FrameResult f = closed_loop_frame(s, target, std::nullopt, p, robots);
        CHECK(f.record.error_sq < last);
        CHECK(f.record.mass == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(f.record.step == n);
        last = f.record.error_sq;
        s    = std::move(f.state);
    }
}

TEST_CASE("agents at the target stay put without interactions")
{
    LoopParams p              = small_loop();
    p.kernel.length_scale     = 1e-3;
    const auto pts            = square_lattice(100);
    const ScalarField rho     = estimate_density(pts, p.kde, p.grid);
    InProcessRobots robots(p);
    SwarmState s;
    s.virtual_agents = pts;
    const FrameResult f = closed_loop_frame(s, rho, std::nullopt, p, robots);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(norm(wrapped_disp(f.state.virtual_agents[i], pts[i])) <= 1e-9);
    }
}

TEST_CASE("permutation equivariance and determinism")
{
    LoopParams p = small_loop();
    const ScalarField target = mono_target(p.grid, 30.0);
    p.gains.rho_floor        = 1e-3 * 30.0 / (two_pi * two_pi);
    SwarmState a = initial_lattice(30, 0, 2, 0.3, 7);
    std::vector<std::size_t> perm(30);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    SwarmState b = a;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        b.virtual_agents[i] = a.virtual_agents[perm[i]];
    }
    SwarmState c = a;
    InProcessRobots ra(p), rb(p), rc(p);
    for (int n = 0; n < 10; ++n) {
        a = closed_loop_frame(a, target, std::nullopt, p, ra).state;
        b = closed_loop_frame(b, target, std::nullopt, p, rb).state;
        c = closed_loop_frame(c, target, std::nullopt, p, rc).state;
    }
    SwarmState rerun = initial_lattice(30, 0, 2, 0.3, 7);
    InProcessRobots rr(p);
    for (int n = 0; n < 10; ++n) {
        rerun = closed_loop_frame(rerun, target, std::nullopt, p, rr).state;
    }
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(norm(wrapped_disp(b.virtual_agents[i], a.virtual_agents[perm[i]])) <= 1e-9);
        CHECK(rerun.virtual_agents[i] == a.virtual_agents[i]);
    }
}

TEST_CASE("robots take part in the loop")
{
    LoopParams p = small_loop();
    p.grid       = Grid(2, 200);
    const ScalarField target = mono_target(p.grid);
    InProcessRobots robots(p);
    SwarmState s = initial_lattice(96, 4, 2);
    CHECK(s.robots.size() == 4);
    CHECK(s.virtual_agents.size() == 96);
    for (int n = 0; n < 100; ++n) {
        FrameResult f = closed_loop_frame(s, target, std::nullopt, p, robots);
        CHECK(f.record.positions.size() == 100);
        CHECK(f.record.mass == doctest::Approx(100.0).epsilon(1e-9));
        REQUIRE(f.record.tracking_error.size() == 4);
        for (double e : f.record.tracking_error) {
            // the robots start at rest and need a few frames to turn onto their references
            if (n >= 10) {
                CHECK(e < 0.1);
            }
            if (n == 99) {
                CHECK(e < 0.01);
            }
        }
        s = std::move(f.state);
    }
    CHECK_THROWS_AS(initial_lattice(0, 0, 2), std::invalid_argument);
}

}

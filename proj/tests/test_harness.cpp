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
#include "cswarm/config.hpp"
#include "cswarm/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cswarm;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("cswarm-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ScenarioConfig small_config(const std::string& dir)
{
    ScenarioConfig c = preset("monomodal-regulation");
    c.grid             = 32;
    c.n_virtual        = 25;
    c.duration         = 0.2;
    c.jitter           = 0.2;
    c.output.directory = dir;
    return c;
}

} // namespace

TEST_SUITE("harness")
{

TEST_CASE("presets carry the published constants")
{
    const auto names = preset_names();
    for (const char* n : {"monomodal-regulation", "multimodal-regulation", "monomodal-tracking",
                          "multimodal-tracking", "theorem-1", "mixed-regulation"}) {
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
        CHECK_NOTHROW(preset(n).validate());
    }
    const ScenarioConfig mono = preset("monomodal-regulation");
    REQUIRE(mono.target.size() == 1);
    CHECK(mono.target[0].mode.mu == 0.0);
    CHECK(mono.target[0].mode.nu == 0.0);
    CHECK(mono.target[0].mode.k1 == 1.5);
    CHECK(mono.target[0].mode.k2 == 1.5);
    CHECK(mono.n_virtual == 100);
    CHECK(mono.dt == 0.01);
    CHECK(mono.grid == 200);
    CHECK(mono.k_p == 5.0);
    CHECK(mono.duration == 10.0);

    const ScenarioConfig multi = preset("multimodal-regulation");
    REQUIRE(multi.target.size() == 4);
    for (const auto& m : multi.target) {
        CHECK(m.mode.k1 == 2.0);
        CHECK(m.mode.k2 == 2.0);
        CHECK(std::abs(m.mode.mu) == doctest::Approx(pi / 2));
        CHECK(std::abs(m.mode.nu) == doctest::Approx(pi / 2));
    }

    const ScenarioConfig track = preset("monomodal-tracking");
    CHECK(track.target[0].mode.k1 == 1.0);
    const auto orbit = means_at(track.target_program(), 7.0)[0];
    CHECK(std::hypot(orbit[0], orbit[1]) == doctest::Approx(pi / 2));
    CHECK(means_at(track.target_program(), 1.0)[0] == Point{0.0, 0.0});

    const ScenarioConfig two = preset("multimodal-tracking");
    REQUIRE(two.target.size() == 2);
    CHECK(two.target[0].mode.k1 == 2.2);
    const auto m = means_at(two.target_program(), 5.0);
    CHECK(std::hypot(m[0][0], m[0][1]) == doctest::Approx(2 * pi / 3));

    const ScenarioConfig mixed = preset("mixed-regulation");
    CHECK(mixed.n_virtual == 96);
    CHECK(mixed.n_robots == 4);
    CHECK(mixed.limits.v_max == doctest::Approx(units::speed_to_nondim(0.8)));

    const ScenarioConfig th = preset("theorem-1");
    CHECK(th.oracle.grid == 128);
    CHECK(th.oracle.dt == 1e-3);
    CHECK(th.k_p == 5.0);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("json round trip and strict parsing")
{
    const ScenarioConfig a = preset("monomodal-tracking");
    const std::string text = dump_config(a);
    const ScenarioConfig b = config_from_json(nlohmann::ordered_json::parse(text));
    CHECK(dump_config(b) == text);

    auto j = nlohmann::ordered_json::parse(text);
    j["gains"]["bogus"] = 1;
    try {
        config_from_json(j);
        FAIL("unknown key accepted");
    }
    catch (const ConfigError& e) {
        CHECK(e.field() == "gains.bogus");
    }
    j = nlohmann::ordered_json::parse(text);
    j["dt"] = "fast";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("overrides and validation")
{
    const ScenarioConfig base = preset("monomodal-regulation");
    CHECK(apply_override(base, "gains.K_p=7").k_p == 7.0);
    CHECK(apply_override(base, "target.modes.0.k1=2.5").target[0].mode.k1 == 2.5);
    CHECK(apply_override(base, "name=other").name == "other");
    CHECK_THROWS_AS(apply_override(base, "gains.nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(base, "target.modes.3.k1=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(base, "no-equals"), ConfigError);

    for (const char* bad : {"dt=0", "dt=-0.1"}) {
        try {
            apply_override(base, bad).validate();
            FAIL("accepted " << bad);
        }
        catch (const ConfigError& e) {
            CHECK(e.field() == "dt");
            CHECK(std::string(e.what()).find("dt") != std::string::npos);
        }
    }
    CHECK_THROWS_AS(apply_override(base, "grid=33").validate(), ConfigError);
    CHECK_THROWS_AS(apply_override(base, "dimension=1").validate(), ConfigError);

    const ScenarioConfig snaps = base;
    const auto times           = snaps.snapshot_times();
    CHECK(times == std::vector<double>{0.0, 5.0, 10.0});
}

TEST_CASE("zero duration writes only the config echo")
{
    const fs::path dir = scratch("empty");
    ScenarioConfig c   = small_config(dir.string());
    c.duration         = 0.0;
    const ScenarioResult r = run_scenario(c);
    CHECK(r.trace.size() == 0);
    CHECK(fs::exists(dir / "config.json"));
    CHECK(load_config((dir / "config.json").string()).duration == 0.0);
}

TEST_CASE("outputs and bitwise rerun from the config echo")
{
    const fs::path dir = scratch("echo");
    ScenarioConfig c   = small_config(dir.string());
    const ScenarioResult first = run_scenario(c);
    CHECK(first.trace.size() == 20);
    for (double m : first.kde_mass) {
        CHECK(m == doctest::Approx(25.0).epsilon(1e-9));
    }
    for (const char* f : {"config.json", "trace.csv", "summary.json", "snapshots/t0_density.field",
                          "snapshots/t0.1_target.field", "snapshots/t0.2_agents.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir / f));
    }
    const std::string trace = slurp(dir / "trace.csv");

    const fs::path again = scratch("echo-again");
    ScenarioConfig echoed = load_config((dir / "config.json").string());
    echoed.output.directory = again.string();
    const ScenarioResult second = run_scenario(echoed);
    CHECK(second.trace.error_sq == first.trace.error_sq);
    CHECK(second.final_state.virtual_agents == first.final_state.virtual_agents);
    CHECK(slurp(again / "trace.csv") == trace);
}

TEST_CASE("mixed swarm with the extended domain")
{
    ScenarioConfig c = preset("mixed-regulation");
    c.grid           = 32;
    c.duration       = 0.1;
    RunOptions opts;
    opts.write_outputs   = false;
    const ScenarioResult r = run_scenario(c, opts);
    CHECK(r.trace.size() == 10);
    CHECK(r.final_state.robots.size() == 4);
    CHECK(r.tracking_rms.size() == 10);
    for (double m : r.kde_mass) {
        CHECK(m == doctest::Approx(100.0).epsilon(1e-9));
    }
    for (const auto& p : r.final_state.virtual_agents) {
        CHECK(p[0] >= -pi);
        CHECK(p[0] < pi);
    }
    CHECK(coordinate_scale(c) == 0.5);
    CHECK(TargetSchedule(c).grid().cells_per_axis() == 64);
}

TEST_CASE("oracle entry point writes the decay series")
{
    const fs::path dir = scratch("oracle");
    ScenarioConfig c   = preset("theorem-1");
    c.oracle.grid      = 32;
    c.oracle.duration  = 0.05;
    c.output.directory = dir.string();
    const MacroTrace tr = run_oracle(c);
    CHECK(tr.times.size() == 51);
    const std::string csv = slurp(dir / "oracle.csv");
    CHECK(csv.rfind("t,error_norm,ratio,exponential_law,mass,mass_d\n", 0) == 0);
}

TEST_CASE("field export and import")
{
    const fs::path dir = scratch("fields");
    fs::create_directories(dir);
    Grid g(2, 200);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    ScalarField f(g);
    for (auto& v : f.values) {
        v = u(rng);
    }
    const std::string path = (dir / "rho.field").string();
    export_field(f, path);
    const ScalarField back = import_scalar_field(path, g);
    double worst           = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        worst = std::max(worst, std::abs(back[i] - f[i]));
    }
    CHECK(worst <= 1e-12);
    CHECK(slurp(path).rfind("# cswarm-field dim=2 G=200 components=1 order=row-major-x1-fastest\n", 0) == 0);

    try {
        import_scalar_field(path, Grid(2, 100));
        FAIL("grid mismatch accepted");
    }
    catch (const FieldFormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("100") != std::string::npos);
        CHECK(msg.find("200") != std::string::npos);
    }

    const ScalarField flat(g, 100.0 / (two_pi * two_pi));
    export_field(flat, path);
    CHECK(integrate(import_scalar_field(path)) == doctest::Approx(100.0).epsilon(1e-9));

    VectorField v(Grid(2, 16));
    v[0][3] = 1.25;
    v[1][7] = -2.5;
    const std::string vpath = (dir / "v.field").string();
    export_field(v, vpath);
    const VectorField vb = import_vector_field(vpath);
    CHECK(vb[0][3] == 1.25);
    CHECK(vb[1][7] == -2.5);
    CHECK_THROWS_AS(import_scalar_field(vpath), FieldFormatError);

    std::ofstream(dir / "junk.field") << "hello\n1\n";
    CHECK_THROWS_AS(import_scalar_field((dir / "junk.field").string()), FieldFormatError);
}

}

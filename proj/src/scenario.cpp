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
#include "cswarm/scenario.hpp"

#include "cswarm/station.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

namespace cswarm
{

namespace fs = std::filesystem;

double coordinate_scale(const ScenarioConfig& config)
{
    return config.extended.enabled ? 0.5 : 1.0;
}

LoopParams loop_params(const ScenarioConfig& c)
{
    const double s = coordinate_scale(c);
    LoopParams p;
    p.grid                = Grid(2, c.extended.enabled ? 2 * c.grid : c.grid);
    p.kernel              = c.kernel;
    p.kernel.dim          = 2;
    p.kernel.length_scale = s * c.kernel.length_scale;
    p.kernel.morse.l_rep  = s * c.kernel.morse.l_rep;
    p.kernel.morse.l_att  = s * c.kernel.morse.l_att;
    p.kernel.morse.c_rep  = s * c.kernel.morse.c_rep;
    p.kernel.morse.c_att  = s * c.kernel.morse.c_att;
    p.kde.bandwidth       = s * c.kde.bandwidth;

    p.gains.k_p                = c.k_p / s;
    p.gains.fourier_modes      = c.fourier_modes;
    p.gains.rho_floor          = c.rho_floor * static_cast<double>(c.agent_count()) / (two_pi * two_pi);
    p.gains.mass_tolerance     = c.mass_tolerance;
    p.gains.target_feedforward = c.target_feedforward;

    p.limits.v_max     = c.limits.v_max;
    p.limits.omega_max = c.limits.omega_max / s;
    p.limits.lookahead = s * c.limits.lookahead;
    p.tracking_gain    = c.tracking_gain / s;
    p.dt               = s * c.dt;
    p.interaction      = c.interaction;
    p.pose_noise       = s * c.pose_noise;
    return p;
}

TargetSchedule::TargetSchedule(const ScenarioConfig& config)
    : m_config(config)
    , m_program(config.target_program())
    , m_arena_grid(2, config.grid)
    , m_loop_grid(2, config.extended.enabled ? 2 * config.grid : config.grid)
{
}

ScalarField TargetSchedule::at(double t) const
{
    ScalarField inner = target_density(m_program, m_arena_grid, t);
    if (!m_config.extended.enabled) {
        return inner;
    }
    const double peak = 4.0 * *std::max_element(inner.values.begin(), inner.values.end());
    return embed_extended(inner, m_config.extended.floor * peak, m_config.extended.seam_cells);
}

std::optional<ScalarField> TargetSchedule::rate(double t) const
{
    if (m_program.is_static()) {
        return std::nullopt;
    }
    constexpr double delta = 1e-4;
    const double lo        = std::max(0.0, t - delta);
    const double hi        = t + delta;
    const ScalarField a    = at(lo);
    const ScalarField b    = at(hi);
    // d/dtau = (1 / scale) d/dt
    const double factor = 1.0 / ((hi - lo) * coordinate_scale(m_config));
    ScalarField out(a.grid);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (b[i] - a[i]) * factor;
    }
    return out;
}

SwarmState initial_state(const ScenarioConfig& config)
{
    return initial_lattice(static_cast<std::size_t>(config.n_virtual), static_cast<std::size_t>(config.n_robots), 2,
                           config.jitter, config.seed, config.heading, config.limits.lookahead);
}

namespace
{

SwarmState scaled(const SwarmState& in, double s, double lookahead)
{
    SwarmState out = in;
    for (auto& p : out.virtual_agents) {
        p = {s * p[0], s * p[1]};
    }
    for (auto& r : out.robots) {
        r.position  = {s * r.position[0], s * r.position[1]};
        r.reference = {s * r.reference[0], s * r.reference[1]};
    }
    if (s < 1.0) {
        for (auto& r : out.robots) {
            r.reference = point_b(r, lookahead);
        }
    }
    return out;
}

std::string time_tag(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

void write_positions(const std::vector<Point>& positions, std::size_t n_virtual, double inv_scale,
                     const std::string& path)
{
    std::ofstream out(path);
    out << "index,kind,x,y\n";
    char buf[96];
    for (std::size_t i = 0; i < positions.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g\n", i, i < n_virtual ? "virtual" : "robot",
                      inv_scale * positions[i][0], inv_scale * positions[i][1]);
        out << buf;
    }
}

double mean_tail(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    const std::size_t start = v.size() - std::max<std::size_t>(1, v.size() / 4);
    double sum              = 0.0;
    for (std::size_t i = start; i < v.size(); ++i) {
        sum += v[i];
    }
    return sum / static_cast<double>(v.size() - start);
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options)
{
    config.validate();
    const auto started        = std::chrono::steady_clock::now();
    const double s            = coordinate_scale(config);
    const LoopParams params   = loop_params(config);
    const TargetSchedule schedule(config);
    const fs::path dir(config.output.directory);

    if (options.write_outputs) {
        fs::create_directories(dir);
        std::ofstream(dir / "config.json") << dump_config(config);
    }

    SwarmState arena = options.initial ? *options.initial : initial_state(config);
    std::unique_ptr<Station> station;
    std::unique_ptr<RobotBackend> owned;
    RobotBackend* backend = options.backend;
    if (!backend) {
        if (config.network.enabled) {
            StationConfig sc;
            sc.host             = config.network.host;
            sc.port             = static_cast<std::uint16_t>(config.network.port);
            sc.robots           = config.n_robots;
            sc.fps              = config.network.fps;
            sc.frame_timeout    = config.network.frame_timeout;
            sc.drop_probability = config.network.drop_probability;
            sc.seed             = config.seed;
            station             = std::make_unique<Station>(sc);
            const auto wait     = std::chrono::milliseconds(static_cast<long>(1000.0 * config.network.connect_timeout));
            if (!station->wait_for_robots(wait)) {
                throw std::runtime_error("station: not every robot connected within network.connect_timeout");
            }
            const auto poses = station->poses();
            for (std::size_t i = 0; i < arena.robots.size(); ++i) {
                arena.robots[i].position  = poses[i].position;
                arena.robots[i].heading   = poses[i].heading;
                arena.robots[i].reference = point_b(arena.robots[i], config.limits.lookahead);
            }
            owned = std::make_unique<NetworkRobots>(*station, params, s);
        }
        else {
            owned = std::make_unique<InProcessRobots>(params, config.seed);
        }
        backend = owned.get();
    }

    SwarmState state = scaled(arena, s, params.limits.lookahead);
    const long steps = std::lround(config.duration / config.dt);
    std::set<long> snapshot_steps;
    for (double t : config.snapshot_times()) {
        snapshot_steps.insert(std::lround(t / config.dt));
    }
    const bool snapshots = options.write_outputs && config.output.write_fields;
    if (snapshots) {
        fs::create_directories(dir / "snapshots");
    }
    auto snapshot = [&](long n, const ScalarField& density, const ScalarField& target,
                        const std::vector<Point>& positions) {
        const std::string tag = (dir / "snapshots" / ("t" + time_tag(static_cast<double>(n) * config.dt))).string();
        export_field(density, tag + "_density.field");
        export_field(target, tag + "_target.field");
        write_positions(positions, state.virtual_agents.size(), 1.0 / s, tag + "_agents.csv");
    };

    ScenarioResult result;
    for (long n = 0; n < steps; ++n) {
        const double t           = static_cast<double>(n) * config.dt;
        const ScalarField target = schedule.at(t);
        const auto rate          = config.target_feedforward ? schedule.rate(t) : std::nullopt;
        FrameResult frame        = closed_loop_frame(state, target, rate, params, *backend);

        result.trace.append(n, t, frame.record.error_sq, frame.record.kl);
        result.kde_mass.push_back(frame.record.mass);
        if (!frame.record.tracking_error.empty()) {
            double sq = 0.0;
            for (double e : frame.record.tracking_error) {
                sq += e * e;
            }
            result.tracking_rms.push_back(std::sqrt(sq / static_cast<double>(frame.record.tracking_error.size())) / s);
            std::vector<Point> path;
            for (const auto& r : frame.state.robots) {
                path.push_back({r.position[0] / s, r.position[1] / s});
            }
            result.robot_paths.push_back(std::move(path));
        }
        if (snapshots && snapshot_steps.count(n)) {
            snapshot(n, frame.density, target, frame.record.positions);
        }
        if (options.observer) {
            options.observer(frame);
        }
        state = std::move(frame.state);
    }
    if (snapshots && snapshot_steps.count(steps)) {
        const auto all = state.all_positions();
        snapshot(steps, estimate_density(all, params.kde, params.grid),
                 schedule.at(static_cast<double>(steps) * config.dt), all);
    }
    if (station) {
        station->shutdown();
    }

    result.final_state = state;
    for (auto& p : result.final_state.virtual_agents) {
        p = {p[0] / s, p[1] / s};
    }
    for (auto& r : result.final_state.robots) {
        r.position  = {r.position[0] / s, r.position[1] / s};
        r.reference = {r.reference[0] / s, r.reference[1] / s};
    }
    result.final_state.t = static_cast<double>(steps) * config.dt;
    result.wall_seconds  = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (options.write_outputs) {
        {
            std::ofstream out(dir / "trace.csv");
            result.trace.write_csv(out, true);
        }
        if (!result.robot_paths.empty()) {
            std::ofstream out(dir / "robots.csv");
            out << "step,t,robot,x,y,tracking_rms\n";
            char buf[160];
            for (std::size_t n = 0; n < result.robot_paths.size(); ++n) {
                for (std::size_t r = 0; r < result.robot_paths[n].size(); ++r) {
                    std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%.17g,%.17g,%.17g\n", n,
                                  static_cast<double>(n) * config.dt, r, result.robot_paths[n][r][0],
                                  result.robot_paths[n][r][1], result.tracking_rms[n]);
                    out << buf;
                }
            }
        }
        const auto e_bar = result.trace.e_bar();
        nlohmann::ordered_json summary;
        summary["name"]               = config.name;
        summary["frames"]             = result.trace.size();
        summary["final_E_bar"]        = e_bar.empty() ? 0.0 : e_bar.back();
        summary["final_kl"]           = result.trace.kl.empty() ? 0.0 : result.trace.kl.back();
        summary["tail_mean_E_bar"]    = mean_tail(e_bar);
        summary["tail_mean_kl"]       = mean_tail(result.trace.kl);
        summary["tail_tracking_rms"]  = mean_tail(result.tracking_rms);
        summary["wall_seconds"]       = result.wall_seconds;
        std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";
    }
    return result;
}

MacroTrace run_oracle(const ScenarioConfig& config, bool write_outputs)
{
    config.validate();
    const Grid grid(2, config.oracle.grid);
    const double n = config.oracle.mass;
    const ScalarField rho0(grid, n / (two_pi * two_pi));
    TargetProgram program    = config.target_program();
    program.total_mass       = n;
    const ScalarField target = target_density(program, grid, 0.0);
    ControlGains gains;
    gains.k_p            = config.k_p;
    gains.mass_tolerance = config.mass_tolerance;
    KernelSpec kernel    = config.kernel;
    kernel.dim           = 2;
    MacroRunOptions opts{config.oracle.integrator, config.oracle.record_every};
    MacroTrace trace = run_controlled_macro(rho0, target, kernel, gains, config.oracle.duration, config.oracle.dt, opts);
    if (write_outputs) {
        const fs::path dir(config.output.directory);
        fs::create_directories(dir);
        std::ofstream(dir / "config.json") << dump_config(config);
        std::ofstream out(dir / "oracle.csv");
        out << "t,error_norm,ratio,exponential_law,mass,mass_d\n";
        char buf[200];
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", trace.times[i],
                          trace.error_norm[i], trace.error_norm[0] > 0.0 ? trace.error_norm[i] / trace.error_norm[0] : 0.0,
                          std::exp(-config.k_p * trace.times[i]), trace.mass[i], trace.mass_d[i]);
            out << buf;
        }
    }
    return trace;
}

namespace
{

void write_field(const Grid& grid, const std::vector<const std::vector<double>*>& comps, const std::string& path)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) {
        throw FieldFormatError("export_field: cannot open " + path + " for writing");
    }
    std::fprintf(f, "# cswarm-field dim=%d G=%d components=%zu order=row-major-x1-fastest\n", grid.dim(),
                 grid.cells_per_axis(), comps.size());
    for (const auto* c : comps) {
        for (double v : *c) {
            std::fprintf(f, "%.17g\n", v);
        }
    }
    if (std::fclose(f) != 0) {
        throw FieldFormatError("export_field: write to " + path + " failed");
    }
}

struct FieldFile {
    int dim        = 0;
    int g          = 0;
    std::size_t components = 0;
    std::vector<double> values;
};

FieldFile read_field(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FieldFormatError("import_field: cannot open " + path);
    }
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string hash, magic;
    hs >> hash >> magic;
    if (hash != "#" || magic != "cswarm-field") {
        throw FieldFormatError("import_field: " + path + " lacks the '# cswarm-field' header");
    }
    FieldFile f;
    bool has_dim = false, has_g = false, has_c = false, has_order = false;
    std::string kv;
    while (hs >> kv) {
        const auto eq = kv.find('=');
        const std::string key = kv.substr(0, eq);
        const std::string val = eq == std::string::npos ? "" : kv.substr(eq + 1);
        try {
            if (key == "dim") {
                f.dim   = std::stoi(val);
                has_dim = true;
            }
            else if (key == "G") {
                f.g   = std::stoi(val);
                has_g = true;
            }
            else if (key == "components") {
                f.components = static_cast<std::size_t>(std::stoul(val));
                has_c        = true;
            }
            else if (key == "order") {
                if (val != "row-major-x1-fastest") {
                    throw FieldFormatError("import_field: unsupported order '" + val + "'");
                }
                has_order = true;
            }
        }
        catch (const std::logic_error&) {
            throw FieldFormatError("import_field: bad header entry '" + kv + "'");
        }
    }
    if (!(has_dim && has_g && has_c && has_order)) {
        throw FieldFormatError("import_field: header must carry dim, G, components and order");
    }
    if ((f.dim != 1 && f.dim != 2) || f.g < 4 || f.g % 2 != 0 || f.components == 0) {
        throw FieldFormatError("import_field: header describes an invalid grid");
    }
    const std::size_t expected =
        f.components * static_cast<std::size_t>(f.dim == 2 ? f.g * f.g : f.g);
    f.values.reserve(expected);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        char* end       = nullptr;
        const double v  = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || *end != '\0') {
            throw FieldFormatError("import_field: bad value on data line " + std::to_string(f.values.size() + 1));
        }
        f.values.push_back(v);
    }
    if (f.values.size() != expected) {
        throw FieldFormatError("import_field: expected " + std::to_string(expected) + " values, found " +
                               std::to_string(f.values.size()));
    }
    return f;
}

Grid checked_grid(const FieldFile& f, std::size_t components, const std::optional<Grid>& expected)
{
    if (expected && (expected->dim() != f.dim || expected->cells_per_axis() != f.g)) {
        throw FieldFormatError("import_field: grid mismatch, expected dim=" + std::to_string(expected->dim()) +
                               " G=" + std::to_string(expected->cells_per_axis()) + ", file has dim=" +
                               std::to_string(f.dim) + " G=" + std::to_string(f.g));
    }
    if (f.components != components) {
        throw FieldFormatError("import_field: expected " + std::to_string(components) + " components, file has " +
                               std::to_string(f.components));
    }
    return Grid(f.dim, f.g);
}

} // namespace

void export_field(const ScalarField& field, const std::string& path)
{
    write_field(field.grid, {&field.values}, path);
}

void export_field(const VectorField& field, const std::string& path)
{
    std::vector<const std::vector<double>*> comps;
    for (const auto& c : field.components) {
        comps.push_back(&c);
    }
    write_field(field.grid, comps, path);
}

ScalarField import_scalar_field(const std::string& path, const std::optional<Grid>& expected)
{
    FieldFile f = read_field(path);
    ScalarField out(checked_grid(f, 1, expected));
    out.values = std::move(f.values);
    return out;
}

VectorField import_vector_field(const std::string& path, const std::optional<Grid>& expected)
{
    FieldFile f     = read_field(path);
    const Grid grid = checked_grid(f, static_cast<std::size_t>(f.dim), expected);
    VectorField out(grid);
    const std::size_t n = grid.size();
    for (int a = 0; a < grid.dim(); ++a) {
        auto& c = out[a];
        std::copy(f.values.begin() + static_cast<std::ptrdiff_t>(a * n),
                  f.values.begin() + static_cast<std::ptrdiff_t>((a + 1) * n), c.begin());
    }
    return out;
}

} // namespace cswarm

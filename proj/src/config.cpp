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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cswarm
{

using Json = nlohmann::ordered_json;

ConfigError::ConfigError(std::string field, const std::string& constraint)
    : std::invalid_argument(field + ": " + constraint)
    , m_field(std::move(field))
{
}

namespace
{

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// Reads the keys of one JSON object, remembering which ones were consumed.
class ObjectReader
{
public:
    ObjectReader(const Json& j, std::string path)
        : m_j(j)
        , m_path(std::move(path))
    {
        if (!j.is_object()) {
            throw ConfigError(m_path.empty() ? "<root>" : m_path, "must be an object");
        }
    }

    void get(const char* key, double& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_number()) {
                throw ConfigError(join(m_path, key), "must be a number");
            }
            out = v->get<double>();
        }
    }
    void get(const char* key, int& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(join(m_path, key), "must be an integer");
            }
            const auto x = v->get<std::int64_t>();
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
                throw ConfigError(join(m_path, key), "is out of the integer range");
            }
            out = static_cast<int>(x);
        }
    }
    void get(const char* key, std::uint64_t& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
                throw ConfigError(join(m_path, key), "must be a non-negative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, bool& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_boolean()) {
                throw ConfigError(join(m_path, key), "must be true or false");
            }
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::string& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_string()) {
                throw ConfigError(join(m_path, key), "must be a string");
            }
            out = v->get<std::string>();
        }
    }
    void get(const char* key, Point& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                throw ConfigError(join(m_path, key), "must be an array of two numbers");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }
    void get(const char* key, std::vector<double>& out)
    {
        if (const Json* v = take(key)) {
            if (!v->is_array()) {
                throw ConfigError(join(m_path, key), "must be an array of numbers");
            }
            out.clear();
            for (const auto& x : *v) {
                if (!x.is_number()) {
                    throw ConfigError(join(m_path, key), "must be an array of numbers");
                }
                out.push_back(x.get<double>());
            }
        }
    }

    /// Reads a string and maps it through choices.
    template <class E>
    void choice(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> choices)
    {
        std::string s;
        get(key, s);
        if (!m_j.contains(key)) {
            return;
        }
        std::string allowed;
        for (const auto& [name, value] : choices) {
            if (s == name) {
                out = value;
                return;
            }
            allowed += allowed.empty() ? name : std::string(", ") + name;
        }
        throw ConfigError(join(m_path, key), "must be one of " + allowed);
    }

    const Json* take(const char* key)
    {
        if (!m_j.contains(key)) {
            return nullptr;
        }
        m_seen.insert(key);
        return &m_j.at(key);
    }

    std::string path(const char* key) const
    {
        return join(m_path, key);
    }

    void finish() const
    {
        for (const auto& item : m_j.items()) {
            if (!m_seen.count(item.key())) {
                throw ConfigError(join(m_path, item.key()), "unknown key");
            }
        }
    }

private:
    const Json& m_j;
    std::string m_path;
    std::set<std::string> m_seen;
};

template <class F>
void section(ObjectReader& parent, const char* key, F&& read)
{
    if (const Json* v = parent.take(key)) {
        ObjectReader r(*v, parent.path(key));
        read(r);
        r.finish();
    }
}

Json phase_json(const TrajectoryPhase& phase)
{
    return std::visit(
        [](const auto& p) -> Json {
            using T = std::decay_t<decltype(p)>;
            Json j;
            if constexpr (std::is_same_v<T, HoldPhase>) {
                j["type"] = "hold";
            }
            else if constexpr (std::is_same_v<T, LinearPhase>) {
                j["type"]     = "linear";
                j["velocity"] = {p.velocity[0], p.velocity[1]};
            }
            else {
                j["type"]   = "orbit";
                j["center"] = {p.center[0], p.center[1]};
                j["rate"]   = p.rate;
            }
            j["duration"] = p.duration;
            return j;
        },
        phase);
}

TrajectoryPhase phase_from(const Json& j, const std::string& path)
{
    ObjectReader r(j, path);
    std::string type;
    r.get("type", type);
    TrajectoryPhase out;
    if (type == "hold") {
        HoldPhase p;
        r.get("duration", p.duration);
        out = p;
    }
    else if (type == "linear") {
        LinearPhase p;
        r.get("velocity", p.velocity);
        r.get("duration", p.duration);
        out = p;
    }
    else if (type == "orbit") {
        OrbitPhase p;
        r.get("center", p.center);
        r.get("rate", p.rate);
        r.get("duration", p.duration);
        out = p;
    }
    else {
        throw ConfigError(join(path, "type"), "must be one of hold, linear, orbit");
    }
    r.finish();
    return out;
}

const char* kind_name(KernelKind k)
{
    return k == KernelKind::morse ? "morse" : "repulsive";
}

void require(bool ok, const std::string& field, const std::string& constraint)
{
    if (!ok) {
        throw ConfigError(field, constraint);
    }
}

bool finite(double x)
{
    return std::isfinite(x);
}

void check_grid(int g, const std::string& field)
{
    require(g >= 4 && g % 2 == 0, field, "must be an even integer >= 4");
}

} // namespace

TargetProgram ScenarioConfig::target_program() const
{
    return TargetProgram{target, static_cast<double>(agent_count())};
}

std::vector<double> ScenarioConfig::snapshot_times() const
{
    if (!output.snapshots.empty()) {
        return output.snapshots;
    }
    return {0.0, 0.5 * duration, duration};
}

void ScenarioConfig::validate() const
{
    require(dimension == 2, "dimension", "must be 2 (targets are 2D von Mises mixtures)");
    check_grid(grid, "grid");
    require(finite(dt) && dt > 0.0, "dt", "must be > 0");
    require(finite(duration) && duration >= 0.0, "duration", "must be >= 0");
    require(n_virtual >= 0, "agents.virtual", "must be >= 0");
    require(n_robots >= 0, "agents.robots", "must be >= 0");
    require(n_virtual + n_robots >= 1, "agents", "virtual + robots must be >= 1");
    require(finite(jitter) && jitter >= 0.0 && jitter < 0.5, "agents.jitter", "must lie in [0, 0.5)");
    require(finite(heading), "agents.heading", "must be finite");

    require(finite(kernel.length_scale) && kernel.length_scale > 0.0, "kernel.length_scale", "must be > 0");
    require(kernel.periodization_layers >= 0, "kernel.periodization_layers", "must be >= 0");
    if (kernel.kind == KernelKind::morse) {
        require(kernel.morse.l_rep > 0.0, "kernel.morse.l_rep", "must be > 0");
        require(kernel.morse.l_att > 0.0, "kernel.morse.l_att", "must be > 0");
        require(kernel.morse.c_rep >= 0.0, "kernel.morse.c_rep", "must be >= 0");
        require(kernel.morse.c_att >= 0.0, "kernel.morse.c_att", "must be >= 0");
    }
    require(finite(kde.bandwidth) && kde.bandwidth > 0.0, "kde.bandwidth", "must be > 0");
    require(finite(k_p) && k_p > 0.0, "gains.K_p", "must be > 0");
    require(fourier_modes >= 0 && fourier_modes <= grid, "gains.fourier_modes", "must lie in [0, grid]");
    require(finite(rho_floor) && rho_floor > 0.0, "gains.rho_floor", "must be > 0");
    require(finite(mass_tolerance) && mass_tolerance > 0.0, "gains.mass_tolerance", "must be > 0");

    require(!target.empty(), "target.modes", "must contain at least one mode");
    for (std::size_t i = 0; i < target.size(); ++i) {
        const std::string p = "target.modes." + std::to_string(i);
        const auto& m       = target[i].mode;
        require(finite(m.mu) && finite(m.nu), p + ".mu", "means must be finite");
        require(finite(m.k1) && m.k1 >= 0.0, p + ".k1", "must be >= 0");
        require(finite(m.k2) && m.k2 >= 0.0, p + ".k2", "must be >= 0");
        require(finite(m.weight) && m.weight > 0.0, p + ".weight", "must be > 0");
        for (std::size_t k = 0; k < target[i].phases.size(); ++k) {
            const std::string q = p + ".phases." + std::to_string(k);
            std::visit(
                [&](const auto& ph) {
                    require(finite(ph.duration) && ph.duration >= 0.0, q + ".duration", "must be >= 0");
                    using T = std::decay_t<decltype(ph)>;
                    if constexpr (std::is_same_v<T, LinearPhase>) {
                        require(finite(ph.velocity[0]) && finite(ph.velocity[1]), q + ".velocity", "must be finite");
                    }
                    if constexpr (std::is_same_v<T, OrbitPhase>) {
                        require(finite(ph.rate), q + ".rate", "must be finite");
                        require(finite(ph.center[0]) && finite(ph.center[1]), q + ".center", "must be finite");
                    }
                },
                target[i].phases[k]);
        }
    }

    require(finite(extended.floor) && extended.floor > 0.0 && extended.floor < 1.0, "extended_domain.floor",
            "must lie in (0, 1)");
    require(extended.seam_cells >= 0 && extended.seam_cells < grid / 2, "extended_domain.seam_cells",
            "must lie in [0, grid / 2)");

    require(finite(limits.v_max) && limits.v_max > 0.0, "robots.v_max", "must be > 0");
    require(finite(limits.omega_max) && limits.omega_max > 0.0, "robots.omega_max", "must be > 0");
    require(finite(limits.lookahead) && limits.lookahead > 0.0, "robots.lookahead", "must be > 0");
    require(finite(tracking_gain) && tracking_gain > 0.0, "robots.tracking_gain", "must be > 0");
    require(finite(pose_noise) && pose_noise >= 0.0, "robots.pose_noise", "must be >= 0");

    require(!network.enabled || n_robots > 0, "network.enabled", "needs agents.robots > 0");
    require(network.port >= 0 && network.port <= 65535, "network.port", "must lie in [0, 65535]");
    require(finite(network.fps) && network.fps >= 0.0, "network.fps", "must be >= 0");
    require(finite(network.frame_timeout) && network.frame_timeout > 0.0, "network.frame_timeout", "must be > 0");
    require(finite(network.connect_timeout) && network.connect_timeout > 0.0, "network.connect_timeout",
            "must be > 0");
    require(network.drop_probability >= 0.0 && network.drop_probability < 1.0, "network.drop_probability",
            "must lie in [0, 1)");

    require(!output.directory.empty(), "output.directory", "must not be empty");
    for (double t : output.snapshots) {
        require(finite(t) && t >= 0.0 && t <= duration, "output.snapshots", "times must lie in [0, duration]");
    }

    require(finite(oracle.mass) && oracle.mass > 0.0, "oracle.mass", "must be > 0");
    check_grid(oracle.grid, "oracle.grid");
    require(finite(oracle.dt) && oracle.dt > 0.0, "oracle.dt", "must be > 0");
    require(finite(oracle.duration) && oracle.duration >= 0.0, "oracle.duration", "must be >= 0");
    require(oracle.record_every >= 1, "oracle.record_every", "must be >= 1");
}

Json to_json(const ScenarioConfig& c)
{
    Json j;
    j["name"]      = c.name;
    j["dimension"] = c.dimension;
    j["grid"]      = c.grid;
    j["dt"]        = c.dt;
    j["duration"]  = c.duration;
    j["seed"]      = c.seed;
    j["agents"]    = {{"virtual", c.n_virtual}, {"robots", c.n_robots}, {"jitter", c.jitter}, {"heading", c.heading}};
    j["kernel"]    = {{"kind", kind_name(c.kernel.kind)},
                      {"length_scale", c.kernel.length_scale},
                      {"periodization_layers", c.kernel.periodization_layers},
                      {"morse",
                       {{"c_rep", c.kernel.morse.c_rep},
                        {"l_rep", c.kernel.morse.l_rep},
                        {"c_att", c.kernel.morse.c_att},
                        {"l_att", c.kernel.morse.l_att}}}};
    j["kde"]       = {{"bandwidth", c.kde.bandwidth}};
    j["gains"]     = {{"K_p", c.k_p},
                      {"fourier_modes", c.fourier_modes},
                      {"rho_floor", c.rho_floor},
                      {"target_feedforward", c.target_feedforward},
                      {"mass_tolerance", c.mass_tolerance}};
    j["interaction"] = c.interaction == InteractionMode::grid ? "grid" : "direct";
    Json modes       = Json::array();
    for (const auto& m : c.target) {
        Json phases = Json::array();
        for (const auto& p : m.phases) {
            phases.push_back(phase_json(p));
        }
        modes.push_back({{"mu", m.mode.mu},
                         {"nu", m.mode.nu},
                         {"k1", m.mode.k1},
                         {"k2", m.mode.k2},
                         {"weight", m.mode.weight},
                         {"phases", phases}});
    }
    j["target"]          = {{"modes", modes}};
    j["extended_domain"] = {
        {"enabled", c.extended.enabled}, {"floor", c.extended.floor}, {"seam_cells", c.extended.seam_cells}};
    j["robots"]  = {{"v_max", c.limits.v_max},
                    {"omega_max", c.limits.omega_max},
                    {"lookahead", c.limits.lookahead},
                    {"tracking_gain", c.tracking_gain},
                    {"pose_noise", c.pose_noise}};
    j["network"] = {{"enabled", c.network.enabled},
                    {"host", c.network.host},
                    {"port", c.network.port},
                    {"fps", c.network.fps},
                    {"frame_timeout", c.network.frame_timeout},
                    {"connect_timeout", c.network.connect_timeout},
                    {"drop_probability", c.network.drop_probability}};
    j["output"]  = {{"directory", c.output.directory},
                    {"snapshots", c.output.snapshots},
                    {"write_fields", c.output.write_fields}};
    j["oracle"]  = {{"mass", c.oracle.mass},
                    {"grid", c.oracle.grid},
                    {"dt", c.oracle.dt},
                    {"duration", c.oracle.duration},
                    {"integrator", c.oracle.integrator == MacroIntegrator::midpoint ? "midpoint" : "euler"},
                    {"record_every", c.oracle.record_every}};
    return j;
}

ScenarioConfig config_from_json(const Json& j)
{
    ScenarioConfig c;
    ObjectReader r(j, "");
    r.get("name", c.name);
    r.get("dimension", c.dimension);
    r.get("grid", c.grid);
    r.get("dt", c.dt);
    r.get("duration", c.duration);
    r.get("seed", c.seed);
    section(r, "agents", [&](ObjectReader& s) {
        s.get("virtual", c.n_virtual);
        s.get("robots", c.n_robots);
        s.get("jitter", c.jitter);
        s.get("heading", c.heading);
    });
    section(r, "kernel", [&](ObjectReader& s) {
        s.choice("kind", c.kernel.kind, {{"repulsive", KernelKind::repulsive_exp}, {"morse", KernelKind::morse}});
        s.get("length_scale", c.kernel.length_scale);
        s.get("periodization_layers", c.kernel.periodization_layers);
        section(s, "morse", [&](ObjectReader& m) {
            m.get("c_rep", c.kernel.morse.c_rep);
            m.get("l_rep", c.kernel.morse.l_rep);
            m.get("c_att", c.kernel.morse.c_att);
            m.get("l_att", c.kernel.morse.l_att);
        });
    });
    section(r, "kde", [&](ObjectReader& s) {
        s.get("bandwidth", c.kde.bandwidth);
    });
    section(r, "gains", [&](ObjectReader& s) {
        s.get("K_p", c.k_p);
        s.get("fourier_modes", c.fourier_modes);
        s.get("rho_floor", c.rho_floor);
        s.get("target_feedforward", c.target_feedforward);
        s.get("mass_tolerance", c.mass_tolerance);
    });
    r.choice("interaction", c.interaction, {{"direct", InteractionMode::direct}, {"grid", InteractionMode::grid}});
    section(r, "target", [&](ObjectReader& s) {
        if (const Json* modes = s.take("modes")) {
            if (!modes->is_array()) {
                throw ConfigError("target.modes", "must be an array");
            }
            c.target.clear();
            for (std::size_t i = 0; i < modes->size(); ++i) {
                const std::string path = "target.modes." + std::to_string(i);
                ObjectReader m((*modes)[i], path);
                ModeProgram prog;
                m.get("mu", prog.mode.mu);
                m.get("nu", prog.mode.nu);
                m.get("k1", prog.mode.k1);
                m.get("k2", prog.mode.k2);
                m.get("weight", prog.mode.weight);
                if (const Json* phases = m.take("phases")) {
                    if (!phases->is_array()) {
                        throw ConfigError(path + ".phases", "must be an array");
                    }
                    for (std::size_t k = 0; k < phases->size(); ++k) {
                        prog.phases.push_back(phase_from((*phases)[k], path + ".phases." + std::to_string(k)));
                    }
                }
                m.finish();
                c.target.push_back(std::move(prog));
            }
        }
    });
    section(r, "extended_domain", [&](ObjectReader& s) {
        s.get("enabled", c.extended.enabled);
        s.get("floor", c.extended.floor);
        s.get("seam_cells", c.extended.seam_cells);
    });
    section(r, "robots", [&](ObjectReader& s) {
        s.get("v_max", c.limits.v_max);
        s.get("omega_max", c.limits.omega_max);
        s.get("lookahead", c.limits.lookahead);
        s.get("tracking_gain", c.tracking_gain);
        s.get("pose_noise", c.pose_noise);
    });
    section(r, "network", [&](ObjectReader& s) {
        s.get("enabled", c.network.enabled);
        s.get("host", c.network.host);
        s.get("port", c.network.port);
        s.get("fps", c.network.fps);
        s.get("frame_timeout", c.network.frame_timeout);
        s.get("connect_timeout", c.network.connect_timeout);
        s.get("drop_probability", c.network.drop_probability);
    });
    section(r, "output", [&](ObjectReader& s) {
        s.get("directory", c.output.directory);
        s.get("snapshots", c.output.snapshots);
        s.get("write_fields", c.output.write_fields);
    });
    section(r, "oracle", [&](ObjectReader& s) {
        s.get("mass", c.oracle.mass);
        s.get("grid", c.oracle.grid);
        s.get("dt", c.oracle.dt);
        s.get("duration", c.oracle.duration);
        s.choice("integrator", c.oracle.integrator,
                 {{"euler", MacroIntegrator::euler}, {"midpoint", MacroIntegrator::midpoint}});
        s.get("record_every", c.oracle.record_every);
    });
    r.finish();
    c.kernel.dim = c.dimension;
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("<file>", "cannot open " + path);
    }
    Json j;
    try {
        j = Json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

std::string dump_config(const ScenarioConfig& config)
{
    return to_json(config).dump(2) + "\n";
}

ScenarioConfig apply_override(const ScenarioConfig& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(assignment, "override must look like key=value");
    }
    const std::string key  = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json j                 = to_json(config);
    Json* node             = &j;
    std::stringstream parts(key);
    std::string seg;
    while (std::getline(parts, seg, '.')) {
        if (node->is_object()) {
            if (!node->contains(seg)) {
                throw ConfigError(key, "unknown key");
            }
            node = &(*node)[seg];
        }
        else if (node->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx              = std::stoul(seg, &used);
                if (used != seg.size()) {
                    throw std::invalid_argument(seg);
                }
            }
            catch (const std::exception&) {
                throw ConfigError(key, "array index expected at '" + seg + "'");
            }
            if (idx >= node->size()) {
                throw ConfigError(key, "array index " + seg + " out of range");
            }
            node = &(*node)[idx];
        }
        else {
            throw ConfigError(key, "unknown key");
        }
    }
    Json value;
    try {
        value = Json::parse(text);
    }
    catch (const nlohmann::json::parse_error&) {
        value = text;
    }
    *node = value;
    return config_from_json(j);
}

namespace
{

ModeProgram fixed_mode(double mu, double nu, double k)
{
    return ModeProgram{VonMisesMode{mu, nu, k, k, 1.0}, {HoldPhase{0.0}}};
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"monomodal-regulation", "multimodal-regulation", "monomodal-tracking",
            "multimodal-tracking",  "theorem-1",             "mixed-regulation"};
}

ScenarioConfig preset(const std::string& name)
{
    ScenarioConfig c;
    c.name             = name;
    c.output.directory = "cswarm-out/" + name;
    const double quarter_turn = pi / 4.0;
    if (name == "monomodal-regulation" || name == "theorem-1" || name == "mixed-regulation") {
        c.target = {fixed_mode(0.0, 0.0, 1.5)};
        if (name == "mixed-regulation") {
            c.n_virtual        = 96;
            c.n_robots         = 4;
            c.extended.enabled = true;
        }
    }
    else if (name == "multimodal-regulation") {
        for (double mu : {-pi / 2.0, pi / 2.0}) {
            for (double nu : {-pi / 2.0, pi / 2.0}) {
                c.target.push_back(fixed_mode(mu, nu, 2.0));
            }
        }
    }
    else if (name == "monomodal-tracking") {
        ModeProgram m = fixed_mode(0.0, 0.0, 1.0);
        m.phases      = {HoldPhase{1.0}, LinearPhase{{quarter_turn, 0.0}, 2.0}, OrbitPhase{{0.0, 0.0}, quarter_turn, 0.0}};
        c.target      = {m};
    }
    else if (name == "multimodal-tracking") {
        for (double mu : {2.0 * pi / 3.0, -2.0 * pi / 3.0}) {
            ModeProgram m = fixed_mode(mu, 0.0, 2.2);
            m.phases      = {HoldPhase{1.0}, OrbitPhase{{0.0, 0.0}, quarter_turn, 0.0}};
            c.target.push_back(m);
        }
    }
    else {
        std::string known;
        for (const auto& n : preset_names()) {
            known += known.empty() ? n : ", " + n;
        }
        throw ConfigError("preset", "unknown preset '" + name + "' (known: " + known + ")");
    }
    return c;
}

} // namespace cswarm

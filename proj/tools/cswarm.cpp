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
#include "cswarm/station.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace cswarm;

namespace
{

ScenarioConfig with_overrides(ScenarioConfig config, const std::vector<std::string>& overrides)
{
    for (const auto& o : overrides) {
        config = apply_override(config, o);
    }
    return config;
}

void report(const ScenarioConfig& config, const ScenarioResult& r)
{
    const auto e_bar = r.trace.e_bar();
    std::printf("%s: frames=%zu final_E_bar=%.4f%% final_kl=%.5f wall=%.1fs output=%s\n", config.name.c_str(),
                r.trace.size(), e_bar.empty() ? 0.0 : e_bar.back(), r.trace.kl.empty() ? 0.0 : r.trace.kl.back(),
                r.wall_seconds, config.output.directory.c_str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density control of mixed swarms on the periodic square"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset_name;
    std::vector<std::string> overrides;
    bool dump_only = false;

    auto* run = app.add_subcommand("run", "Run a scenario from a JSON config file");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--override", overrides, "key=value, dotted keys");

    auto* pre = app.add_subcommand("preset", "Run a named preset");
    pre->add_option("name", preset_name, "Preset name")->required();
    pre->add_option("--override", overrides, "key=value, dotted keys");
    pre->add_flag("--dump", dump_only, "Print the resolved config and exit");

    auto* list = app.add_subcommand("presets", "List preset names");

    auto* oracle = app.add_subcommand("oracle", "Run the continuum oracle and write oracle.csv");
    oracle->add_option("config", config_path, "Config file")->required();
    oracle->add_option("--override", overrides, "key=value, dotted keys");

    auto* serve = app.add_subcommand("serve", "Run a scenario as the station of networked robots");
    serve->add_option("config", config_path, "Config file")->required();
    serve->add_option("--override", overrides, "key=value, dotted keys");

    int robot_id = 0;
    std::string host = "127.0.0.1";
    int port         = -1;
    auto* robot      = app.add_subcommand("robot", "Run one simulated robot client");
    robot->add_option("config", config_path, "Config file giving dt, endpoint and the start pose")->required();
    robot->add_option("--id", robot_id, "Robot id")->required();
    robot->add_option("--host", host, "Station host (defaults to network.host)");
    robot->add_option("--port", port, "Station port (defaults to network.port)");
    robot->add_option("--override", overrides, "key=value, dotted keys");

    auto* validate = app.add_subcommand("validate", "Check a config file");
    validate->add_option("config", config_path, "Config file")->required();
    validate->add_option("--override", overrides, "key=value, dotted keys");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (list->parsed()) {
            for (const auto& n : preset_names()) {
                std::cout << n << "\n";
            }
            return 0;
        }
        if (pre->parsed()) {
            const ScenarioConfig config = with_overrides(preset(preset_name), overrides);
            if (dump_only) {
                std::cout << dump_config(config);
                return 0;
            }
            report(config, run_scenario(config));
            return 0;
        }
        ScenarioConfig config = with_overrides(load_config(config_path), overrides);
        if (validate->parsed()) {
            config.validate();
            std::cout << "ok: " << config.name << "\n";
            return 0;
        }
        if (run->parsed()) {
            report(config, run_scenario(config));
            return 0;
        }
        if (serve->parsed()) {
            config.network.enabled = true;
            std::fprintf(stderr, "station on %s:%d waiting for %d robots\n", config.network.host.c_str(),
                         config.network.port, config.n_robots);
            report(config, run_scenario(config));
            return 0;
        }
        if (oracle->parsed()) {
            const MacroTrace trace = run_oracle(config);
            const double ratio     = trace.error_norm.front() > 0.0 ? trace.error_norm.back() / trace.error_norm.front() : 0.0;
            std::printf("%s: fitted_rate=%.6f final_ratio=%.6e output=%s/oracle.csv\n", config.name.c_str(),
                        trace.fitted_rate(), ratio, config.output.directory.c_str());
            return 0;
        }
        if (robot->parsed()) {
            config.validate();
            const SwarmState start = initial_state(config);
            if (robot_id < 0 || robot_id >= config.n_robots) {
                throw ConfigError("--id", "must lie in [0, agents.robots)");
            }
            ClientConfig cc;
            cc.host            = robot->count("--host") ? host : config.network.host;
            cc.port            = static_cast<std::uint16_t>(port >= 0 ? port : config.network.port);
            cc.id              = robot_id;
            cc.initial         = start.robots[static_cast<std::size_t>(robot_id)];
            cc.dt              = config.dt;
            cc.connect_timeout = config.network.connect_timeout;
            RobotClient client(cc);
            if (!client.run()) {
                throw std::runtime_error("could not reach the station");
            }
            const RobotState s = client.state();
            std::printf("robot %d: commands=%zu pose=(%.9f, %.9f, %.9f)\n", robot_id, client.log().size(), s.position[0],
                        s.position[1], s.heading);
            return 0;
        }
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

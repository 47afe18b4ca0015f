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
#include "cswarm/station.hpp"
#include "net_helpers.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace cswarm;
using namespace std::chrono_literals;
using cswarm::test::RawSocket;

namespace
{

struct ClientThread {
    std::unique_ptr<RobotClient> client;
    std::thread thread;

    ClientThread(std::uint16_t port, int id, const RobotState& start, double dt)
    {
        ClientConfig c;
        c.port    = port;
        c.id      = id;
        c.initial = start;
        c.dt      = dt;
        client    = std::make_unique<RobotClient>(c);
        thread    = std::thread([this] {
            client->run();
        });
    }
    ~ClientThread()
    {
        client->stop();
        if (thread.joinable()) {
            thread.join();
        }
    }
};

StationConfig station_for(int robots)
{
    StationConfig c;
    c.robots        = robots;
    c.frame_timeout = 2.0;
    return c;
}

} // namespace

TEST_SUITE("station")
{

TEST_CASE("loopback clients follow the commanded kinematics")
{
    Station station(station_for(2));
    const double dt = 0.01;
    std::vector<RobotState> start(2);
    start[1].position = {1.0, -0.5};
    start[1].heading  = 0.4;
    std::vector<std::unique_ptr<ClientThread>> clients;
    for (int i = 0; i < 2; ++i) {
        clients.push_back(std::make_unique<ClientThread>(station.port(), i, start[static_cast<std::size_t>(i)], dt));
    }
    REQUIRE(station.wait_for_robots(5s));
    auto expected = start;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int frame = 0; frame < 50; ++frame) {
        std::vector<WheelCommand> cmds{{u(rng), u(rng)}, {u(rng), u(rng)}};
        const auto poses = station.exchange(cmds);
        for (std::size_t i = 0; i < 2; ++i) {
            expected[i] = kinematics_step(expected[i], {wire_round(cmds[i].v), wire_round(cmds[i].omega)}, dt);
            CHECK(std::abs(poses[i].position[0] - expected[i].position[0]) <= 1e-6);
            CHECK(std::abs(poses[i].position[1] - expected[i].position[1]) <= 1e-6);
            CHECK(std::abs(poses[i].heading - expected[i].heading) <= 1e-6);
        }
    }
    for (const auto& s : station.status()) {
        CHECK(s.connected);
        CHECK_FALSE(s.stale);
        CHECK(s.last_seq == 50);
    }
    CHECK(station.parse_error_count() == 0);
    station.shutdown();
}

TEST_CASE("zero clients")
{
    Station station(station_for(0));
    CHECK(station.wait_for_robots(10ms));
    CHECK(station.exchange({}).empty());
    CHECK_THROWS_AS(station.exchange({WheelCommand{}}), std::invalid_argument);
}

TEST_CASE("dropped commands are held by the client")
{
    StationConfig cfg     = station_for(1);
    cfg.drop_probability  = 0.1;
    cfg.seed              = 42;
    Station station(cfg);
    ClientThread client(station.port(), 0, RobotState{}, 0.01);
    REQUIRE(station.wait_for_robots(5s));
    for (int frame = 1; frame <= 200; ++frame) {
        station.exchange({WheelCommand{0.01 * frame, -0.02 * frame}});
    }
    const auto dropped = station.dropped()[0];
    CHECK(dropped.size() >= 5);
    REQUIRE(test::wait_until([&] {
        const auto log = client.client->log();
        return !log.empty() && log.back().seq >= 199;
    }));
    const auto log = client.client->log();
    std::map<std::uint64_t, CommandLogEntry> by_seq;
    for (const auto& e : log) {
        by_seq[e.seq] = e;
    }
    for (std::uint64_t seq : dropped) {
        if (!by_seq.count(seq)) {
            continue; // trailing drop or a drop before the first command
        }
        const auto& e = by_seq[seq];
        CHECK(e.held);
        REQUIRE(by_seq.count(seq - 1));
        CHECK(e.command == by_seq[seq - 1].command);
    }
    std::size_t held = 0;
    for (const auto& e : log) {
        held += e.held ? 1 : 0;
        CHECK_FALSE(e.discarded);
    }
    CHECK(held >= dropped.size() - 2);
}

TEST_CASE("client discards out-of-order commands")
{
    test::Listener listener;
    ClientThread client(listener.port(), 3, RobotState{}, 0.01);
    RawSocket station(listener.accept_one());
    REQUIRE(station.ok());
    CHECK(station.receive() == std::optional<std::string>("HELLO CSWARM/1 3"));
    station.send(encode(HelloMessage{protocol_version, 3}));
    REQUIRE(station.receive().has_value());
    station.send(encode(CmdMessage{3, 1.0, 0.0, 5}));
    REQUIRE(station.receive().has_value());
    station.send(encode(CmdMessage{3, 2.0, 0.0, 4}));
    station.send(encode(CmdMessage{3, 3.0, 0.0, 5}));
    station.send(encode(CmdMessage{3, 0.5, 0.0, 8}));
    REQUIRE(station.receive().has_value());
    const auto log = client.client->log();
    REQUIRE(log.size() == 6);
    CHECK(log[0].seq == 5);
    CHECK(log[1].discarded);
    CHECK(log[2].discarded);
    CHECK(log[3].held);
    CHECK(log[3].seq == 6);
    CHECK(log[3].command.v == 1.0);
    CHECK(log[4].held);
    CHECK(log[5].seq == 8);
    CHECK_FALSE(log[5].held);
    // Applied sequence numbers increase strictly.
    std::uint64_t last = 0;
    for (const auto& e : log) {
        if (!e.discarded) {
            CHECK(e.seq > last);
            last = e.seq;
        }
    }
    CHECK(client.client->state().position[0] == doctest::Approx(0.01 * (1.0 + 1.0 + 1.0 + 0.5)));
    station.send(encode(ByeMessage{3}));
}

TEST_CASE("disconnect freezes the pose and a new HELLO resumes")
{
    StationConfig cfg  = station_for(1);
    cfg.frame_timeout  = 0.2;
    Station station(cfg);
    {
        RawSocket robot = RawSocket::connect_to(station.port());
        REQUIRE(robot.ok());
        robot.send("HELLO CSWARM/1 0");
        REQUIRE(robot.receive() == std::optional<std::string>("HELLO CSWARM/1 0"));
        robot.send(encode(PoseMessage{0, 0.5, -0.5, 1.0, 0.0}));
        REQUIRE(station.wait_for_robots(2s));
    }
    REQUIRE(test::wait_until([&] { return !station.status()[0].connected; }));
    const auto frozen = station.exchange({WheelCommand{1.0, 0.0}});
    CHECK(frozen[0].position == Point{0.5, -0.5});
    CHECK(station.status()[0].stale);

    RawSocket again = RawSocket::connect_to(station.port());
    again.send("HELLO CSWARM/1 0");
    REQUIRE(again.receive() == std::optional<std::string>("HELLO CSWARM/1 0"));
    again.send(encode(PoseMessage{0, 0.7, -0.5, 1.0, 0.0}));
    REQUIRE(test::wait_until([&] { return station.status()[0].poses >= 2; }));
    std::thread answer([&] {
        const auto cmd = again.receive();
        if (cmd) {
            again.send(encode(PoseMessage{0, 0.8, -0.5, 1.0, 0.01}));
        }
    });
    const auto live = station.exchange({WheelCommand{1.0, 0.0}});
    answer.join();
    CHECK(live[0].position[0] == doctest::Approx(0.8));
    CHECK_FALSE(station.status()[0].stale);
    CHECK(station.status()[0].connected);
}

TEST_CASE("silent client goes stale after the frame timeout")
{
    StationConfig cfg = station_for(1);
    cfg.frame_timeout = 0.1;
    Station station(cfg);
    RawSocket robot = RawSocket::connect_to(station.port());
    robot.send("HELLO CSWARM/1 0");
    REQUIRE(robot.receive().has_value());
    robot.send(encode(PoseMessage{0, 0.1, 0.2, 0.3, 0.0}));
    REQUIRE(station.wait_for_robots(2s));
    const auto t0    = std::chrono::steady_clock::now();
    const auto poses = station.exchange({WheelCommand{1.0, 1.0}});
    CHECK(std::chrono::steady_clock::now() - t0 >= 90ms);
    CHECK(station.status()[0].stale);
    CHECK(station.status()[0].connected);
    CHECK(poses[0].position == Point{0.1, 0.2});
}

TEST_CASE("session errors are structured")
{
    Station station(station_for(1));
    RawSocket a = RawSocket::connect_to(station.port());
    a.send("HELLO CSWARM/2 0");
    CHECK(a.receive() == std::optional<std::string>("BYE 0"));
    RawSocket b = RawSocket::connect_to(station.port());
    b.send("HELLO CSWARM/1 7");
    CHECK(b.receive() == std::optional<std::string>("BYE 7"));
    RawSocket c = RawSocket::connect_to(station.port());
    c.send("POSE 0 0 0 0 0");
    c.send("CMD 0 0 0 1");
    REQUIRE(test::wait_until([&] { return station.parse_error_count() >= 4; }));
    const auto errors = station.parse_errors();
    CHECK(errors[0].token_index == 2);
    CHECK(errors[1].token_index == 3);
}

TEST_CASE("fuzz: 1000 malformed lines yield structured errors and the station keeps working")
{
    Station station(station_for(1));
    RawSocket fuzz = RawSocket::connect_to(station.port());
    REQUIRE(fuzz.ok());
    std::mt19937_64 rng(77);
    const std::string alphabet = "HELOBYPSCMD0123456789.-+e /\txX\x01\xff";
    std::uniform_int_distribution<std::size_t> len(0, 60), pick(0, alphabet.size() - 1);
    int sent = 0;
    while (sent < 1000) {
        std::string line;
        const std::size_t n = len(rng);
        for (std::size_t k = 0; k < n; ++k) {
            line.push_back(alphabet[pick(rng)]);
        }
        if (sent % 100 == 99) {
            line = std::string(2 * max_line_length, 'Z');
        }
        else if (std::holds_alternative<Message>(try_decode(line))) {
            continue;
        }
        REQUIRE(fuzz.send(line));
        ++sent;
    }
    REQUIRE(test::wait_until([&] { return station.parse_error_count() >= 1000; }, 10000));
    CHECK(station.parse_error_count() == 1000);
    for (const auto& e : station.parse_errors()) {
        CHECK(e.token_index >= 1);
        CHECK_FALSE(e.reason.empty());
    }
    ClientThread client(station.port(), 0, RobotState{}, 0.01);
    REQUIRE(station.wait_for_robots(5s));
    const auto poses = station.exchange({WheelCommand{1.0, 0.0}});
    CHECK(poses[0].position[0] == doctest::Approx(0.01));
}

}

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
#ifndef CSWARM_STATION_HPP
#define CSWARM_STATION_HPP

#include "cswarm/diffdrive.hpp"
#include "cswarm/protocol.hpp"
#include "cswarm/swarm.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace cswarm
{

struct StationConfig {
    std::string host = "127.0.0.1";
    /// 0 binds an ephemeral port, see Station::port().
    std::uint16_t port = 0;
    int robots         = 0;
    /// Seconds to wait for the pose answering a command before the robot is marked stale.
    double frame_timeout = 2.0;
    /// Frame pacing against the station clock; 0 runs as fast as the clients answer.
    double fps = 0.0;
    /// Fault injection: probability that a frame's command to a robot is silently not sent.
    double drop_probability = 0.0;
    std::uint64_t seed      = 0;

    void validate() const;
};

struct RobotLinkStatus {
    bool connected = false;
    bool stale     = false;
    std::uint64_t last_seq = 0;
    std::size_t poses      = 0;
};

/**
 * Central station of the robot link.
 * One acceptor thread, one session thread per client, and the caller's frame loop.
 * Each robot slot is the mailbox between its session and the frame loop.
 */
class Station
{
public:
    explicit Station(StationConfig config);
    ~Station();
    Station(const Station&)            = delete;
    Station& operator=(const Station&) = delete;

    std::uint16_t port() const
    {
        return m_port;
    }
    const StationConfig& config() const
    {
        return m_config;
    }

    /// Blocks until every robot id has completed HELLO and reported a first pose.
    bool wait_for_robots(std::chrono::milliseconds timeout);

    /// Latest pose of every robot as RobotState (command and reference left default).
    std::vector<RobotState> poses() const;

    /**
     * Sends commands[i] to robot i under the next sequence number and waits for the answering poses.
     * A robot that does not answer within frame_timeout, or is disconnected, is marked stale and keeps
     * its last pose. Returns the latest poses.
     */
    std::vector<RobotState> exchange(const std::vector<WheelCommand>& commands);

    std::vector<RobotLinkStatus> status() const;
    std::vector<ParseError> parse_errors() const;
    std::size_t parse_error_count() const;
    /// Sequence numbers whose command was dropped by fault injection, per robot.
    std::vector<std::vector<std::uint64_t>> dropped() const;

    /// Says BYE to every client and joins all threads. Idempotent.
    void shutdown();

    struct Slot;

private:
    void accept_loop();
    void session(int fd);
    void record_error(ParseError error);

    StationConfig m_config;
    int m_listen_fd     = -1;
    std::uint16_t m_port = 0;
    std::atomic<bool> m_stop{false};
    std::vector<std::unique_ptr<Slot>> m_slots;
    std::uint64_t m_seq = 0;
    std::mt19937_64 m_rng;
    std::chrono::steady_clock::time_point m_next_frame;

    mutable std::mutex m_mutex;
    std::vector<ParseError> m_errors;
    std::size_t m_error_count = 0;
    std::vector<std::thread> m_sessions;
    std::thread m_acceptor;
};

struct ClientConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    int id             = 0;
    RobotState initial;
    double dt = 0.01;
    /// Seconds to keep retrying the initial connection.
    double connect_timeout = 10.0;
};

struct CommandLogEntry {
    std::uint64_t seq = 0;
    WheelCommand command;
    /// Applied again for a sequence number that never arrived.
    bool held = false;
    /// Arrived out of order and was ignored.
    bool discarded = false;
};

/// Simulated robot endpoint: integrates the unicycle kinematics for every command and reports its pose.
class RobotClient
{
public:
    explicit RobotClient(ClientConfig config);
    ~RobotClient();
    RobotClient(const RobotClient&)            = delete;
    RobotClient& operator=(const RobotClient&) = delete;

    /// Connects and serves until the station says BYE, the connection drops, or stop() is called.
    /// Returns false if no connection could be made.
    bool run();
    /// Closes the connection from another thread.
    void stop();

    RobotState state() const;
    std::vector<CommandLogEntry> log() const;

private:
    void apply(const WheelCommand& u, std::uint64_t seq, bool held);

    ClientConfig m_config;
    mutable std::mutex m_mutex;
    RobotState m_state;
    std::vector<CommandLogEntry> m_log;
    std::uint64_t m_steps = 0;
    std::atomic<int> m_fd{-1};
    std::atomic<bool> m_stop{false};
};

/// Robot backend that relays tracking commands to networked clients through a Station.
/// Clients always work in arena units; coordinate_scale maps them to the loop coordinates
/// (positions times the scale, turn rates divided by it).
class NetworkRobots : public RobotBackend
{
public:
    NetworkRobots(Station& station, const LoopParams& params, double coordinate_scale = 1.0);
    std::vector<RobotState> actuate(const std::vector<RobotState>& robots, const std::vector<RobotReference>& refs,
                                    double dt) override;

private:
    Station& m_station;
    RobotLimits m_limits;
    double m_gain;
    double m_scale;
};

} // namespace cswarm

#endif // CSWARM_STATION_HPP

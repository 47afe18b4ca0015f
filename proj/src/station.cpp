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

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <stdexcept>

namespace cswarm
{

namespace
{

constexpr int poll_interval_ms = 100;

void set_nodelay(int fd)
{
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

bool send_line(int fd, const std::string& line)
{
    const std::string data = line + "\n";
    std::size_t sent       = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

struct AddrInfo {
    addrinfo* list = nullptr;
    ~AddrInfo()
    {
        if (list) {
            ::freeaddrinfo(list);
        }
    }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, bool passive)
{
    addrinfo hints{};
    hints.ai_family   = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags    = passive ? AI_PASSIVE : 0;
    AddrInfo out;
    const std::string service = std::to_string(port);
    const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.list);
    if (rc != 0) {
        throw std::runtime_error("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    return out;
}

int listen_on(const std::string& host, std::uint16_t port, std::uint16_t& bound)
{
    AddrInfo info = resolve(host, port, true);
    for (addrinfo* a = info.list; a; a = a->ai_next) {
        const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
        if (fd < 0) {
            continue;
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
            sockaddr_storage addr{};
            socklen_t len = sizeof addr;
            ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
            bound = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                               : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
            return fd;
        }
        ::close(fd);
    }
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
}

int connect_to(const std::string& host, std::uint16_t port, double timeout, const std::atomic<bool>& stop)
{
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
    while (!stop) {
        AddrInfo info = resolve(host, port, false);
        for (addrinfo* a = info.list; a; a = a->ai_next) {
            const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
            if (fd < 0) {
                continue;
            }
            if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
                set_nodelay(fd);
                return fd;
            }
            ::close(fd);
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return -1;
}

enum class ReadStatus
{
    line,
    timeout,
    closed,
    overlong,
};

class LineReader
{
public:
    explicit LineReader(int fd)
        : m_fd(fd)
    {
    }

    ReadStatus next(std::string& line, int timeout_ms)
    {
        for (;;) {
            const auto pos = m_buf.find('\n');
            if (pos != std::string::npos) {
                const bool dropped = m_discarding || pos > max_line_length;
                if (!dropped) {
                    line.assign(m_buf, 0, pos);
                }
                m_buf.erase(0, pos + 1);
                m_discarding = false;
                return dropped ? ReadStatus::overlong : ReadStatus::line;
            }
            if (m_buf.size() > max_line_length) {
                m_buf.clear();
                m_discarding = true;
            }
            pollfd p{m_fd, POLLIN, 0};
            const int rc = ::poll(&p, 1, timeout_ms);
            if (rc == 0) {
                return ReadStatus::timeout;
            }
            if (rc < 0) {
                if (errno == EINTR) {
                    continue;
                }
                return ReadStatus::closed;
            }
            char chunk[4096];
            const ssize_t n = ::recv(m_fd, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) {
                continue;
            }
            if (n <= 0) {
                return ReadStatus::closed;
            }
            m_buf.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int m_fd;
    std::string m_buf;
    bool m_discarding = false;
};

ParseError overlong_error()
{
    return ParseError{1, {}, "line longer than " + std::to_string(max_line_length) + " bytes"};
}

} // namespace

void StationConfig::validate() const
{
    if (robots < 0) {
        throw std::invalid_argument("station: robots must be >= 0");
    }
    if (!(frame_timeout > 0.0)) {
        throw std::invalid_argument("station: frame_timeout must be > 0");
    }
    if (fps < 0.0) {
        throw std::invalid_argument("station: fps must be >= 0");
    }
    if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
        throw std::invalid_argument("station: drop_probability must lie in [0, 1)");
    }
}

struct Station::Slot {
    std::mutex mutex;
    std::condition_variable cv;
    int fd         = -1;
    bool connected = false;
    bool stale     = false;
    bool has_pose  = false;
    PoseMessage pose;
    std::size_t pose_count = 0;
    std::uint64_t last_seq = 0;
    std::vector<std::uint64_t> dropped;
};

Station::Station(StationConfig config)
    : m_config(std::move(config))
    , m_rng(m_config.seed)
{
    m_config.validate();
    for (int i = 0; i < m_config.robots; ++i) {
        m_slots.push_back(std::make_unique<Slot>());
        m_slots.back()->pose.id = i;
    }
    m_listen_fd = listen_on(m_config.host, m_config.port, m_port);
    m_acceptor  = std::thread([this] {
        accept_loop();
    });
}

Station::~Station()
{
    shutdown();
}

void Station::accept_loop()
{
    while (!m_stop) {
        pollfd p{m_listen_fd, POLLIN, 0};
        const int rc = ::poll(&p, 1, poll_interval_ms);
        if (rc <= 0) {
            continue;
        }
        const int fd = ::accept(m_listen_fd, nullptr, nullptr);
        if (fd < 0) {
            continue;
        }
        set_nodelay(fd);
        std::lock_guard lock(m_mutex);
        m_sessions.emplace_back([this, fd] {
            session(fd);
        });
    }
}

void Station::record_error(ParseError error)
{
    std::lock_guard lock(m_mutex);
    ++m_error_count;
    if (m_errors.size() < 10000) {
        m_errors.push_back(std::move(error));
    }
}

void Station::session(int fd)
{
    LineReader reader(fd);
    int id = -1;
    std::string line;
    while (!m_stop) {
        const ReadStatus status = reader.next(line, poll_interval_ms);
        if (status == ReadStatus::timeout) {
            continue;
        }
        if (status == ReadStatus::closed) {
            break;
        }
        if (status == ReadStatus::overlong) {
            record_error(overlong_error());
            continue;
        }
        auto decoded = try_decode(line);
        if (auto* e = std::get_if<ParseError>(&decoded)) {
            record_error(*e);
            continue;
        }
        const Message& msg = std::get<Message>(decoded);
        if (const auto* hello = std::get_if<HelloMessage>(&msg)) {
            if (id >= 0) {
                record_error({1, "HELLO", "duplicate HELLO in one session"});
                continue;
            }
            if (hello->version != protocol_version) {
                record_error({2, hello->version, std::string("unsupported version, expected ") + protocol_version});
                send_line(fd, encode(ByeMessage{hello->id}));
                break;
            }
            if (hello->id >= m_config.robots) {
                record_error({3, std::to_string(hello->id), "robot id out of range"});
                send_line(fd, encode(ByeMessage{hello->id}));
                break;
            }
            Slot& slot = *m_slots[static_cast<std::size_t>(hello->id)];
            std::lock_guard lock(slot.mutex);
            if (slot.connected) {
                record_error({3, std::to_string(hello->id), "robot id already connected"});
                send_line(fd, encode(ByeMessage{hello->id}));
                break;
            }
            slot.fd        = fd;
            slot.connected = true;
            slot.stale     = false;
            id             = hello->id;
            send_line(fd, encode(HelloMessage{protocol_version, id}));
        }
        else if (const auto* pose = std::get_if<PoseMessage>(&msg)) {
            if (id < 0 || pose->id != id) {
                record_error({2, std::to_string(pose->id), "POSE for an id not bound to this session"});
                continue;
            }
            Slot& slot = *m_slots[static_cast<std::size_t>(id)];
            {
                std::lock_guard lock(slot.mutex);
                slot.pose     = *pose;
                slot.has_pose = true;
                ++slot.pose_count;
            }
            slot.cv.notify_all();
        }
        else if (std::holds_alternative<ByeMessage>(msg)) {
            break;
        }
        else {
            record_error({1, "CMD", "CMD is only sent by the station"});
        }
    }
    if (id >= 0) {
        Slot& slot = *m_slots[static_cast<std::size_t>(id)];
        {
            std::lock_guard lock(slot.mutex);
            if (slot.fd == fd) {
                slot.fd = -1;
            }
            slot.connected = false;
            slot.stale     = true;
        }
        slot.cv.notify_all();
    }
    ::close(fd);
}

bool Station::wait_for_robots(std::chrono::milliseconds timeout)
{
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (auto& s : m_slots) {
        std::unique_lock lock(s->mutex);
        if (!s->cv.wait_until(lock, deadline, [&] {
                return s->connected && s->has_pose;
            })) {
            return false;
        }
    }
    return true;
}

std::vector<RobotState> Station::poses() const
{
    std::vector<RobotState> out;
    out.reserve(m_slots.size());
    for (const auto& s : m_slots) {
        std::lock_guard lock(s->mutex);
        RobotState r;
        r.position = {s->pose.x, s->pose.y};
        r.heading  = s->pose.theta;
        out.push_back(r);
    }
    return out;
}

std::vector<RobotState> Station::exchange(const std::vector<WheelCommand>& commands)
{
    if (commands.size() != m_slots.size()) {
        throw std::invalid_argument("Station::exchange: expected one command per robot");
    }
    if (m_config.fps > 0.0) {
        const auto now = std::chrono::steady_clock::now();
        if (m_next_frame.time_since_epoch().count() == 0) {
            m_next_frame = now;
        }
        std::this_thread::sleep_until(m_next_frame);
        m_next_frame += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / m_config.fps));
    }
    ++m_seq;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::size_t> before(m_slots.size(), 0);
    std::vector<bool> sent(m_slots.size(), false);
    for (std::size_t i = 0; i < m_slots.size(); ++i) {
        Slot& s         = *m_slots[i];
        const bool drop = coin(m_rng) < m_config.drop_probability;
        std::lock_guard lock(s.mutex);
        before[i] = s.pose_count;
        if (!s.connected) {
            s.stale = true;
            continue;
        }
        if (drop) {
            s.dropped.push_back(m_seq);
            continue;
        }
        CmdMessage cmd{static_cast<int>(i), commands[i].v, commands[i].omega, m_seq};
        sent[i] = send_line(s.fd, encode(cmd));
        if (sent[i]) {
            s.last_seq = m_seq;
        }
        else {
            s.stale = true;
        }
    }
    const auto deadline =
        std::chrono::steady_clock::now() +
        std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(m_config.frame_timeout));
    for (std::size_t i = 0; i < m_slots.size(); ++i) {
        if (!sent[i]) {
            continue;
        }
        Slot& s = *m_slots[i];
        std::unique_lock lock(s.mutex);
        const bool answered = s.cv.wait_until(lock, deadline, [&] {
            return s.pose_count > before[i] || !s.connected;
        });
        s.stale = !(answered && s.pose_count > before[i]);
    }
    return poses();
}

std::vector<RobotLinkStatus> Station::status() const
{
    std::vector<RobotLinkStatus> out;
    for (const auto& s : m_slots) {
        std::lock_guard lock(s->mutex);
        out.push_back({s->connected, s->stale, s->last_seq, s->pose_count});
    }
    return out;
}

std::vector<ParseError> Station::parse_errors() const
{
    std::lock_guard lock(m_mutex);
    return m_errors;
}

std::size_t Station::parse_error_count() const
{
    std::lock_guard lock(m_mutex);
    return m_error_count;
}

std::vector<std::vector<std::uint64_t>> Station::dropped() const
{
    std::vector<std::vector<std::uint64_t>> out;
    for (const auto& s : m_slots) {
        std::lock_guard lock(s->mutex);
        out.push_back(s->dropped);
    }
    return out;
}

void Station::shutdown()
{
    if (m_stop.exchange(true)) {
        return;
    }
    for (std::size_t i = 0; i < m_slots.size(); ++i) {
        Slot& s = *m_slots[i];
        std::lock_guard lock(s.mutex);
        if (s.fd >= 0) {
            send_line(s.fd, encode(ByeMessage{static_cast<int>(i)}));
            ::shutdown(s.fd, SHUT_RDWR);
        }
    }
    if (m_acceptor.joinable()) {
        m_acceptor.join();
    }
    std::vector<std::thread> sessions;
    {
        std::lock_guard lock(m_mutex);
        sessions.swap(m_sessions);
    }
    for (auto& t : sessions) {
        t.join();
    }
    if (m_listen_fd >= 0) {
        ::close(m_listen_fd);
        m_listen_fd = -1;
    }
}

RobotClient::RobotClient(ClientConfig config)
    : m_config(std::move(config))
    , m_state(m_config.initial)
{
    if (!(m_config.dt > 0.0)) {
        throw std::invalid_argument("robot client: dt must be > 0");
    }
    if (m_config.id < 0) {
        throw std::invalid_argument("robot client: id must be >= 0");
    }
}

RobotClient::~RobotClient()
{
    stop();
}

void RobotClient::stop()
{
    m_stop = true;
    const int fd = m_fd.load();
    if (fd >= 0) {
        ::shutdown(fd, SHUT_RDWR);
    }
}

RobotState RobotClient::state() const
{
    std::lock_guard lock(m_mutex);
    return m_state;
}

std::vector<CommandLogEntry> RobotClient::log() const
{
    std::lock_guard lock(m_mutex);
    return m_log;
}

void RobotClient::apply(const WheelCommand& u, std::uint64_t seq, bool held)
{
    std::lock_guard lock(m_mutex);
    m_state = kinematics_step(m_state, u, m_config.dt);
    ++m_steps;
    m_log.push_back({seq, u, held, false});
}

bool RobotClient::run()
{
    const int fd = connect_to(m_config.host, m_config.port, m_config.connect_timeout, m_stop);
    if (fd < 0) {
        return false;
    }
    m_fd = fd;
    if (m_stop) {
        ::shutdown(fd, SHUT_RDWR);
    }
    auto send_pose = [&] {
        std::lock_guard lock(m_mutex);
        PoseMessage p{m_config.id, m_state.position[0], m_state.position[1], m_state.heading,
                      static_cast<double>(m_steps) * m_config.dt};
        return send_line(fd, encode(p));
    };

    LineReader reader(fd);
    bool greeted = false;
    bool has_last = false;
    std::uint64_t last_seq = 0;
    WheelCommand last_cmd;
    std::string line;
    bool alive = send_line(fd, encode(HelloMessage{protocol_version, m_config.id}));
    while (alive && !m_stop) {
        const ReadStatus status = reader.next(line, poll_interval_ms);
        if (status == ReadStatus::timeout || status == ReadStatus::overlong) {
            continue;
        }
        if (status == ReadStatus::closed) {
            break;
        }
        auto decoded = try_decode(line);
        if (std::holds_alternative<ParseError>(decoded)) {
            continue;
        }
        const Message& msg = std::get<Message>(decoded);
        if (const auto* hello = std::get_if<HelloMessage>(&msg)) {
            if (!greeted && hello->id == m_config.id) {
                greeted = true;
                alive   = send_pose();
            }
        }
        else if (const auto* cmd = std::get_if<CmdMessage>(&msg)) {
            if (!greeted || cmd->id != m_config.id) {
                continue;
            }
            if (has_last && cmd->seq <= last_seq) {
                std::lock_guard lock(m_mutex);
                m_log.push_back({cmd->seq, {cmd->v, cmd->omega}, false, true});
                continue;
            }
            if (has_last) {
                for (std::uint64_t s = last_seq + 1; s < cmd->seq; ++s) {
                    apply(last_cmd, s, true);
                }
            }
            last_cmd = {cmd->v, cmd->omega};
            last_seq = cmd->seq;
            has_last = true;
            apply(last_cmd, cmd->seq, false);
            alive = send_pose();
        }
        else if (std::holds_alternative<ByeMessage>(msg)) {
            send_line(fd, encode(ByeMessage{m_config.id}));
            break;
        }
    }
    m_fd = -1;
    ::close(fd);
    return true;
}

NetworkRobots::NetworkRobots(Station& station, const LoopParams& params, double coordinate_scale)
    : m_station(station)
    , m_limits(params.limits)
    , m_gain(params.tracking_gain)
    , m_scale(coordinate_scale)
{
    if (!(m_scale > 0.0)) {
        throw std::invalid_argument("NetworkRobots: coordinate_scale must be > 0");
    }
}

std::vector<RobotState> NetworkRobots::actuate(const std::vector<RobotState>& robots,
                                               const std::vector<RobotReference>& refs, double)
{
    std::vector<WheelCommand> commands;
    commands.reserve(robots.size());
    for (std::size_t i = 0; i < robots.size(); ++i) {
        const WheelCommand u = tracking_command(robots[i], refs[i].x_des, refs[i].v_des, m_gain, m_limits);
        commands.push_back({u.v, u.omega * m_scale});
    }
    const auto poses = m_station.exchange(commands);
    std::vector<RobotState> out;
    out.reserve(robots.size());
    for (std::size_t i = 0; i < robots.size(); ++i) {
        RobotState r = robots[i];
        r.position   = wrap_point({m_scale * poses[i].position[0], m_scale * poses[i].position[1]});
        r.heading    = poses[i].heading;
        r.command    = {wire_round(commands[i].v), wire_round(commands[i].omega) / m_scale};
        r.reference  = wrap_point(refs[i].x_des);
        out.push_back(r);
    }
    return out;
}

} // namespace cswarm

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
#include "cswarm/protocol.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace cswarm
{

std::string ParseError::describe() const
{
    std::ostringstream out;
    out << "parse error at token " << token_index;
    if (!token.empty()) {
        out << " '" << token << "'";
    }
    out << ": " << reason;
    return out.str();
}

ProtocolError::ProtocolError(ParseError error)
    : std::runtime_error(error.describe())
    , m_error(std::move(error))
{
}

namespace
{

std::string real(double value)
{
    if (!std::isfinite(value) || std::abs(value) >= 1e12) {
        throw std::invalid_argument("encode: real field must be finite and below 1e12 in magnitude");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", value);
    return buf;
}

std::vector<std::string_view> tokenize(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

// Printable rendering of a token for diagnostics.
std::string printable(std::string_view token)
{
    std::string out;
    for (char c : token.substr(0, 32)) {
        const auto u = static_cast<unsigned char>(c);
        if (u >= 0x20 && u < 0x7f) {
            out.push_back(c);
        }
        else {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", u);
            out += buf;
        }
    }
    if (token.size() > 32) {
        out += "...";
    }
    return out;
}

class Decoder
{
public:
    explicit Decoder(std::vector<std::string_view> tokens)
        : m_tokens(std::move(tokens))
    {
    }

    std::optional<ParseError> error;

    ParseError fail(std::size_t index, std::string reason)
    {
        ParseError e{index + 1, index < m_tokens.size() ? printable(m_tokens[index]) : std::string{},
                     std::move(reason)};
        if (!error) {
            error = e;
        }
        return e;
    }

    /// Checks that token index exists; reports the missing field otherwise.
    bool has(std::size_t index, const char* what)
    {
        if (error) {
            return false;
        }
        if (index >= m_tokens.size()) {
            fail(index, std::string("missing ") + what);
            return false;
        }
        return true;
    }

    void no_trailing(std::size_t n)
    {
        if (!error && m_tokens.size() > n) {
            fail(n, "unexpected trailing token");
        }
    }

    int id(std::size_t index)
    {
        const auto t = m_tokens[index];
        int v        = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size() || v < 0) {
            fail(index, "expected a non-negative integer id");
            return 0;
        }
        return v;
    }

    std::uint64_t sequence(std::size_t index)
    {
        const auto t    = m_tokens[index];
        std::uint64_t v = 0;
        auto [p, ec]    = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size()) {
            fail(index, "expected a non-negative integer sequence number");
            return 0;
        }
        return v;
    }

    double number(std::size_t index)
    {
        const auto t = m_tokens[index];
        double v     = 0.0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::fixed);
        if (ec != std::errc{} || p != t.data() + t.size() || !std::isfinite(v)) {
            fail(index, "expected a finite decimal number");
            return 0.0;
        }
        return v;
    }

    std::string version(std::size_t index)
    {
        const auto t = m_tokens[index];
        const std::string_view prefix("CSWARM/");
        bool ok = t.size() > prefix.size() && t.substr(0, prefix.size()) == prefix;
        for (std::size_t i = prefix.size(); ok && i < t.size(); ++i) {
            ok = t[i] >= '0' && t[i] <= '9';
        }
        if (!ok) {
            fail(index, "expected a protocol version CSWARM/<n>");
        }
        return std::string(t);
    }

    const std::vector<std::string_view>& tokens() const
    {
        return m_tokens;
    }

private:
    std::vector<std::string_view> m_tokens;
};

} // namespace

std::string encode(const Message& message)
{
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if (m.id < 0) {
                throw std::invalid_argument("encode: id must be non-negative");
            }
            if constexpr (std::is_same_v<T, HelloMessage>) {
                return "HELLO " + m.version + " " + std::to_string(m.id);
            }
            else if constexpr (std::is_same_v<T, ByeMessage>) {
                return "BYE " + std::to_string(m.id);
            }
            else if constexpr (std::is_same_v<T, PoseMessage>) {
                return "POSE " + std::to_string(m.id) + " " + real(m.x) + " " + real(m.y) + " " + real(m.theta) + " " +
                       real(m.timestamp);
            }
            else {
                return "CMD " + std::to_string(m.id) + " " + real(m.v) + " " + real(m.omega) + " " +
                       std::to_string(m.seq);
            }
        },
        message);
}

std::variant<Message, ParseError> try_decode(std::string_view line)
{
    if (!line.empty() && line.back() == '\n') {
        line.remove_suffix(1);
    }
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    if (line.size() > max_line_length) {
        return ParseError{1, {}, "line longer than " + std::to_string(max_line_length) + " bytes"};
    }
    Decoder d(tokenize(line));
    if (d.tokens().empty()) {
        return ParseError{1, {}, "empty line"};
    }
    const std::string_view verb = d.tokens()[0];
    Message out;
    if (verb == "HELLO") {
        HelloMessage m;
        if (d.has(1, "protocol version")) {
            m.version = d.version(1);
        }
        if (d.has(2, "id")) {
            m.id = d.id(2);
        }
        d.no_trailing(3);
        out = m;
    }
    else if (verb == "BYE") {
        ByeMessage m;
        if (d.has(1, "id")) {
            m.id = d.id(1);
        }
        d.no_trailing(2);
        out = m;
    }
    else if (verb == "POSE") {
        PoseMessage m;
        if (d.has(1, "id")) {
            m.id = d.id(1);
        }
        if (d.has(2, "x")) {
            m.x = d.number(2);
        }
        if (d.has(3, "y")) {
            m.y = d.number(3);
        }
        if (d.has(4, "theta")) {
            m.theta = d.number(4);
        }
        if (d.has(5, "timestamp")) {
            m.timestamp = d.number(5);
        }
        d.no_trailing(6);
        out = m;
    }
    else if (verb == "CMD") {
        CmdMessage m;
        if (d.has(1, "id")) {
            m.id = d.id(1);
        }
        if (d.has(2, "V")) {
            m.v = d.number(2);
        }
        if (d.has(3, "omega")) {
            m.omega = d.number(3);
        }
        if (d.has(4, "sequence number")) {
            m.seq = d.sequence(4);
        }
        d.no_trailing(5);
        out = m;
    }
    else {
        d.fail(0, "unknown verb");
    }
    if (d.error) {
        return *d.error;
    }
    return out;
}

Message decode(std::string_view line)
{
    auto r = try_decode(line);
    if (auto* e = std::get_if<ParseError>(&r)) {
        throw ProtocolError(*e);
    }
    return std::get<Message>(std::move(r));
}

double wire_round(double value)
{
    const std::string s = real(value);
    double v            = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

} // namespace cswarm

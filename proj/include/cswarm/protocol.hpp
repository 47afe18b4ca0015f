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
#ifndef CSWARM_PROTOCOL_HPP
#define CSWARM_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace cswarm
{

inline constexpr const char* protocol_version = "CSWARM/1";
/// Lines longer than this are rejected before tokenizing.
inline constexpr std::size_t max_line_length = 1024;

struct HelloMessage {
    std::string version = protocol_version;
    int id              = 0;
    bool operator==(const HelloMessage&) const = default;
};

struct ByeMessage {
    int id = 0;
    bool operator==(const ByeMessage&) const = default;
};

struct PoseMessage {
    int id           = 0;
    double x         = 0.0;
    double y         = 0.0;
    double theta     = 0.0;
    double timestamp = 0.0;
    bool operator==(const PoseMessage&) const = default;
};

struct CmdMessage {
    int id          = 0;
    double v        = 0.0;
    double omega    = 0.0;
    std::uint64_t seq = 0;
    bool operator==(const CmdMessage&) const = default;
};

using Message = std::variant<HelloMessage, ByeMessage, PoseMessage, CmdMessage>;

/// Where and why a line failed to decode. token_index is 1-based, the verb being token 1.
struct ParseError {
    std::size_t token_index = 0;
    std::string token;
    std::string reason;

    std::string describe() const;
};

class ProtocolError : public std::runtime_error
{
public:
    explicit ProtocolError(ParseError error);
    const ParseError& error() const
    {
        return m_error;
    }

private:
    ParseError m_error;
};

/// One line without the trailing newline. Reals use fixed notation with 9 decimals.
std::string encode(const Message& message);

/// Decodes one line (a trailing "\n" or "\r\n" is tolerated).
std::variant<Message, ParseError> try_decode(std::string_view line);

/// Same as try_decode but throws ProtocolError.
Message decode(std::string_view line);

/// Rounds a real to what survives a trip through the wire format.
double wire_round(double value);

} // namespace cswarm

#endif // CSWARM_PROTOCOL_HPP

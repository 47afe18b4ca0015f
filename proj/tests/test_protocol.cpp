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

#include <doctest.h>

#include <random>

using namespace cswarm;

namespace
{

Message random_message(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> kind(0, 3), id(0, 999);
    std::uniform_real_distribution<double> real(-1e4, 1e4);
    std::uniform_int_distribution<std::uint64_t> seq;
    // Values already on the 9-decimal lattice survive the round trip exactly.
    auto r = [&] {
        return wire_round(real(rng));
    };
    switch (kind(rng)) {
    case 0:
        return HelloMessage{protocol_version, id(rng)};
    case 1:
        return ByeMessage{id(rng)};
    case 2:
        return PoseMessage{id(rng), r(), r(), r(), std::abs(r())};
    default:
        return CmdMessage{id(rng), r(), r(), seq(rng)};
    }
}

ParseError error_of(std::string_view line)
{
    auto d = try_decode(line);
    REQUIRE(std::holds_alternative<ParseError>(d));
    return std::get<ParseError>(d);
}

} // namespace

TEST_SUITE("protocol")
{

TEST_CASE("grammar instances")
{
    const Message m = decode("CMD 3 0.500000000 -1.250000000 17");
    REQUIRE(std::holds_alternative<CmdMessage>(m));
    CHECK(std::get<CmdMessage>(m) == CmdMessage{3, 0.5, -1.25, 17});
    CHECK(encode(CmdMessage{3, 0.5, -1.25, 17}) == "CMD 3 0.500000000 -1.250000000 17");
    CHECK(encode(HelloMessage{}) == "HELLO CSWARM/1 0");
    CHECK(encode(ByeMessage{2}) == "BYE 2");
    CHECK(encode(PoseMessage{1, 0.1, -0.2, 3.0, 0.25}) == "POSE 1 0.100000000 -0.200000000 3.000000000 0.250000000");
    CHECK(std::holds_alternative<PoseMessage>(decode("POSE 1 0.1 -0.2 3 0.25\r\n")));
}

TEST_CASE("round trip")
{
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
        const Message m = random_message(rng);
        CHECK(decode(encode(m)) == m);
    }
}

TEST_CASE("structured parse errors")
{
    const ParseError a = error_of("CMD x");
    CHECK(a.token_index == 2);
    CHECK(a.token == "x");
    CHECK(error_of("CMD 1 0.5").token_index == 4);
    CHECK(error_of("").token_index == 1);
    CHECK(error_of("JUMP 1").token_index == 1);
    CHECK(error_of("HELLO CSWARM/x 1").token_index == 2);
    CHECK(error_of("POSE 1 0 0 nan 0").token_index == 5);
    CHECK(error_of("POSE 1 0 0 0 0 extra").token_index == 7);
    CHECK(error_of("CMD 1 0 0 -3").token_index == 5);
    CHECK(error_of("BYE 1.5").token_index == 2);
    CHECK(error_of("POSE 1 1e3 0 0 0").token_index == 3);
    CHECK(error_of(std::string(max_line_length + 1, 'A')).reason.find("long") != std::string::npos);
    CHECK_FALSE(error_of("CMD x").describe().empty());
    try {
        decode("CMD x");
        FAIL("decode should throw");
    }
    catch (const ProtocolError& e) {
        CHECK(e.error().token_index == 2);
    }
}

TEST_CASE("fuzz: random malformed lines never throw from try_decode")
{
    std::mt19937_64 rng(1234);
    const std::string alphabet = "HELOBYPSCMD0123456789.-+e /\t\rxX\x01\xff";
    std::uniform_int_distribution<std::size_t> len(0, 80), pick(0, alphabet.size() - 1);
    std::size_t errors = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string line;
        const std::size_t n = len(rng);
        for (std::size_t k = 0; k < n; ++k) {
            line.push_back(alphabet[pick(rng)]);
        }
        auto d = try_decode(line);
        if (auto* e = std::get_if<ParseError>(&d)) {
            ++errors;
            CHECK(e->token_index >= 1);
            CHECK_FALSE(e->reason.empty());
        }
    }
    CHECK(errors > 900);
}

TEST_CASE("wire rounding")
{
    CHECK(wire_round(0.1234567891234) == doctest::Approx(0.123456789).epsilon(1e-15));
    CHECK(wire_round(-2.5) == -2.5);
}

}

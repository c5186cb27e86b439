// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "proxyprobe/types.hpp"

using namespace proxyprobe;

TEST_CASE("address parse and canonical form") {
    const std::string mixed = "0xAb5801a7D398351b8bE11C439e05C5b3259aec9B";
    auto addr = Address::parse(mixed);
    REQUIRE(addr.has_value());
    CHECK(addr->str() == "0xab5801a7d398351b8be11c439e05c5b3259aec9b");
    // canonical form round-trips
    CHECK(Address::parse(addr->str()) == addr);

    CHECK_FALSE(Address::parse("0x1234").has_value());
    CHECK_FALSE(Address::parse("ab5801a7d398351b8be11c439e05c5b3259aec9g").has_value());
    CHECK_FALSE(Address::parse("").has_value());
}

TEST_CASE("hex data round trip, empty legal") {
    auto empty = HexData::parse("0x");
    REQUIRE(empty.has_value());
    CHECK(empty->empty());
    CHECK(empty->str() == "0x");

    auto also_empty = HexData::parse("");
    REQUIRE(also_empty.has_value());
    CHECK(also_empty->empty());

    CHECK_FALSE(HexData::parse("0x1").has_value());   // odd length
    CHECK_FALSE(HexData::parse("0xzz").has_value());

    oracle::Rng rng(7);
    for (int round = 0; round < 200; ++round) {
        std::vector<uint8_t> bytes(rng.below(64));
        for (auto& b : bytes) b = static_cast<uint8_t>(rng.below(256));
        HexData data{bytes};
        auto back = HexData::parse(data.str());
        REQUIRE(back.has_value());
        CHECK(back->bytes == bytes);
    }
}

TEST_CASE("selector_of") {
    // keccak256("transfer(address,uint256)") prefix, 68-byte calldata
    std::vector<uint8_t> calldata = {0xa9, 0x05, 0x9c, 0xbb};
    calldata.resize(68, 0);
    const auto sel = selector_of(HexData{calldata});
    REQUIRE(sel.has_value());
    CHECK(sel->str() == "0xa9059cbb");

    CHECK_FALSE(selector_of(HexData{}).has_value());
    CHECK_FALSE(selector_of(HexData{{0xde, 0xad, 0xbe}}).has_value());

    const auto exact = selector_of(HexData{{0xde, 0xad, 0xbe, 0xef}});
    REQUIRE(exact.has_value());
    CHECK(exact->str() == "0xdeadbeef");

    // prefix property
    oracle::Rng rng(11);
    for (int round = 0; round < 100; ++round) {
        std::vector<uint8_t> bytes(rng.below(16));
        for (auto& b : bytes) b = static_cast<uint8_t>(rng.below(256));
        const auto s = selector_of(HexData{bytes});
        if (bytes.size() >= 4) {
            REQUIRE(s.has_value());
            CHECK(std::equal(s->bytes.begin(), s->bytes.end(), bytes.begin()));
        } else {
            CHECK_FALSE(s.has_value());
        }
    }
}

TEST_CASE("selector_from_signature against the independent keccak") {
    const std::pair<const char*, const char*> cases[] = {
        {"transfer(address,uint256)", "0xa9059cbb"},
        {"implementation()", "0x5c60da1b"},
        {"proxyType()", "0x4555d5c9"},
        {"masterCopy()", "0xa619486e"},
    };
    for (const auto& [sig, expected] : cases) {
        CHECK(selector_from_signature(sig).str() == expected);
        const auto digest = oracle::keccak256(std::string(sig));
        CHECK(hex::encode(digest.data(), 4) == expected);
    }
}

TEST_CASE("call type enumeration is closed") {
    CHECK(parse_call_type("delegatecall") == CallType::DelegateCall);
    CHECK(parse_call_type("suicide") == CallType::SelfDestruct);
    CHECK_FALSE(parse_call_type("delegatecall2").has_value());
    CHECK_FALSE(parse_call_type("DELEGATECALL").has_value());
    CHECK_FALSE(parse_call_type("").has_value());
    for (const auto t : {CallType::Call, CallType::CallCode, CallType::StaticCall,
                         CallType::DelegateCall, CallType::Create, CallType::Create2,
                         CallType::SelfDestruct})
        CHECK(parse_call_type(call_type_str(t)) == t);
}

TEST_CASE("trace address text form") {
    CHECK(parse_trace_address("") == TraceAddress{});
    CHECK(parse_trace_address("0.1") == TraceAddress{0, 1});
    CHECK(parse_trace_address("2.0.3") == TraceAddress{2, 0, 3});
    CHECK_FALSE(parse_trace_address(".1").has_value());
    CHECK_FALSE(parse_trace_address("1.").has_value());
    CHECK_FALSE(parse_trace_address("a").has_value());
    CHECK(trace_address_str({0, 1}) == "0.1");
    CHECK(trace_address_str({}) == "");
}

TEST_CASE("parent_of prefix rule") {
    const std::set<TraceAddress> siblings1 = {{}, {0}, {0, 1}};
    auto contains1 = [&](const TraceAddress& a) { return siblings1.count(a) != 0; };
    CHECK(parent_of({0, 1}, contains1) == TraceAddress{0});
    CHECK_FALSE(parent_of({}, contains1).has_value());

    const std::set<TraceAddress> siblings2 = {{}, {2}, {2, 0}, {2, 0, 3}};
    auto contains2 = [&](const TraceAddress& a) { return siblings2.count(a) != 0; };
    CHECK(parent_of({2, 0, 3}, contains2) == TraceAddress{2, 0});

    // gap: nearest present prefix wins
    const std::set<TraceAddress> gappy = {{}, {0, 1, 2}};
    auto contains3 = [&](const TraceAddress& a) { return gappy.count(a) != 0; };
    CHECK(parent_of({0, 1, 2}, contains3) == TraceAddress{});
}

TEST_CASE("parent chain terminates at the root, no cycles") {
    oracle::Rng rng(23);
    for (int round = 0; round < 50; ++round) {
        std::set<TraceAddress> addresses = {{}};
        std::vector<TraceAddress> pool = {{}};
        for (int i = 0; i < 30; ++i) {
            TraceAddress child = pool[rng.below(pool.size())];
            child.push_back(static_cast<uint32_t>(rng.below(3)));
            if (addresses.insert(child).second) pool.push_back(child);
        }
        auto contains = [&](const TraceAddress& a) { return addresses.count(a) != 0; };
        for (const auto& addr : pool) {
            TraceAddress current = addr;
            size_t steps = 0;
            while (!current.empty()) {
                auto parent = parent_of(current, contains);
                REQUIRE(parent.has_value());
                REQUIRE(parent->size() < current.size());
                current = *parent;
                REQUIRE(++steps <= addr.size());
            }
        }
    }
}

TEST_CASE("timestamps parse as UTC and round-trip") {
    const auto t = parse_iso8601("2022-01-02T03:04:05Z");
    REQUIRE(t.has_value());
    CHECK(format_iso8601(*t) == "2022-01-02T03:04:05Z");
    CHECK(parse_iso8601("2022-01-02 03:04:05 UTC") == t);
    CHECK(parse_iso8601("2022-01-02 03:04:05") == t);
    CHECK(parse_iso8601("2022-01-02 03:04:05+00") == t);
    CHECK(parse_iso8601("2022-01-02T03:04:05.123456Z") == t);
    CHECK_FALSE(parse_iso8601("2022-13-02T03:04:05Z").has_value());
    CHECK_FALSE(parse_iso8601("garbage").has_value());
    CHECK(parse_iso8601("1970-01-01T00:00:00Z") == UtcSeconds{0});
    CHECK(parse_iso8601("2015-08-07T00:00:00Z") == UtcSeconds{1438905600});
}

TEST_CASE("month derivation and ordering") {
    const auto t = parse_iso8601("2021-12-31T23:59:59Z");
    REQUIRE(t.has_value());
    CHECK(Month::of(*t) == Month{2021, 12});
    CHECK(Month::of(*t + 1) == Month{2022, 1});
    CHECK(Month{2021, 12}.next() == Month{2022, 1});
    CHECK(Month{2021, 5}.next() == Month{2021, 6});
    CHECK(Month{2021, 5} < Month{2021, 6});
    CHECK(Month{2021, 12} < Month{2022, 1});
    CHECK(Month{2021, 5}.str() == "2021-05");
}

TEST_CASE("big integers hold wei-scale values") {
    BigInt wei("123456789012345678901234567890");
    CHECK(wei.str() == "123456789012345678901234567890");
    CHECK(wei > BigInt(UINT64_MAX));
}

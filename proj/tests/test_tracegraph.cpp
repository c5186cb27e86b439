// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "proxyprobe/tracegraph.hpp"

using namespace proxyprobe;

namespace {

Address addr(int i) {
    Address a;
    a.bytes[18] = static_cast<uint8_t>(i >> 8);
    a.bytes[19] = static_cast<uint8_t>(i & 0xff);
    return a;
}

TraceRecord trace(TraceAddress ta, const Address& from, const Address& to, CallType type,
                  std::vector<uint8_t> input = {}, bool status = true) {
    TraceRecord t;
    t.trace_address = std::move(ta);
    t.from = from;
    t.to = to;
    t.call_type = type;
    t.input = HexData{std::move(input)};
    t.status = status;
    t.block_number = 100;
    t.block_timestamp = *parse_iso8601("2021-03-05T00:00:00Z");
    return t;
}

// The four-trace example: EOA calls C1; C1 creates C2; C1 calls C2; C2
// delegates to C3.
TxGroup example_tx(const Address& eoa, const Address& c1, const Address& c2, const Address& c3,
                   std::vector<uint8_t> outer_selector = {0xaa, 0xbb, 0xcc, 0xdd},
                   std::vector<uint8_t> inner_selector = {0xaa, 0xbb, 0xcc, 0xdd}) {
    TxGroup g;
    g.traces.push_back(trace({}, eoa, c1, CallType::Call, {0x11, 0x22, 0x33, 0x44}));
    g.traces.push_back(trace({0}, c1, c2, CallType::Create, {0x60, 0x01, 0x60, 0x02}));
    g.traces.push_back(trace({1}, c1, c2, CallType::Call, outer_selector));
    g.traces.push_back(trace({1, 0}, c2, c3, CallType::DelegateCall, inner_selector));
    for (auto& t : g.traces) t.transaction_hash.bytes[31] = 0x77;
    g.transaction_hash = g.traces.front().transaction_hash;
    return g;
}

ContractLookup lookup_for(std::initializer_list<Address> contracts) {
    ContractLookup lookup;
    for (const auto& a : contracts) {
        ContractRecord rec;
        rec.address = a;
        lookup.add(rec);
    }
    return lookup;
}

}  // namespace

TEST_CASE("call graph of the example transaction") {
    const auto g = example_tx(addr(1), addr(2), addr(3), addr(4));
    const auto graph = tracegraph::build_call_graph(g);
    REQUIRE(graph.edges.size() == 3);  // edge count = trace count - 1
    CHECK(graph.root == 0);
    // T -> T1, T -> T2, T2 -> T3
    CHECK(graph.edges[0].parent == 0);
    CHECK(graph.edges[0].child == 1);
    CHECK(graph.edges[1].parent == 0);
    CHECK(graph.edges[1].child == 2);
    CHECK(graph.edges[2].parent == 2);
    CHECK(graph.edges[2].child == 3);
    CHECK(graph.edges[2].type == CallType::DelegateCall);
}

TEST_CASE("single root trace yields one node, no edges") {
    TxGroup g;
    g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
    const auto graph = tracegraph::build_call_graph(g);
    CHECK(graph.edges.empty());
    CHECK(graph.nodes.size() == 2);  // caller and callee addresses
}

TEST_CASE("chain of three nested calls is a path") {
    TxGroup g;
    g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
    g.traces.push_back(trace({0}, addr(2), addr(3), CallType::Call));
    g.traces.push_back(trace({0, 0}, addr(3), addr(4), CallType::Call));
    const auto graph = tracegraph::build_call_graph(g);
    REQUIRE(graph.edges.size() == 2);
    CHECK(graph.edges[0].parent == 0);
    CHECK(graph.edges[1].parent == 1);
}

TEST_CASE("multi-contract detection") {
    const auto contracts = lookup_for({addr(2), addr(3), addr(4)});

    SECTION("example transaction with internal cross-contract calls") {
        CHECK(tracegraph::is_multi_contract(example_tx(addr(1), addr(2), addr(3), addr(4)),
                                            contracts));
    }
    SECTION("EOA to contract call with no sub-traces is not multi-contract") {
        TxGroup g;
        g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
        CHECK_FALSE(tracegraph::is_multi_contract(g, contracts));
    }
    SECTION("a contract calling itself does not count") {
        TxGroup g;
        g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
        g.traces.push_back(trace({0}, addr(2), addr(2), CallType::Call));
        CHECK_FALSE(tracegraph::is_multi_contract(g, contracts));
    }
    SECTION("a call to an address outside the contracts corpus does not count") {
        TxGroup g;
        g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
        g.traces.push_back(trace({0}, addr(2), addr(99), CallType::Call));
        CHECK_FALSE(tracegraph::is_multi_contract(g, contracts));
    }
    SECTION("failed internal calls still count") {
        TxGroup g;
        g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
        g.traces.push_back(trace({0}, addr(2), addr(3), CallType::Call, {}, false));
        CHECK(tracegraph::is_multi_contract(g, contracts));
    }
    SECTION("creates alone do not make a transaction multi-contract") {
        TxGroup g;
        g.traces.push_back(trace({}, addr(1), addr(2), CallType::Call));
        g.traces.push_back(trace({0}, addr(2), addr(3), CallType::Create));
        CHECK_FALSE(tracegraph::is_multi_contract(g, contracts));
    }
}

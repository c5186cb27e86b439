// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-transaction call graphs and the multi-contract transaction metrics:
// monthly ratios overall and per call type.

#include <cstdint>
#include <optional>
#include <vector>

#include "proxyprobe/corpus.hpp"
#include "proxyprobe/series.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::tracegraph {

// Tree over the traces of one transaction; edge count = trace count - 1.
struct CallGraph {
    struct Edge {
        int parent;  // trace index
        int child;   // trace index
        CallType type;
    };
    std::vector<Address> nodes;  // distinct addresses, in first-seen order
    std::vector<Edge> edges;     // ordered by child trace_address
    int root = 0;                // root trace index
};

inline CallGraph build_call_graph(const TxGroup& tx) {
    CallGraph g;
    const auto parents = tx.parent_indexes();
    std::vector<Address> seen;
    auto note_node = [&](const Address& a) {
        for (const auto& s : seen)
            if (s == a) return;
        seen.push_back(a);
    };
    for (size_t i = 0; i < tx.traces.size(); ++i) {
        note_node(tx.traces[i].from);
        note_node(tx.traces[i].to);
        if (parents[i] >= 0)
            g.edges.push_back({parents[i], static_cast<int>(i), tx.traces[i].call_type});
        else
            g.root = static_cast<int>(i);
    }
    g.nodes = std::move(seen);
    return g;
}

// True iff the transaction contains at least one cross-contract message call
// between two different deployed contracts. The root EOA->contract call
// itself does not count.
inline bool is_multi_contract(const TxGroup& tx, const ContractLookup& contracts) {
    for (const auto& t : tx.traces) {
        if (t.is_root()) continue;
        if (!is_message_call(t.call_type)) continue;
        if (t.from == t.to) continue;
        if (contracts.is_contract(t.from) && contracts.is_contract(t.to)) return true;
    }
    return false;
}

inline bool has_call_type(const TxGroup& tx, CallType type) {
    for (const auto& t : tx.traces)
        if (t.call_type == type) return true;
    return false;
}

// Denominator: transactions in the month. Numerator: multi-contract
// transactions, optionally restricted to those containing the given type.
inline MonthlySeries monthly_multi_contract_ratio(const Corpus& corpus,
                                                  const ContractLookup& contracts,
                                                  std::optional<CallType> filter = std::nullopt) {
    MonthlySeries series;
    corpus.for_each_group([&](const TxGroup& tx) {
        auto& entry = series.at(Month::of(tx.timestamp()));
        ++entry.denominator;
        if (!is_multi_contract(tx, contracts)) return;
        if (filter && !has_call_type(tx, *filter)) return;
        ++entry.numerator;
    });
    series.fill_gaps();
    return series;
}

}  // namespace proxyprobe::tracegraph

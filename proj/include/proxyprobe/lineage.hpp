// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deployment-chain reconstruction: walk creators upward from each proxy to
// the root EOA and label nodes with the EOA/FA/PF/P grammar. An address is
// an EOA iff it is absent from the contracts corpus.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "proxyprobe/corpus.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/series.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::lineage {

enum class NodeLabel : uint8_t { Eoa, Factory, ProxyFactory, Proxy };

inline std::string_view label_str(NodeLabel l) {
    switch (l) {
        case NodeLabel::Eoa: return "EOA";
        case NodeLabel::Factory: return "FA";
        case NodeLabel::ProxyFactory: return "PF";
        case NodeLabel::Proxy: return "P";
    }
    return "?";
}

inline std::optional<NodeLabel> parse_label(std::string_view s) {
    if (s == "EOA") return NodeLabel::Eoa;
    if (s == "FA") return NodeLabel::Factory;
    if (s == "PF") return NodeLabel::ProxyFactory;
    if (s == "P") return NodeLabel::Proxy;
    return std::nullopt;
}

enum class DeployStyle : uint8_t { OnChain, OffChain };

inline std::string_view style_str(DeployStyle s) {
    return s == DeployStyle::OnChain ? "onchain" : "offchain";
}

struct ChainNode {
    Address address;
    NodeLabel label;
};

struct CreationChain {
    Address proxy;
    std::vector<ChainNode> nodes;  // root EOA first, proxy last
    std::vector<TxHash> creation_txs;  // aligned with creation steps, root first
    bool complete = false;
    std::string incomplete_reason;  // set when !complete

    std::string signature() const {
        std::string out;
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (i) out += " > ";
            out += label_str(nodes[i].label);
        }
        return out;
    }

    DeployStyle style() const {
        return signature() == "EOA > P" ? DeployStyle::OffChain : DeployStyle::OnChain;
    }
};

// Earliest successful creation trace per created address.
struct CreationRecord {
    Address created;
    Address deployer;
    TxHash transaction_hash;
    TraceAddress trace_address;
    uint64_t block_number = 0;
    UtcSeconds block_timestamp = 0;
    BigInt gas_used;
    std::optional<BigInt> root_gas_price;  // from the root trace of the tx
};

class CreationIndex {
  public:
    // Scans the corpus once. Only successful creations deploy code.
    static CreationIndex build(const Corpus& corpus) {
        CreationIndex index;
        corpus.for_each_group([&](const TxGroup& tx) {
            const std::optional<BigInt> root_gas_price = tx.root().gas_price;
            for (const auto& t : tx.traces) {
                if (!is_creation(t.call_type) || !t.status) continue;
                index.insert(CreationRecord{t.to, t.from, t.transaction_hash, t.trace_address,
                                            t.block_number, t.block_timestamp, t.gas_used,
                                            root_gas_price});
            }
        });
        return index;
    }

    // Multiple successful creations of one address (redeploy after
    // selfdestruct) keep the earliest; later ones are noted.
    void insert(CreationRecord rec) {
        auto [it, inserted] = map_.try_emplace(rec.created, rec);
        if (inserted) return;
        auto& existing = it->second;
        redeployed_.insert(rec.created);
        const bool earlier =
            rec.block_number < existing.block_number ||
            (rec.block_number == existing.block_number &&
             (rec.transaction_hash < existing.transaction_hash ||
              (rec.transaction_hash == existing.transaction_hash &&
               std::lexicographical_compare(rec.trace_address.begin(), rec.trace_address.end(),
                                            existing.trace_address.begin(),
                                            existing.trace_address.end()))));
        if (earlier) existing = std::move(rec);
    }

    const CreationRecord* find(const Address& created) const {
        auto it = map_.find(created);
        return it == map_.end() ? nullptr : &it->second;
    }

    const std::set<Address>& redeployed() const { return redeployed_; }
    size_t size() const { return map_.size(); }

  private:
    std::unordered_map<Address, CreationRecord, AddressHash> map_;
    std::set<Address> redeployed_;  // addresses with more than one successful creation
};

inline constexpr size_t kMaxChainDepth = 32;  // Table-scale max is 7 nodes

// Walks deployers upward from the proxy until an EOA. Intermediaries are FA,
// upgraded to PF when they are themselves detected proxies.
inline CreationChain build_chain(const Address& proxy, const std::set<Address>& proxies,
                                 const CreationIndex& creations, const ContractLookup& contracts) {
    CreationChain chain;
    chain.proxy = proxy;
    std::vector<ChainNode> reversed;  // proxy first while walking
    std::vector<TxHash> txs_reversed;
    std::set<Address> visited;

    reversed.push_back({proxy, NodeLabel::Proxy});
    visited.insert(proxy);
    Address current = proxy;
    while (true) {
        if (reversed.size() > kMaxChainDepth) {
            chain.incomplete_reason = "depth cap exceeded";
            break;
        }
        const CreationRecord* creation = creations.find(current);
        if (!creation) {
            chain.incomplete_reason = "creation not in corpus";
            break;
        }
        txs_reversed.push_back(creation->transaction_hash);
        const Address deployer = creation->deployer;
        if (!contracts.is_contract(deployer)) {
            reversed.push_back({deployer, NodeLabel::Eoa});
            chain.complete = true;
            break;
        }
        if (visited.count(deployer)) {
            chain.incomplete_reason = "creator cycle";
            break;
        }
        visited.insert(deployer);
        reversed.push_back({deployer, proxies.count(deployer) ? NodeLabel::ProxyFactory
                                                              : NodeLabel::Factory});
        current = deployer;
    }

    chain.nodes.assign(reversed.rbegin(), reversed.rend());
    chain.creation_txs.assign(txs_reversed.rbegin(), txs_reversed.rend());
    return chain;
}

inline std::vector<CreationChain> build_chains(const std::set<Address>& proxies,
                                               const CreationIndex& creations,
                                               const ContractLookup& contracts) {
    std::vector<CreationChain> out;
    out.reserve(proxies.size());
    for (const auto& proxy : proxies)
        out.push_back(build_chain(proxy, proxies, creations, contracts));
    return out;
}

// ---------------------------------------------------------------------------
// Pattern catalog

struct CreationalPattern {
    std::string signature;  // e.g. "EOA > FA > PF > P"
    DeployStyle style = DeployStyle::OnChain;
    uint64_t context_count = 0;
    uint64_t proxy_count = 0;
};

// Groups complete chains by signature. context_signatures maps each usage
// context to its representative's chain signature (empty map when contexts
// are not available yet).
inline std::vector<CreationalPattern> pattern_catalog(
    const std::vector<CreationChain>& chains,
    const std::map<std::string, uint64_t>& context_counts = {}) {
    std::map<std::string, CreationalPattern> by_signature;
    for (const auto& chain : chains) {
        if (!chain.complete) continue;
        auto& p = by_signature[chain.signature()];
        if (p.signature.empty()) {
            p.signature = chain.signature();
            p.style = chain.style();
        }
        ++p.proxy_count;
    }
    for (auto& [sig, p] : by_signature) {
        auto it = context_counts.find(sig);
        if (it != context_counts.end()) p.context_count = it->second;
    }
    std::vector<CreationalPattern> out;
    for (auto& [sig, p] : by_signature) out.push_back(std::move(p));
    std::sort(out.begin(), out.end(), [](const CreationalPattern& a, const CreationalPattern& b) {
        if (a.proxy_count != b.proxy_count) return a.proxy_count > b.proxy_count;
        return a.signature < b.signature;
    });
    return out;
}

inline std::string patterns_csv(const std::vector<CreationalPattern>& patterns) {
    uint64_t total = 0;
    for (const auto& p : patterns) total += p.proxy_count;
    std::string out = "signature,style,context_count,proxy_count,proxy_pct\n";
    for (const auto& p : patterns) {
        out += '"';
        out += p.signature;
        out += "\",";
        out += style_str(p.style);
        out += ',';
        out += std::to_string(p.context_count);
        out += ',';
        out += std::to_string(p.proxy_count);
        out += ',';
        out += total == 0 ? "0"
                          : format_double(100.0 * static_cast<double>(p.proxy_count) /
                                          static_cast<double>(total));
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_chains(const std::vector<CreationChain>& chains, const std::string& path) {
    FileWriter out(path);
    std::string buf;
    for (const auto& c : chains) {
        buf.assign("{\"proxy\":\"");
        buf += c.proxy.str();
        buf += "\",\"complete\":";
        buf += c.complete ? "true" : "false";
        buf += ",\"signature\":\"";
        buf += c.signature();
        buf += "\",\"nodes\":[";
        for (size_t i = 0; i < c.nodes.size(); ++i) {
            if (i) buf += ',';
            buf += "{\"address\":\"";
            buf += c.nodes[i].address.str();
            buf += "\",\"label\":\"";
            buf += label_str(c.nodes[i].label);
            buf += "\"}";
        }
        buf += "],\"creation_txs\":[";
        for (size_t i = 0; i < c.creation_txs.size(); ++i) {
            if (i) buf += ',';
            buf += '"';
            buf += c.creation_txs[i].str();
            buf += '"';
        }
        buf += ']';
        if (!c.complete) {
            buf += ",\"incomplete_reason\":";
            jsonl::append_json_string(buf, c.incomplete_reason);
        }
        buf += "}\n";
        out.write(buf);
    }
    out.close();
}

inline std::vector<CreationChain> read_chains(const std::string& path) {
    std::vector<CreationChain> chains;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        CreationChain c;
        auto proxy = Address::parse(j.at("proxy").get<std::string>());
        if (!proxy) throw DataError("bad proxy address in chains");
        c.proxy = *proxy;
        c.complete = j.at("complete").get<bool>();
        for (const auto& n : j.at("nodes")) {
            auto addr = Address::parse(n.at("address").get<std::string>());
            auto label = parse_label(n.at("label").get<std::string>());
            if (!addr || !label) throw DataError("bad chain node");
            c.nodes.push_back({*addr, *label});
        }
        for (const auto& t : j.at("creation_txs")) {
            auto tx = TxHash::parse(t.get<std::string>());
            if (!tx) throw DataError("bad creation tx");
            c.creation_txs.push_back(*tx);
        }
        if (j.contains("incomplete_reason"))
            c.incomplete_reason = j.at("incomplete_reason").get<std::string>();
        chains.push_back(std::move(c));
    }
    return chains;
}

}  // namespace proxyprobe::lineage

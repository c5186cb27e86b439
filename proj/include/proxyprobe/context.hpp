// SPDX-License-Identifier: Apache-2.0
#pragma once

// Usage-context clustering: proxies with the same runtime bytecode and the
// same immediate deployer, joined through shared logic contracts, form one
// usage context. Also the prevalence series built on the detected proxy set:
// monthly context counts, stakeholder adoption, proxy utilization and
// per-contract activity levels.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "proxyprobe/corpus.hpp"
#include "proxyprobe/detector.hpp"
#include "proxyprobe/keccak.hpp"
#include "proxyprobe/lineage.hpp"
#include "proxyprobe/series.hpp"
#include "proxyprobe/tracegraph.hpp"

namespace proxyprobe::context {

// Plain union-find over dense indexes.
class UnionFind {
  public:
    explicit UnionFind(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    size_t find(size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

  private:
    std::vector<size_t> parent_;
};

struct UsageContext {
    std::string id;  // digest of the member set, stable across runs
    Digest32 bytecode_digest{};
    std::optional<Address> deployer;  // immediate creator; absent when unknown
    std::vector<Address> members;     // sorted
    std::vector<Address> logics;      // sorted union of members' logic targets
    Address representative;           // oldest member, ties by lowest address
    UtcSeconds started_at = 0;
    std::optional<lineage::DeployStyle> style;  // absent when creation unknown
    size_t size() const { return members.size(); }
};

namespace detail {

struct ClusterKey {
    Digest32 digest{};
    bool has_deployer = false;
    Address deployer;

    friend bool operator<(const ClusterKey& a, const ClusterKey& b) {
        if (a.digest != b.digest) return a.digest < b.digest;
        if (a.has_deployer != b.has_deployer) return a.has_deployer < b.has_deployer;
        return a.deployer < b.deployer;
    }
};

}  // namespace detail

// Clusters the detected proxies. Proxies with a missing contract record get
// the digest of empty bytes; proxies whose creation is outside the corpus
// cluster under an absent deployer.
inline std::vector<UsageContext> cluster_contexts(const detector::Findings& findings,
                                                  const ContractLookup& contracts,
                                                  const lineage::CreationIndex& creations) {
    using detail::ClusterKey;
    std::map<ClusterKey, std::vector<const detector::ProxyFinding*>> clusters;
    for (const auto& [addr, finding] : findings) {
        ClusterKey key;
        const ContractRecord* rec = contracts.find(addr);
        key.digest = rec ? keccak256(rec->bytecode.bytes) : keccak256(std::string_view{});
        if (const auto* creation = creations.find(addr)) {
            key.has_deployer = true;
            key.deployer = creation->deployer;
        }
        clusters[key].push_back(&finding);
    }

    std::vector<UsageContext> out;
    for (const auto& [key, members] : clusters) {
        // Bipartite proxy-logic graph within the cluster; connected
        // components are the usage contexts.
        std::map<Address, size_t> node_index;
        auto index_of = [&](const Address& a) {
            auto [it, inserted] = node_index.try_emplace(a, node_index.size());
            return it->second;
        };
        for (const auto* f : members) {
            index_of(f->proxy);
            for (const auto& logic : f->logic_targets) index_of(logic);
        }
        UnionFind uf(node_index.size());
        for (const auto* f : members) {
            const size_t p = node_index.at(f->proxy);
            for (const auto& logic : f->logic_targets) uf.unite(p, node_index.at(logic));
        }
        std::map<size_t, std::vector<const detector::ProxyFinding*>> components;
        for (const auto* f : members) components[uf.find(node_index.at(f->proxy))].push_back(f);

        for (const auto& [root, component] : components) {
            UsageContext ctx;
            ctx.bytecode_digest = key.digest;
            if (key.has_deployer) ctx.deployer = key.deployer;
            std::set<Address> logic_union;
            for (const auto* f : component) {
                ctx.members.push_back(f->proxy);
                logic_union.insert(f->logic_targets.begin(), f->logic_targets.end());
            }
            std::sort(ctx.members.begin(), ctx.members.end());
            ctx.logics.assign(logic_union.begin(), logic_union.end());

            // Oldest member; members are sorted, so strict-less keeps the
            // lowest address on created_at ties. Records may be missing.
            const ContractRecord* best = nullptr;
            for (const auto& member : ctx.members) {
                const ContractRecord* rec = contracts.find(member);
                if (!rec) continue;
                if (!best || rec->created_at < best->created_at) best = rec;
            }
            ctx.representative = best ? best->address : ctx.members.front();
            ctx.started_at = best ? best->created_at : 0;

            // Style from the representative's immediate deployer: an EOA
            // deployer is exactly the "EOA > P" shape.
            if (const auto* creation = creations.find(ctx.representative)) {
                ctx.style = contracts.is_contract(creation->deployer)
                               ? lineage::DeployStyle::OnChain
                               : lineage::DeployStyle::OffChain;
            }

            Keccak256 hasher;
            for (const auto& member : ctx.members)
                hasher.update(member.bytes.data(), member.bytes.size());
            ctx.id = digest_hex(hasher.finish(), false);
            out.push_back(std::move(ctx));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const UsageContext& a, const UsageContext& b) { return a.members < b.members; });
    return out;
}

// Monthly count of context starts (denominator 0: these are plain counts).
inline MonthlySeries monthly_context_counts(const std::vector<UsageContext>& contexts) {
    MonthlySeries series;
    for (const auto& ctx : contexts) ++series.at(Month::of(ctx.started_at)).numerator;
    series.fill_gaps();
    return series;
}

// ---------------------------------------------------------------------------
// Stakeholder adoption: cumulative distinct EOAs initiating proxy creations
// vs EOAs initiating any contract creation, as of each month.

struct AdoptionSeries {
    struct Entry {
        uint64_t proxy_initiating_eoas = 0;  // cumulative
        uint64_t any_contract_eoas = 0;      // cumulative
    };
    std::map<Month, Entry> entries;

    std::string to_csv() const {
        std::string out = "month,proxy_initiating_eoas,any_contract_eoas,ratio\n";
        for (const auto& [month, e] : entries) {
            out += month.str();
            out += ',';
            out += std::to_string(e.proxy_initiating_eoas);
            out += ',';
            out += std::to_string(e.any_contract_eoas);
            out += ',';
            if (e.any_contract_eoas > 0)
                out += format_double(static_cast<double>(e.proxy_initiating_eoas) /
                                     static_cast<double>(e.any_contract_eoas));
            out += '\n';
        }
        return out;
    }
};

inline AdoptionSeries adoption_series(const Corpus& corpus, const std::set<Address>& proxies) {
    // First-seen month per EOA for each role.
    std::map<Address, Month> first_any;
    std::map<Address, Month> first_proxy;
    Month lo{9999, 12}, hi{0, 1};
    bool saw_tx = false;
    corpus.for_each_group([&](const TxGroup& tx) {
        const Month m = Month::of(tx.timestamp());
        saw_tx = true;
        if (m < lo) lo = m;
        if (hi < m) hi = m;
        bool any_create = false;
        bool proxy_create = false;
        for (const auto& t : tx.traces) {
            if (!is_creation(t.call_type) || !t.status) continue;
            any_create = true;
            if (proxies.count(t.to)) proxy_create = true;
        }
        const Address sender = tx.sender();
        auto note = [&](std::map<Address, Month>& firsts) {
            auto [it, inserted] = firsts.try_emplace(sender, m);
            if (!inserted && m < it->second) it->second = m;
        };
        if (any_create) note(first_any);
        if (proxy_create) note(first_proxy);
    });

    AdoptionSeries series;
    if (!saw_tx) return series;
    std::map<Month, uint64_t> any_per_month, proxy_per_month;
    for (const auto& [addr, m] : first_any) ++any_per_month[m];
    for (const auto& [addr, m] : first_proxy) ++proxy_per_month[m];
    uint64_t any_total = 0, proxy_total = 0;
    for (Month m = lo;; m = m.next()) {
        any_total += any_per_month.count(m) ? any_per_month[m] : 0;
        proxy_total += proxy_per_month.count(m) ? proxy_per_month[m] : 0;
        series.entries[m] = {proxy_total, any_total};
        if (!(m < hi)) break;
    }
    return series;
}

// ---------------------------------------------------------------------------
// Proxy utilization: monthly ratio of transactions touching a proxy, over
// all transactions and over multi-contract transactions.

inline bool involves_proxy(const TxGroup& tx, const std::set<Address>& proxies) {
    for (const auto& t : tx.traces) {
        if (!is_message_call(t.call_type)) continue;
        if (proxies.count(t.to)) return true;  // proxy as callee
        if (t.call_type == CallType::DelegateCall && proxies.count(t.from))
            return true;  // proxy as delegator
    }
    return false;
}

struct UtilizationSeries {
    MonthlySeries all_tx;
    MonthlySeries multi_contract_tx;
};

inline UtilizationSeries utilization_series(const Corpus& corpus, const ContractLookup& contracts,
                                            const std::set<Address>& proxies) {
    UtilizationSeries out;
    corpus.for_each_group([&](const TxGroup& tx) {
        const Month m = Month::of(tx.timestamp());
        const bool touches = involves_proxy(tx, proxies);
        auto& all_entry = out.all_tx.at(m);
        ++all_entry.denominator;
        if (touches) ++all_entry.numerator;
        if (tracegraph::is_multi_contract(tx, contracts)) {
            auto& multi_entry = out.multi_contract_tx.at(m);
            ++multi_entry.denominator;
            if (touches) ++multi_entry.numerator;
        }
    });
    out.all_tx.fill_gaps();
    out.multi_contract_tx.fill_gaps();
    return out;
}

// ---------------------------------------------------------------------------
// Activity levels: distinct inbound transactions per contract, split into
// proxy and non-proxy samples.

struct ActivitySamples {
    std::vector<std::pair<Address, uint64_t>> proxy;      // sorted by address
    std::vector<std::pair<Address, uint64_t>> non_proxy;  // sorted by address

    std::vector<double> proxy_counts() const {
        std::vector<double> out;
        out.reserve(proxy.size());
        for (const auto& [a, c] : proxy) out.push_back(static_cast<double>(c));
        return out;
    }
    std::vector<double> non_proxy_counts() const {
        std::vector<double> out;
        out.reserve(non_proxy.size());
        for (const auto& [a, c] : non_proxy) out.push_back(static_cast<double>(c));
        return out;
    }
};

inline ActivitySamples activity_levels(const Corpus& corpus, const ContractLookup& contracts,
                                       const std::set<Address>& proxies) {
    std::unordered_map<Address, uint64_t, AddressHash> inbound;
    corpus.for_each_group([&](const TxGroup& tx) {
        std::unordered_set<Address, AddressHash> seen;  // distinct per transaction
        for (const auto& t : tx.traces) {
            if (!is_message_call(t.call_type)) continue;
            if (!contracts.is_contract(t.to)) continue;
            if (seen.insert(t.to).second) ++inbound[t.to];
        }
    });
    ActivitySamples samples;
    contracts.for_each([&](const ContractRecord& rec) {
        const auto it = inbound.find(rec.address);
        const uint64_t count = it == inbound.end() ? 0 : it->second;
        if (proxies.count(rec.address))
            samples.proxy.emplace_back(rec.address, count);
        else
            samples.non_proxy.emplace_back(rec.address, count);
    });
    std::sort(samples.proxy.begin(), samples.proxy.end());
    std::sort(samples.non_proxy.begin(), samples.non_proxy.end());
    return samples;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_contexts(const std::vector<UsageContext>& contexts, const std::string& path) {
    FileWriter out(path);
    std::string buf;
    for (const auto& ctx : contexts) {
        buf.assign("{\"id\":\"");
        buf += ctx.id;
        buf += "\",\"bytecode_digest\":\"";
        buf += digest_hex(ctx.bytecode_digest);
        buf += "\",\"deployer\":";
        if (ctx.deployer) {
            buf += '"';
            buf += ctx.deployer->str();
            buf += '"';
        } else {
            buf += "null";
        }
        buf += ",\"size\":";
        buf += std::to_string(ctx.size());
        buf += ",\"representative\":\"";
        buf += ctx.representative.str();
        buf += "\",\"started_at\":\"";
        buf += format_iso8601(ctx.started_at);
        buf += "\",\"style\":";
        if (ctx.style) {
            buf += '"';
            buf += lineage::style_str(*ctx.style);
            buf += '"';
        } else {
            buf += "null";
        }
        buf += ",\"members\":[";
        for (size_t i = 0; i < ctx.members.size(); ++i) {
            if (i) buf += ',';
            buf += '"';
            buf += ctx.members[i].str();
            buf += '"';
        }
        buf += "],\"logics\":[";
        for (size_t i = 0; i < ctx.logics.size(); ++i) {
            if (i) buf += ',';
            buf += '"';
            buf += ctx.logics[i].str();
            buf += '"';
        }
        buf += "]}\n";
        out.write(buf);
    }
    out.close();
}

inline std::vector<UsageContext> read_contexts(const std::string& path) {
    std::vector<UsageContext> out;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        UsageContext ctx;
        ctx.id = j.at("id").get<std::string>();
        auto digest = hex::decode_exact<32>(j.at("bytecode_digest").get<std::string>());
        if (!digest) throw DataError("bad bytecode_digest in contexts");
        ctx.bytecode_digest = *digest;
        if (!j.at("deployer").is_null()) {
            auto d = Address::parse(j.at("deployer").get<std::string>());
            if (!d) throw DataError("bad deployer in contexts");
            ctx.deployer = *d;
        }
        auto rep = Address::parse(j.at("representative").get<std::string>());
        if (!rep) throw DataError("bad representative in contexts");
        ctx.representative = *rep;
        auto ts = parse_iso8601(j.at("started_at").get<std::string>());
        if (!ts) throw DataError("bad started_at in contexts");
        ctx.started_at = *ts;
        if (!j.at("style").is_null()) {
            const auto s = j.at("style").get<std::string>();
            ctx.style = s == "onchain" ? lineage::DeployStyle::OnChain
                                       : lineage::DeployStyle::OffChain;
        }
        for (const auto& m : j.at("members")) {
            auto a = Address::parse(m.get<std::string>());
            if (!a) throw DataError("bad member in contexts");
            ctx.members.push_back(*a);
        }
        for (const auto& l : j.at("logics")) {
            auto a = Address::parse(l.get<std::string>());
            if (!a) throw DataError("bad logic in contexts");
            ctx.logics.push_back(*a);
        }
        out.push_back(std::move(ctx));
    }
    return out;
}

}  // namespace proxyprobe::context

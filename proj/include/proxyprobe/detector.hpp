// SPDX-License-Identifier: Apache-2.0
#pragma once

// Behavioral proxy detection: a contract is a proxy when it forwards a call
// via delegatecall using the same function selector it received. The parent
// trace carries the incoming selector; matching is against the immediate
// parent only, and only when that parent is a message call (a create parent
// is constructor execution, not an incoming call).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "proxyprobe/corpus.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::detector {

// Identifies one confirming trace, ordered by occurrence.
struct EvidenceRef {
    uint64_t block_number = 0;
    TxHash transaction_hash;
    TraceAddress trace_address;

    friend bool operator<(const EvidenceRef& a, const EvidenceRef& b) {
        if (a.block_number != b.block_number) return a.block_number < b.block_number;
        if (a.transaction_hash != b.transaction_hash)
            return a.transaction_hash < b.transaction_hash;
        return std::lexicographical_compare(a.trace_address.begin(), a.trace_address.end(),
                                            b.trace_address.begin(), b.trace_address.end());
    }
};

struct ProxyFinding {
    Address proxy;
    std::set<Address> logic_targets;
    EvidenceRef first_evidence;
    uint64_t evidence_count = 0;
};

using Findings = std::map<Address, ProxyFinding>;

struct Detection {
    Address proxy;
    Address logic;
    EvidenceRef evidence;
};

// Emits (d.from, d.to) for each delegatecall trace d whose immediate parent
// is a message call carrying the same selector. Pure function of the group.
inline std::vector<Detection> detect_in_tx(const TxGroup& tx) {
    std::vector<Detection> out;
    const auto parents = tx.parent_indexes();
    for (size_t i = 0; i < tx.traces.size(); ++i) {
        const TraceRecord& d = tx.traces[i];
        if (d.call_type != CallType::DelegateCall) continue;
        const int p = parents[i];
        if (p < 0) continue;  // root-level delegatecall: no incoming call
        const TraceRecord& parent = tx.traces[static_cast<size_t>(p)];
        if (!is_message_call(parent.call_type)) continue;
        const auto incoming = selector_of(parent.input);
        const auto forwarded = selector_of(d.input);
        if (!incoming || !forwarded || *incoming != *forwarded) continue;
        out.push_back({d.from, d.to,
                       EvidenceRef{d.block_number, d.transaction_hash, d.trace_address}});
    }
    return out;
}

inline void merge_detection(Findings& findings, const Detection& det) {
    auto [it, inserted] = findings.try_emplace(det.proxy);
    ProxyFinding& f = it->second;
    if (inserted) {
        f.proxy = det.proxy;
        f.first_evidence = det.evidence;
    } else if (det.evidence < f.first_evidence) {
        f.first_evidence = det.evidence;
    }
    f.logic_targets.insert(det.logic);
    ++f.evidence_count;
}

inline void merge_findings(Findings& into, const Findings& other) {
    for (const auto& [addr, f] : other) {
        auto [it, inserted] = into.try_emplace(addr, f);
        if (inserted) continue;
        ProxyFinding& dst = it->second;
        dst.logic_targets.insert(f.logic_targets.begin(), f.logic_targets.end());
        dst.evidence_count += f.evidence_count;
        if (f.first_evidence < dst.first_evidence) dst.first_evidence = f.first_evidence;
    }
}

// Union of per-transaction detections over the whole corpus. The merge is
// commutative, so the result is independent of grouping order and worker
// count.
inline Findings detect_corpus(const Corpus& corpus, unsigned workers = 1) {
    if (workers <= 1) {
        Findings findings;
        corpus.for_each_group([&](const TxGroup& tx) {
            for (const auto& det : detect_in_tx(tx)) merge_detection(findings, det);
        });
        return findings;
    }
    // Round-robin groups to workers; merging is associative and commutative.
    std::vector<std::vector<TxGroup>> batches(workers);
    {
        size_t i = 0;
        corpus.for_each_group([&](const TxGroup& tx) {
            batches[i % workers].push_back(tx);
            ++i;
        });
    }
    std::vector<Findings> partial(workers);
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (const auto& tx : batches[w])
                for (const auto& det : detect_in_tx(tx)) merge_detection(partial[w], det);
        });
    }
    for (auto& t : threads) t.join();
    Findings findings;
    for (const auto& p : partial) merge_findings(findings, p);
    return findings;
}

// ---------------------------------------------------------------------------
// Scoring against labeled ground truth (proxy | other)

struct ClassMetrics {
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 1.0;  // 1.0 by convention when no positives predicted
    double recall = 1.0;
    double f1 = 1.0;
    bool degenerate_precision = false;
};

struct DetectionReport {
    ClassMetrics proxy;
    ClassMetrics other;
    std::vector<Address> missing_from_corpus;  // listed, excluded, warned
};

inline void finish_metrics(ClassMetrics& m) {
    if (m.tp + m.fp == 0) {
        m.precision = 1.0;
        m.degenerate_precision = true;
    } else {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    }
    m.recall = (m.tp + m.fn) == 0 ? 1.0
                                  : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0
                                           : 2.0 * m.precision * m.recall / (m.precision + m.recall);
}

enum class TruthLabel : uint8_t { Proxy, Other };

inline DetectionReport score(const Findings& findings,
                             const std::map<Address, TruthLabel>& ground_truth,
                             const ContractLookup& contracts) {
    DetectionReport report;
    for (const auto& [addr, label] : ground_truth) {
        if (!contracts.is_contract(addr)) {
            report.missing_from_corpus.push_back(addr);
            continue;
        }
        const bool predicted_proxy = findings.count(addr) != 0;
        const bool is_proxy = label == TruthLabel::Proxy;
        if (is_proxy && predicted_proxy) ++report.proxy.tp;
        if (is_proxy && !predicted_proxy) ++report.proxy.fn;
        if (!is_proxy && predicted_proxy) ++report.proxy.fp;
        if (!is_proxy && !predicted_proxy) ++report.proxy.tn;
    }
    // The "other" class is the complement.
    report.other.tp = report.proxy.tn;
    report.other.fp = report.proxy.fn;
    report.other.fn = report.proxy.fp;
    report.other.tn = report.proxy.tp;
    finish_metrics(report.proxy);
    finish_metrics(report.other);
    return report;
}

// ---------------------------------------------------------------------------
// CCDF of logic contracts per proxy

struct CcdfRow {
    uint64_t threshold;
    double fraction;  // fraction of proxies with |logic_targets| >= threshold
};

inline std::vector<CcdfRow> logic_per_proxy_ccdf(const Findings& findings) {
    std::vector<uint64_t> counts;
    counts.reserve(findings.size());
    for (const auto& [addr, f] : findings) counts.push_back(f.logic_targets.size());
    std::sort(counts.begin(), counts.end());
    std::vector<CcdfRow> out;
    const double n = static_cast<double>(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        if (i > 0 && counts[i] == counts[i - 1]) continue;
        out.push_back({counts[i], static_cast<double>(counts.size() - i) / n});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_findings(const Findings& findings, const std::string& path) {
    FileWriter out(path);
    std::string buf;
    for (const auto& [addr, f] : findings) {
        buf.assign("{\"proxy\":\"");
        buf += f.proxy.str();
        buf += "\",\"logic_targets\":[";
        bool first = true;
        for (const auto& logic : f.logic_targets) {
            if (!first) buf += ',';
            first = false;
            buf += '"';
            buf += logic.str();
            buf += '"';
        }
        buf += "],\"evidence_count\":";
        buf += std::to_string(f.evidence_count);
        buf += ",\"first_evidence_tx\":\"";
        buf += f.first_evidence.transaction_hash.str();
        buf += "\",\"first_evidence_trace\":\"";
        buf += trace_address_str(f.first_evidence.trace_address);
        buf += "\",\"first_evidence_block\":";
        buf += std::to_string(f.first_evidence.block_number);
        buf += "}\n";
        out.write(buf);
    }
    out.close();
}

inline Findings read_findings(const std::string& path) {
    Findings findings;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        ProxyFinding f;
        auto proxy = Address::parse(j.at("proxy").get<std::string>());
        if (!proxy) throw DataError("bad proxy address in findings");
        f.proxy = *proxy;
        for (const auto& l : j.at("logic_targets")) {
            auto logic = Address::parse(l.get<std::string>());
            if (!logic) throw DataError("bad logic address in findings");
            f.logic_targets.insert(*logic);
        }
        f.evidence_count = j.at("evidence_count").get<uint64_t>();
        auto tx = TxHash::parse(j.at("first_evidence_tx").get<std::string>());
        if (!tx) throw DataError("bad first_evidence_tx in findings");
        f.first_evidence.transaction_hash = *tx;
        auto ta = parse_trace_address(j.at("first_evidence_trace").get<std::string>());
        if (!ta) throw DataError("bad first_evidence_trace in findings");
        f.first_evidence.trace_address = *ta;
        f.first_evidence.block_number = j.value("first_evidence_block", 0ull);
        findings.emplace(f.proxy, std::move(f));
    }
    return findings;
}

inline std::set<Address> proxy_set(const Findings& findings) {
    std::set<Address> out;
    for (const auto& [addr, f] : findings) out.insert(addr);
    return out;
}

}  // namespace proxyprobe::detector

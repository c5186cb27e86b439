// SPDX-License-Identifier: Apache-2.0
#pragma once

// Read side of the ingest index: streaming access to validated transaction
// groups and the per-address contract lookup.

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "proxyprobe/errors.hpp"
#include "proxyprobe/ingest.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe {

// All traces of one transaction, ordered by trace_address; exactly one root.
struct TxGroup {
    TxHash transaction_hash;
    std::vector<TraceRecord> traces;

    const TraceRecord& root() const { return traces.front(); }
    Address sender() const { return root().from; }
    uint64_t block_number() const { return root().block_number; }
    UtcSeconds timestamp() const { return root().block_timestamp; }

    // Index of the immediate parent trace, or -1 for the root. The parent is
    // the record whose trace_address is the longest proper prefix.
    int parent_index(size_t child) const {
        const TraceAddress& addr = traces[child].trace_address;
        if (addr.empty()) return -1;
        std::unordered_map<TraceAddress, int, TraceAddressHash> lookup;
        for (size_t i = 0; i < traces.size(); ++i)
            lookup.emplace(traces[i].trace_address, static_cast<int>(i));
        TraceAddress prefix(addr.begin(), addr.end() - 1);
        while (true) {
            auto it = lookup.find(prefix);
            if (it != lookup.end()) return it->second;
            if (prefix.empty()) return -1;
            prefix.pop_back();
        }
    }

    // Parent indexes for every trace in one pass; -1 for the root.
    std::vector<int> parent_indexes() const {
        std::unordered_map<TraceAddress, int, TraceAddressHash> lookup;
        lookup.reserve(traces.size() * 2);
        for (size_t i = 0; i < traces.size(); ++i)
            lookup.emplace(traces[i].trace_address, static_cast<int>(i));
        std::vector<int> out(traces.size(), -1);
        for (size_t i = 0; i < traces.size(); ++i) {
            const TraceAddress& addr = traces[i].trace_address;
            if (addr.empty()) continue;
            TraceAddress prefix(addr.begin(), addr.end() - 1);
            while (true) {
                auto it = lookup.find(prefix);
                if (it != lookup.end()) {
                    out[i] = it->second;
                    break;
                }
                if (prefix.empty()) break;
                prefix.pop_back();
            }
        }
        return out;
    }
};

class ContractLookup {
  public:
    void add(ContractRecord rec) { map_.emplace(rec.address, std::move(rec)); }

    const ContractRecord* find(const Address& a) const {
        auto it = map_.find(a);
        return it == map_.end() ? nullptr : &it->second;
    }

    // An address is an EOA iff it is absent from the contracts corpus.
    bool is_contract(const Address& a) const { return map_.count(a) != 0; }

    size_t size() const { return map_.size(); }

    template <typename F>
    void for_each(F&& fn) const {
        for (const auto& [addr, rec] : map_) fn(rec);
    }

  private:
    std::unordered_map<Address, ContractRecord, AddressHash> map_;
};

class Corpus {
  public:
    static Corpus open(const std::string& index_dir) {
        namespace fs = std::filesystem;
        Corpus c;
        c.dir_ = index_dir;
        const std::string manifest_path = (fs::path(index_dir) / "manifest.json").string();
        if (!fs::exists(manifest_path))
            throw IoError("not an ingest index (missing manifest.json): " + index_dir);
        c.manifest_ = nlohmann::json::parse(read_file(manifest_path));
        return c;
    }

    const std::string& dir() const { return dir_; }
    std::string traces_path() const {
        return (std::filesystem::path(dir_) / "traces.jsonl").string();
    }
    std::string contracts_path() const {
        return (std::filesystem::path(dir_) / "contracts.jsonl").string();
    }
    const nlohmann::json& manifest() const { return manifest_; }

    std::string traces_digest() const {
        return manifest_.at("outputs").at("traces.jsonl").get<std::string>();
    }
    std::string contracts_digest() const {
        return manifest_.at("outputs").at("contracts.jsonl").get<std::string>();
    }

    ContractLookup load_contracts() const {
        ContractLookup lookup;
        LineReader reader(contracts_path());
        std::string line;
        std::vector<jsonl::Field> scratch;
        std::string err;
        while (reader.next(line)) {
            if (line.empty()) continue;
            ContractRecord rec;
            if (!ingest::parse_contract_jsonl(line, scratch, rec, err))
                throw DataError("corrupt contracts index line " +
                                std::to_string(reader.line_number()) + ": " + err);
            lookup.add(std::move(rec));
        }
        return lookup;
    }

    // Streams TxGroups in (block_number, transaction_hash) order.
    template <typename F>
    void for_each_group(F&& fn) const {
        LineReader reader(traces_path());
        std::string line;
        std::vector<jsonl::Field> scratch;
        std::string err;
        TxGroup group;
        while (reader.next(line)) {
            if (line.empty()) continue;
            TraceRecord rec;
            if (!ingest::parse_trace_jsonl(line, scratch, rec, err))
                throw DataError("corrupt traces index line " +
                                std::to_string(reader.line_number()) + ": " + err);
            if (!group.traces.empty() && rec.transaction_hash != group.transaction_hash) {
                fn(group);
                group.traces.clear();
            }
            group.transaction_hash = rec.transaction_hash;
            group.traces.push_back(std::move(rec));
        }
        if (!group.traces.empty()) fn(group);
    }

    template <typename F>
    void for_each_trace(F&& fn) const {
        LineReader reader(traces_path());
        std::string line;
        std::vector<jsonl::Field> scratch;
        std::string err;
        while (reader.next(line)) {
            if (line.empty()) continue;
            TraceRecord rec;
            if (!ingest::parse_trace_jsonl(line, scratch, rec, err))
                throw DataError("corrupt traces index line " +
                                std::to_string(reader.line_number()) + ": " + err);
            fn(rec);
        }
    }

  private:
    std::string dir_;
    nlohmann::json manifest_;
};

}  // namespace proxyprobe

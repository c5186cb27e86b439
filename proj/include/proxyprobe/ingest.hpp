// SPDX-License-Identifier: Apache-2.0
#pragma once

// Streams traces and contracts from disk into validated records and builds
// the derived index: traces sorted by (block_number, transaction_hash,
// trace_address), contracts deduplicated by address, a quarantine list, an
// error report and a manifest with input digests. Index bytes are
// deterministic for identical inputs regardless of worker count.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "proxyprobe/errors.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::ingest {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Decimal <-> BigInt

inline std::optional<BigInt> parse_decimal(std::string_view text) {
    if (text.empty()) return std::nullopt;
    uint64_t fast = 0;
    size_t i = 0;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return std::nullopt;
        if (fast > (UINT64_MAX - 9) / 10) break;  // continue on the slow path
        fast = fast * 10 + static_cast<uint64_t>(c - '0');
    }
    if (i == text.size()) return BigInt(fast);
    BigInt big(fast);
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return std::nullopt;
        big *= 10;
        big += static_cast<unsigned>(c - '0');
    }
    return big;
}

inline std::optional<uint64_t> parse_u64(std::string_view text) {
    if (text.empty() || text.size() > 20) return std::nullopt;
    uint64_t v = 0;
    for (const char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        if (v > (UINT64_MAX - 9) / 10) return std::nullopt;
        v = v * 10 + static_cast<uint64_t>(c - '0');
    }
    return v;
}

// ---------------------------------------------------------------------------
// Field tags shared by the JSONL and CSV schemas

enum class TraceField {
    TransactionHash,
    TraceAddress,
    FromAddress,
    ToAddress,
    CallType,
    Input,
    Output,
    GasUsed,
    Status,
    Value,
    BlockNumber,
    BlockTimestamp,
    GasPrice,
    Unknown,
};

inline TraceField trace_field(std::string_view key) {
    if (key == "transaction_hash") return TraceField::TransactionHash;
    if (key == "trace_address") return TraceField::TraceAddress;
    if (key == "from_address") return TraceField::FromAddress;
    if (key == "to_address") return TraceField::ToAddress;
    if (key == "call_type") return TraceField::CallType;
    if (key == "input") return TraceField::Input;
    if (key == "output") return TraceField::Output;
    if (key == "gas_used") return TraceField::GasUsed;
    if (key == "status") return TraceField::Status;
    if (key == "value") return TraceField::Value;
    if (key == "block_number") return TraceField::BlockNumber;
    if (key == "block_timestamp") return TraceField::BlockTimestamp;
    if (key == "gas_price") return TraceField::GasPrice;
    return TraceField::Unknown;  // extra export columns are ignored
}

enum class ContractField {
    Address,
    Bytecode,
    BlockTimestamp,
    BlockNumber,
    TransactionHash,
    Unknown,
};

inline ContractField contract_field(std::string_view key) {
    if (key == "address") return ContractField::Address;
    if (key == "bytecode") return ContractField::Bytecode;
    if (key == "block_timestamp") return ContractField::BlockTimestamp;
    if (key == "block_number") return ContractField::BlockNumber;
    if (key == "transaction_hash") return ContractField::TransactionHash;
    return ContractField::Unknown;
}

// ---------------------------------------------------------------------------
// Record builders

struct RawField {
    std::string_view value;
    bool is_null = false;
    bool present = false;
};

inline bool build_trace(const RawField (&f)[13], TraceRecord& out, std::string& err) {
    auto need = [&](int idx, const char* name) {
        if (!f[idx].present || f[idx].is_null) {
            err = std::string("missing field: ") + name;
            return false;
        }
        return true;
    };
    if (!need(0, "transaction_hash") || !need(2, "from_address") || !need(3, "to_address") ||
        !need(4, "call_type") || !need(8, "status") || !need(10, "block_number") ||
        !need(11, "block_timestamp"))
        return false;

    auto tx = TxHash::parse(f[0].value);
    if (!tx) {
        err = "bad transaction_hash";
        return false;
    }
    out.transaction_hash = *tx;

    if (!f[1].present || f[1].is_null) {
        out.trace_address.clear();
    } else {
        auto ta = parse_trace_address(f[1].value);
        if (!ta) {
            err = "bad trace_address";
            return false;
        }
        out.trace_address = std::move(*ta);
    }

    auto from = Address::parse(f[2].value);
    auto to = Address::parse(f[3].value);
    if (!from || !to) {
        err = "bad address";
        return false;
    }
    out.from = *from;
    out.to = *to;

    auto ct = parse_call_type(f[4].value);
    if (!ct) {
        err = "bad call_type: " + std::string(f[4].value);
        return false;
    }
    out.call_type = *ct;

    auto parse_payload = [&](const RawField& raw, HexData& dst, const char* name) {
        if (!raw.present || raw.is_null || raw.value.empty()) {
            dst.bytes.clear();
            return true;
        }
        auto data = HexData::parse(raw.value);
        if (!data) {
            err = std::string("bad hex in ") + name;
            return false;
        }
        dst = std::move(*data);
        return true;
    };
    if (!parse_payload(f[5], out.input, "input") || !parse_payload(f[6], out.output, "output"))
        return false;

    auto parse_amount = [&](const RawField& raw, BigInt& dst, const char* name) {
        if (!raw.present || raw.is_null) {
            dst = 0;
            return true;
        }
        auto v = parse_decimal(raw.value);
        if (!v) {
            err = std::string("bad integer in ") + name;
            return false;
        }
        dst = std::move(*v);
        return true;
    };
    if (!parse_amount(f[7], out.gas_used, "gas_used") || !parse_amount(f[9], out.value, "value"))
        return false;

    if (f[8].value == "1" || f[8].value == "true") {
        out.status = true;
    } else if (f[8].value == "0" || f[8].value == "false") {
        out.status = false;
    } else {
        err = "bad status";
        return false;
    }

    auto block = parse_u64(f[10].value);
    if (!block) {
        err = "bad block_number";
        return false;
    }
    out.block_number = *block;

    auto ts = parse_iso8601(f[11].value);
    if (!ts) {
        err = "bad block_timestamp";
        return false;
    }
    out.block_timestamp = *ts;

    if (f[12].present && !f[12].is_null && !f[12].value.empty()) {
        auto gp = parse_decimal(f[12].value);
        if (!gp) {
            err = "bad gas_price";
            return false;
        }
        out.gas_price = std::move(*gp);
    } else {
        out.gas_price.reset();
    }
    return true;
}

inline bool build_contract(const RawField (&f)[5], ContractRecord& out, std::string& err) {
    for (int i = 0; i < 5; ++i) {
        if (i == 1) continue;  // bytecode may be null (self-destructed)
        if (!f[i].present || f[i].is_null) {
            err = "missing contract field";
            return false;
        }
    }
    auto addr = Address::parse(f[0].value);
    if (!addr) {
        err = "bad address";
        return false;
    }
    out.address = *addr;
    if (!f[1].present || f[1].is_null || f[1].value.empty()) {
        out.bytecode.bytes.clear();
    } else {
        auto code = HexData::parse(f[1].value);
        if (!code) {
            err = "bad bytecode hex";
            return false;
        }
        out.bytecode = std::move(*code);
    }
    auto ts = parse_iso8601(f[2].value);
    if (!ts) {
        err = "bad block_timestamp";
        return false;
    }
    out.created_at = *ts;
    auto block = parse_u64(f[3].value);
    if (!block) {
        err = "bad block_number";
        return false;
    }
    out.block_number = *block;
    auto tx = TxHash::parse(f[4].value);
    if (!tx) {
        err = "bad transaction_hash";
        return false;
    }
    out.creation_tx = *tx;
    return true;
}

// ---------------------------------------------------------------------------
// Line parsers (JSONL and CSV)

inline bool parse_trace_jsonl(std::string_view line, std::vector<jsonl::Field>& scratch,
                              TraceRecord& out, std::string& err) {
    if (!jsonl::scan_flat_object(line, scratch, err)) return false;
    RawField f[13]{};
    for (const auto& field : scratch) {
        const TraceField id = trace_field(field.key);
        if (id == TraceField::Unknown) continue;
        auto& slot = f[static_cast<int>(id)];
        slot.present = true;
        slot.is_null = field.is_null;
        slot.value = field.value;
    }
    return build_trace(f, out, err);
}

inline bool parse_contract_jsonl(std::string_view line, std::vector<jsonl::Field>& scratch,
                                 ContractRecord& out, std::string& err) {
    if (!jsonl::scan_flat_object(line, scratch, err)) return false;
    RawField f[5]{};
    for (const auto& field : scratch) {
        const ContractField id = contract_field(field.key);
        if (id == ContractField::Unknown) continue;
        auto& slot = f[static_cast<int>(id)];
        slot.present = true;
        slot.is_null = field.is_null;
        slot.value = field.value;
    }
    return build_contract(f, out, err);
}

// Minimal RFC-4180 row split; quoted fields may contain commas but not
// raw newlines (fixtures are hand-written, not exported).
inline bool split_csv_row(std::string_view line, std::vector<std::string>& out, std::string& err) {
    out.clear();
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        err = "unterminated quote";
        return false;
    }
    out.push_back(std::move(cur));
    return true;
}

// ---------------------------------------------------------------------------
// Canonical serialization (index files are byte-deterministic)

inline void append_trace_jsonl(std::string& out, const TraceRecord& t) {
    out += "{\"transaction_hash\":\"";
    out += t.transaction_hash.str();
    out += "\",\"trace_address\":\"";
    out += trace_address_str(t.trace_address);
    out += "\",\"from_address\":\"";
    out += t.from.str();
    out += "\",\"to_address\":\"";
    out += t.to.str();
    out += "\",\"call_type\":\"";
    out += call_type_str(t.call_type);
    out += "\",\"input\":\"";
    out += t.input.str();
    out += "\",\"output\":\"";
    out += t.output.str();
    out += "\",\"gas_used\":\"";
    out += t.gas_used.str();
    out += "\",\"status\":";
    out += t.status ? '1' : '0';
    out += ",\"value\":\"";
    out += t.value.str();
    out += '"';
    if (t.gas_price) {
        out += ",\"gas_price\":\"";
        out += t.gas_price->str();
        out += '"';
    }
    out += ",\"block_number\":";
    out += std::to_string(t.block_number);
    out += ",\"block_timestamp\":\"";
    out += format_iso8601(t.block_timestamp);
    out += "\"}";
}

inline void append_contract_jsonl(std::string& out, const ContractRecord& c) {
    out += "{\"address\":\"";
    out += c.address.str();
    out += "\",\"bytecode\":\"";
    out += c.bytecode.str();
    out += "\",\"block_timestamp\":\"";
    out += format_iso8601(c.created_at);
    out += "\",\"block_number\":";
    out += std::to_string(c.block_number);
    out += ",\"transaction_hash\":\"";
    out += c.creation_tx.str();
    out += "\"}";
}

// Sort key with the property that plain string order equals
// (block_number, transaction_hash, trace_address-as-int-sequence) order.
inline std::string trace_sort_key(const TraceRecord& t) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string key;
    key.reserve(16 + 64 + 1 + 9 * t.trace_address.size());
    for (int i = 15; i >= 0; --i) key += kHex[(t.block_number >> (4 * i)) & 0xf];
    for (auto b : t.transaction_hash.bytes) {
        key += kHex[b >> 4];
        key += kHex[b & 0xf];
    }
    key += '/';
    for (size_t i = 0; i < t.trace_address.size(); ++i) {
        if (i) key += '.';
        const uint32_t v = t.trace_address[i];
        for (int k = 7; k >= 0; --k) key += kHex[(v >> (4 * k)) & 0xf];
    }
    return key;
}

// ---------------------------------------------------------------------------
// Sorted-run machinery (external-sort fallback under a memory budget)

struct KeyedLine {
    std::string key;
    std::string line;

    friend bool operator<(const KeyedLine& a, const KeyedLine& b) {
        const int c = a.key.compare(b.key);
        return c != 0 ? c < 0 : a.line < b.line;  // full line as final tie-break
    }
};

class Run {
  public:
    virtual ~Run() = default;
    virtual bool next(KeyedLine& out) = 0;
};

class MemRun : public Run {
  public:
    explicit MemRun(std::vector<KeyedLine> items) : items_(std::move(items)) {}
    bool next(KeyedLine& out) override {
        if (pos_ >= items_.size()) return false;
        out = std::move(items_[pos_++]);
        return true;
    }

  private:
    std::vector<KeyedLine> items_;
    size_t pos_ = 0;
};

// Spilled run file: "key\tline\n" per record, already sorted.
class FileRun : public Run {
  public:
    explicit FileRun(const std::string& path) : reader_(path) {}
    bool next(KeyedLine& out) override {
        std::string raw;
        if (!reader_.next(raw)) return false;
        const size_t tab = raw.find('\t');
        if (tab == std::string::npos) throw IoError("corrupt spill run");
        out.key = raw.substr(0, tab);
        out.line = raw.substr(tab + 1);
        return true;
    }

  private:
    LineReader reader_;
};

inline std::string spill_run(std::vector<KeyedLine>& items, const fs::path& tmp_dir,
                             uint32_t run_id) {
    std::sort(items.begin(), items.end());
    const std::string path = (tmp_dir / ("run-" + std::to_string(run_id) + ".tmp")).string();
    FileWriter w(path);
    std::string buf;
    for (const auto& it : items) {
        buf.assign(it.key);
        buf += '\t';
        buf += it.line;
        buf += '\n';
        w.write(buf);
    }
    w.close();
    items.clear();
    return path;
}

// K-way merge over sorted runs; Sink receives items in global order.
template <typename Sink>
void merge_runs(std::vector<std::unique_ptr<Run>> runs, Sink&& sink) {
    struct Head {
        KeyedLine item;
        size_t run;
    };
    auto cmp = [](const Head& a, const Head& b) {
        // std::priority_queue is a max-heap; invert, with run index as the
        // final tie-break so merge order is deterministic.
        const int c = a.item.key.compare(b.item.key);
        if (c != 0) return c > 0;
        const int l = a.item.line.compare(b.item.line);
        if (l != 0) return l > 0;
        return a.run > b.run;
    };
    std::priority_queue<Head, std::vector<Head>, decltype(cmp)> heap(cmp);
    for (size_t i = 0; i < runs.size(); ++i) {
        KeyedLine item;
        if (runs[i]->next(item)) heap.push(Head{std::move(item), i});
    }
    while (!heap.empty()) {
        Head head = heap.top();
        heap.pop();
        sink(head.item);
        KeyedLine item;
        if (runs[head.run]->next(item)) heap.push(Head{std::move(item), head.run});
    }
}

// ---------------------------------------------------------------------------
// Byte-range sharding for parallel parsing (JSONL only; lines never contain
// raw newlines)

struct ByteRange {
    uint64_t begin = 0;
    uint64_t end = 0;
};

inline std::vector<ByteRange> shard_ranges(uint64_t file_size, unsigned workers) {
    if (workers == 0) workers = 1;
    const uint64_t min_shard = 1 << 20;
    unsigned n = static_cast<unsigned>(std::min<uint64_t>(workers, std::max<uint64_t>(1, file_size / min_shard)));
    if (n == 0) n = 1;
    std::vector<ByteRange> out;
    const uint64_t step = file_size / n;
    for (unsigned i = 0; i < n; ++i)
        out.push_back({i * step, i + 1 == n ? file_size : (i + 1) * step});
    return out;
}

// Reads lines whose first byte lies in [begin, end).
class RangeLineReader {
  public:
    RangeLineReader(const std::string& path, uint64_t begin, uint64_t end)
        : file_(std::fopen(path.c_str(), "rb")), end_(end) {
        if (!file_) throw IoError("cannot open " + path);
        buf_.resize(1 << 20);
        if (begin > 0) {
            // A line belongs to the shard containing its first byte. If the
            // byte before `begin` is not a newline, `begin` is mid-line and
            // that partial line belongs to the previous shard.
            std::fseek(file_, static_cast<long>(begin - 1), SEEK_SET);
            const int prev = std::fgetc(file_);
            offset_ = begin;
            if (prev != '\n' && prev != EOF) {
                std::string skipped;
                read_raw_line(skipped);
            }
        }
    }
    ~RangeLineReader() {
        if (file_) std::fclose(file_);
    }
    RangeLineReader(const RangeLineReader&) = delete;
    RangeLineReader& operator=(const RangeLineReader&) = delete;

    bool next(std::string& line) {
        if (line_start_ >= end_) return false;
        line_start_ = offset_;
        if (line_start_ >= end_) return false;
        if (!read_raw_line(line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++count_;
        return true;
    }

    uint64_t lines_read() const { return count_; }

  private:
    bool read_raw_line(std::string& line) {
        line.clear();
        while (true) {
            while (pos_ < len_) {
                const char c = buf_[pos_++];
                ++offset_;
                if (c == '\n') return true;
                line += c;
            }
            len_ = std::fread(buf_.data(), 1, buf_.size(), file_);
            pos_ = 0;
            if (len_ == 0) return !line.empty();
        }
    }

    FILE* file_ = nullptr;
    std::vector<char> buf_;
    size_t pos_ = 0;
    size_t len_ = 0;
    uint64_t offset_ = 0;
    uint64_t end_ = 0;
    uint64_t line_start_ = 0;
    uint64_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Ingest options, statistics and the run itself

struct Options {
    bool strict = false;
    unsigned workers = 1;
    uint64_t mem_budget_bytes = 512ull << 20;
};

struct Stats {
    uint64_t trace_lines_accepted = 0;
    uint64_t trace_line_errors = 0;
    uint64_t transactions = 0;
    uint64_t quarantined_transactions = 0;
    uint64_t traces_indexed = 0;
    uint64_t contracts = 0;
    uint64_t contract_duplicates = 0;
    uint64_t contract_line_errors = 0;
};

namespace detail {

struct ShardResult {
    std::vector<KeyedLine> items;      // in-memory remainder, sorted at spill points
    std::vector<std::string> spills;   // run files already on disk
    ErrorReport errors;                // local line numbers, fixed up later
    uint64_t lines = 0;
    uint64_t accepted = 0;
};

inline bool is_csv(const std::string& path) {
    return path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

template <typename ParseLine>
ShardResult parse_shard(const std::string& path, ByteRange range, const fs::path& tmp_dir,
                        uint32_t shard_id, uint64_t budget_bytes, ParseLine&& parse_line) {
    ShardResult result;
    RangeLineReader reader(path, range.begin, range.end);
    std::string line;
    uint64_t approx_bytes = 0;
    uint32_t spill_seq = 0;
    while (reader.next(line)) {
        ++result.lines;
        if (line.empty()) continue;
        std::string err;
        KeyedLine item;
        if (!parse_line(line, item, err)) {
            result.errors.push_back({reader.lines_read(), std::move(err)});
            continue;
        }
        ++result.accepted;
        approx_bytes += item.key.size() + item.line.size() + 64;
        result.items.push_back(std::move(item));
        if (approx_bytes >= budget_bytes) {
            result.spills.push_back(
                spill_run(result.items, tmp_dir, shard_id * 10000 + spill_seq++));
            approx_bytes = 0;
        }
    }
    std::sort(result.items.begin(), result.items.end());
    return result;
}

}  // namespace detail

// Parses, validates, sorts and canonicalizes the traces file. Returns runs
// ready to merge plus the error report with global line numbers.
struct SortedTraces {
    std::vector<std::unique_ptr<Run>> runs;
    ErrorReport errors;
    uint64_t lines = 0;
    uint64_t accepted = 0;
};

inline SortedTraces load_and_sort_traces(const std::string& path, const fs::path& tmp_dir,
                                         const Options& opts) {
    const bool csv = detail::is_csv(path);
    SortedTraces out;

    if (csv) {
        // CSV: single pass, header-driven column mapping.
        LineReader reader(path);
        std::string header;
        if (!reader.next(header)) return out;
        std::vector<std::string> cols;
        std::string err;
        if (!split_csv_row(header, cols, err)) throw DataError("bad CSV header: " + err);
        std::vector<TraceField> mapping;
        for (const auto& c : cols) mapping.push_back(trace_field(c));
        std::vector<KeyedLine> items;
        std::string line;
        std::vector<std::string> row;
        while (reader.next(line)) {
            ++out.lines;
            if (line.empty()) continue;
            if (!split_csv_row(line, row, err) || row.size() != mapping.size()) {
                out.errors.push_back({reader.line_number(), err.empty() ? "column count mismatch" : err});
                continue;
            }
            RawField f[13]{};
            for (size_t i = 0; i < row.size(); ++i) {
                const TraceField id = mapping[i];
                if (id == TraceField::Unknown) continue;
                auto& slot = f[static_cast<int>(id)];
                slot.present = true;
                slot.value = row[i];
            }
            TraceRecord rec;
            if (!build_trace(f, rec, err)) {
                out.errors.push_back({reader.line_number(), err});
                continue;
            }
            KeyedLine item;
            item.key = trace_sort_key(rec);
            append_trace_jsonl(item.line, rec);
            items.push_back(std::move(item));
            ++out.accepted;
        }
        std::sort(items.begin(), items.end());
        out.runs.push_back(std::make_unique<MemRun>(std::move(items)));
        return out;
    }

    const uint64_t file_size = fs::file_size(path);
    auto ranges = shard_ranges(file_size, opts.workers);
    const uint64_t budget_each =
        std::max<uint64_t>(opts.mem_budget_bytes / ranges.size(), 64 << 10);

    auto parse_line = [](const std::string& line, KeyedLine& item, std::string& err) {
        thread_local std::vector<jsonl::Field> scratch;
        TraceRecord rec;
        if (!parse_trace_jsonl(line, scratch, rec, err)) return false;
        item.key = trace_sort_key(rec);
        item.line.clear();
        append_trace_jsonl(item.line, rec);
        return true;
    };

    std::vector<detail::ShardResult> results(ranges.size());
    if (ranges.size() == 1) {
        results[0] = detail::parse_shard(path, ranges[0], tmp_dir, 0, budget_each, parse_line);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> failures(ranges.size());
        for (size_t i = 0; i < ranges.size(); ++i) {
            threads.emplace_back([&, i] {
                try {
                    results[i] = detail::parse_shard(path, ranges[i], tmp_dir,
                                                     static_cast<uint32_t>(i), budget_each,
                                                     parse_line);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        for (auto& f : failures)
            if (f) std::rethrow_exception(f);
    }

    // Fix up error line numbers from shard-local to global.
    uint64_t base = 0;
    for (auto& r : results) {
        for (auto& e : r.errors) out.errors.push_back({base + e.line, std::move(e.message)});
        base += r.lines;
        out.lines += r.lines;
        out.accepted += r.accepted;
        for (auto& spill : r.spills) out.runs.push_back(std::make_unique<FileRun>(spill));
        if (!r.items.empty()) out.runs.push_back(std::make_unique<MemRun>(std::move(r.items)));
    }
    std::sort(out.errors.begin(), out.errors.end(),
              [](const LineError& a, const LineError& b) { return a.line < b.line; });
    return out;
}

// Streams merged, validated trace lines grouped per transaction. GroupSink
// receives (tx_key_prefix, lines); QuarantineSink receives the whole group
// plus a reason.
template <typename GroupSink, typename QuarantineSink>
void emit_groups(std::vector<std::unique_ptr<Run>> runs, GroupSink&& good, QuarantineSink&& bad) {
    std::vector<KeyedLine> group;
    std::string group_tx;  // first 80 chars of key: block + tx hash

    auto flush = [&] {
        if (group.empty()) return;
        bool has_root = group.front().key.size() >= 81 && group.front().key[80] == '/' &&
                        group.front().key.size() == 81;
        bool dup = false;
        for (size_t i = 1; i < group.size(); ++i)
            if (group[i].key == group[i - 1].key) {
                dup = true;
                break;
            }
        if (!has_root) {
            bad(group, "no root trace");
        } else if (dup) {
            bad(group, "duplicate trace_address");
        } else {
            good(group);
        }
        group.clear();
    };

    merge_runs(std::move(runs), [&](const KeyedLine& item) {
        const std::string_view tx = std::string_view(item.key).substr(0, 80);
        if (group.empty() || tx != group_tx) {
            flush();
            group_tx.assign(tx);
        }
        group.push_back(item);
    });
    flush();
}

// Full ingest: builds the index directory and returns statistics.
inline Stats run(const std::string& traces_path, const std::string& contracts_path,
                 const std::string& out_dir, const Options& opts) {
    Stats stats;
    fs::create_directories(out_dir);
    const fs::path tmp_dir = fs::path(out_dir) / "tmp";
    fs::create_directories(tmp_dir);

    const Digest32 traces_digest = file_digest(traces_path);
    const Digest32 contracts_digest = file_digest(contracts_path);

    // --- traces ---
    auto sorted = load_and_sort_traces(traces_path, tmp_dir, opts);
    stats.trace_lines_accepted = sorted.accepted;
    stats.trace_line_errors = sorted.errors.size();
    if (opts.strict && !sorted.errors.empty()) {
        const auto& first = sorted.errors.front();
        throw DataError("traces line " + std::to_string(first.line) + ": " + first.message);
    }

    FileWriter traces_out((fs::path(out_dir) / "traces.jsonl").string());
    FileWriter quarantine_out((fs::path(out_dir) / "quarantine.jsonl").string());
    std::string buf;
    emit_groups(
        std::move(sorted.runs),
        [&](const std::vector<KeyedLine>& group) {
            ++stats.transactions;
            stats.traces_indexed += group.size();
            for (const auto& item : group) {
                buf.assign(item.line);
                buf += '\n';
                traces_out.write(buf);
            }
        },
        [&](const std::vector<KeyedLine>& group, const char* reason) {
            ++stats.quarantined_transactions;
            if (opts.strict)
                throw DataError(std::string("quarantined transaction (") + reason + ")");
            buf.assign("{\"transaction_hash\":\"0x");
            buf += group.front().key.substr(16, 64);
            buf += "\",\"reason\":\"";
            buf += reason;
            buf += "\",\"trace_count\":";
            buf += std::to_string(group.size());
            buf += "}\n";
            quarantine_out.write(buf);
        });
    traces_out.close();
    quarantine_out.close();

    // --- contracts ---
    std::vector<ContractRecord> contracts;
    ErrorReport contract_errors;
    {
        const bool csv = detail::is_csv(contracts_path);
        LineReader reader(contracts_path);
        std::string line;
        std::string err;
        std::vector<jsonl::Field> scratch;
        std::vector<ContractField> mapping;
        std::vector<std::string> row;
        if (csv) {
            std::string header;
            if (reader.next(header)) {
                std::vector<std::string> cols;
                if (!split_csv_row(header, cols, err)) throw DataError("bad CSV header: " + err);
                for (const auto& c : cols) mapping.push_back(contract_field(c));
            }
        }
        while (reader.next(line)) {
            if (line.empty()) continue;
            ContractRecord rec;
            bool ok;
            if (csv) {
                ok = split_csv_row(line, row, err) && row.size() == mapping.size();
                if (ok) {
                    RawField f[5]{};
                    for (size_t i = 0; i < row.size(); ++i) {
                        const ContractField id = mapping[i];
                        if (id == ContractField::Unknown) continue;
                        auto& slot = f[static_cast<int>(id)];
                        slot.present = true;
                        slot.value = row[i];
                    }
                    ok = build_contract(f, rec, err);
                }
            } else {
                ok = parse_contract_jsonl(line, scratch, rec, err);
            }
            if (!ok) {
                contract_errors.push_back({reader.line_number(), err});
                continue;
            }
            contracts.push_back(std::move(rec));
        }
    }
    stats.contract_line_errors = contract_errors.size();
    if (opts.strict && !contract_errors.empty()) {
        const auto& first = contract_errors.front();
        throw DataError("contracts line " + std::to_string(first.line) + ": " + first.message);
    }

    // Duplicate addresses resolve to the earliest created_at.
    std::stable_sort(contracts.begin(), contracts.end(),
                     [](const ContractRecord& a, const ContractRecord& b) {
                         if (a.address != b.address) return a.address < b.address;
                         if (a.created_at != b.created_at) return a.created_at < b.created_at;
                         if (a.block_number != b.block_number) return a.block_number < b.block_number;
                         return a.creation_tx < b.creation_tx;
                     });
    FileWriter contracts_out((fs::path(out_dir) / "contracts.jsonl").string());
    for (size_t i = 0; i < contracts.size(); ++i) {
        if (i > 0 && contracts[i].address == contracts[i - 1].address) {
            ++stats.contract_duplicates;
            continue;
        }
        ++stats.contracts;
        buf.clear();
        append_contract_jsonl(buf, contracts[i]);
        buf += '\n';
        contracts_out.write(buf);
    }
    contracts_out.close();

    // --- error report ---
    {
        FileWriter errors_out((fs::path(out_dir) / "errors.jsonl").string());
        for (const auto& e : sorted.errors) {
            buf.assign("{\"file\":\"traces\",\"line\":");
            buf += std::to_string(e.line);
            buf += ",\"message\":";
            jsonl::append_json_string(buf, e.message);
            buf += "}\n";
            errors_out.write(buf);
        }
        for (const auto& e : contract_errors) {
            buf.assign("{\"file\":\"contracts\",\"line\":");
            buf += std::to_string(e.line);
            buf += ",\"message\":";
            jsonl::append_json_string(buf, e.message);
            buf += "}\n";
            errors_out.write(buf);
        }
        errors_out.close();
    }

    // --- manifest ---
    {
        nlohmann::ordered_json manifest;
        manifest["tool"] = "proxyprobe";
        manifest["inputs"]["traces"] = {{"path", traces_path},
                                        {"keccak256", digest_hex(traces_digest)}};
        manifest["inputs"]["contracts"] = {{"path", contracts_path},
                                           {"keccak256", digest_hex(contracts_digest)}};
        manifest["params"]["strict"] = opts.strict;
        manifest["counts"] = {{"trace_lines_accepted", stats.trace_lines_accepted},
                              {"trace_line_errors", stats.trace_line_errors},
                              {"transactions", stats.transactions},
                              {"quarantined_transactions", stats.quarantined_transactions},
                              {"traces_indexed", stats.traces_indexed},
                              {"contracts", stats.contracts},
                              {"contract_duplicates", stats.contract_duplicates},
                              {"contract_line_errors", stats.contract_line_errors}};
        for (const char* name : {"traces.jsonl", "contracts.jsonl", "quarantine.jsonl", "errors.jsonl"})
            manifest["outputs"][name] =
                digest_hex(file_digest((fs::path(out_dir) / name).string()));
        write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    }

    fs::remove_all(tmp_dir);
    return stats;
}

}  // namespace proxyprobe::ingest

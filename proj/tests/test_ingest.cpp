// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "proxyprobe/corpus.hpp"
#include "proxyprobe/ingest.hpp"

using namespace proxyprobe;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("pp_ingest_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string trace_line(const std::string& tx_suffix, const std::string& trace_addr,
                       const std::string& from, const std::string& to,
                       const std::string& call_type, const std::string& input,
                       uint64_t block = 100, const std::string& ts = "2021-03-01T00:00:00Z",
                       int status = 1) {
    std::string tx = "0x";
    tx += std::string(64 - tx_suffix.size(), '0');
    tx += tx_suffix;
    return "{\"transaction_hash\":\"" + tx + "\",\"trace_address\":\"" + trace_addr +
           "\",\"from_address\":\"" + from + "\",\"to_address\":\"" + to +
           "\",\"call_type\":\"" + call_type + "\",\"input\":\"" + input +
           "\",\"output\":\"0x\",\"gas_used\":\"21000\",\"status\":" + std::to_string(status) +
           ",\"value\":\"0\",\"block_number\":" + std::to_string(block) +
           ",\"block_timestamp\":\"" + ts + "\"}";
}

std::string addr_hex(int i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "0x%040x", i);
    return buf;
}

std::string contract_line(const std::string& addr, const std::string& code = "0x60006000f3",
                          const std::string& ts = "2021-01-01T00:00:00Z", uint64_t block = 1) {
    return "{\"address\":\"" + addr + "\",\"bytecode\":\"" + code + "\",\"block_timestamp\":\"" +
           ts + "\",\"block_number\":" + std::to_string(block) +
           ",\"transaction_hash\":\"0x" + std::string(64, '1') + "\"}";
}

}  // namespace

TEST_CASE("well-formed delegatecall line round-trips") {
    std::vector<jsonl::Field> scratch;
    TraceRecord rec;
    std::string err;
    const std::string line =
        trace_line("aa", "0.1", addr_hex(1), addr_hex(2), "delegatecall", "0xa9059cbb00ff");
    REQUIRE(ingest::parse_trace_jsonl(line, scratch, rec, err));
    CHECK(rec.call_type == CallType::DelegateCall);
    CHECK(rec.trace_address == TraceAddress{0, 1});
    CHECK(rec.from.str() == addr_hex(1));
    CHECK(rec.input.size() == 6);
    CHECK(rec.gas_used == 21000);
    CHECK(rec.status);

    std::string serialized;
    ingest::append_trace_jsonl(serialized, rec);
    TraceRecord again;
    REQUIRE(ingest::parse_trace_jsonl(serialized, scratch, again, err));
    std::string reserialized;
    ingest::append_trace_jsonl(reserialized, again);
    CHECK(serialized == reserialized);
}

TEST_CASE("unknown call type is rejected with line number") {
    const auto dir = temp_dir("badcalltype");
    const std::string traces = (dir / "traces.jsonl").string();
    write_file(traces, trace_line("aa", "", addr_hex(1), addr_hex(2), "call", "0x") + "\n" +
                           trace_line("bb", "", addr_hex(1), addr_hex(2), "delegatecall2", "0x") +
                           "\n");
    write_file((dir / "contracts.jsonl").string(), contract_line(addr_hex(2)) + "\n");
    const auto stats = ingest::run(traces, (dir / "contracts.jsonl").string(),
                                   (dir / "index").string(), {});
    CHECK(stats.trace_lines_accepted == 1);
    CHECK(stats.trace_line_errors == 1);
    const std::string errors = read_file((dir / "index" / "errors.jsonl").string());
    CHECK(errors.find("\"line\":2") != std::string::npos);
    CHECK(errors.find("delegatecall2") != std::string::npos);
}

TEST_CASE("empty file ingests to an empty stream with zero errors") {
    const auto dir = temp_dir("empty");
    write_file((dir / "traces.jsonl").string(), "");
    write_file((dir / "contracts.jsonl").string(), "");
    const auto stats = ingest::run((dir / "traces.jsonl").string(),
                                   (dir / "contracts.jsonl").string(), (dir / "index").string(), {});
    CHECK(stats.trace_lines_accepted == 0);
    CHECK(stats.trace_line_errors == 0);
    CHECK(stats.transactions == 0);
}

TEST_CASE("strict mode escalates the first violation") {
    const auto dir = temp_dir("strict");
    write_file((dir / "traces.jsonl").string(),
               trace_line("aa", "", addr_hex(1), addr_hex(2), "nope", "0x") + "\n");
    write_file((dir / "contracts.jsonl").string(), "");
    ingest::Options opts;
    opts.strict = true;
    CHECK_THROWS_AS(ingest::run((dir / "traces.jsonl").string(),
                                (dir / "contracts.jsonl").string(), (dir / "index").string(), opts),
                    DataError);
}

TEST_CASE("grouping: interleaved transactions, quarantine rules") {
    const auto dir = temp_dir("grouping");
    // two interleaved txs, plus one with duplicate trace addresses, plus one
    // with no root
    std::string traces;
    traces += trace_line("01", "", addr_hex(1), addr_hex(2), "call", "0x", 100) + "\n";
    traces += trace_line("02", "", addr_hex(3), addr_hex(4), "call", "0x", 101) + "\n";
    traces += trace_line("01", "0", addr_hex(2), addr_hex(5), "call", "0x", 100) + "\n";
    traces += trace_line("02", "0", addr_hex(4), addr_hex(6), "call", "0x", 101) + "\n";
    traces += trace_line("03", "", addr_hex(1), addr_hex(2), "call", "0x", 102) + "\n";
    traces += trace_line("03", "0", addr_hex(2), addr_hex(5), "call", "0x", 102) + "\n";
    traces += trace_line("03", "0", addr_hex(2), addr_hex(6), "call", "0x", 102) + "\n";  // dup
    traces += trace_line("04", "0", addr_hex(2), addr_hex(5), "call", "0x", 103) + "\n";  // no root
    write_file((dir / "traces.jsonl").string(), traces);
    write_file((dir / "contracts.jsonl").string(), contract_line(addr_hex(2)) + "\n");
    const auto stats = ingest::run((dir / "traces.jsonl").string(),
                                   (dir / "contracts.jsonl").string(), (dir / "index").string(), {});
    CHECK(stats.transactions == 2);
    CHECK(stats.traces_indexed == 4);
    CHECK(stats.quarantined_transactions == 2);

    // each quarantined transaction appears exactly once
    const std::string quarantine = read_file((dir / "index" / "quarantine.jsonl").string());
    size_t lines = 0;
    for (const char c : quarantine) lines += c == '\n';
    CHECK(lines == 2);
    CHECK(quarantine.find("duplicate trace_address") != std::string::npos);
    CHECK(quarantine.find("no root trace") != std::string::npos);

    // groups stream complete, in (block, tx) order
    Corpus corpus = Corpus::open((dir / "index").string());
    std::vector<size_t> sizes;
    corpus.for_each_group([&](const TxGroup& g) { sizes.push_back(g.traces.size()); });
    CHECK(sizes == std::vector<size_t>{2, 2});
}

TEST_CASE("contract duplicates resolve to the earliest created_at") {
    const auto dir = temp_dir("dups");
    write_file((dir / "traces.jsonl").string(), "");
    std::string contracts;
    contracts += contract_line(addr_hex(7), "0x01", "2021-06-01T00:00:00Z", 60) + "\n";
    contracts += contract_line(addr_hex(7), "0x02", "2021-01-01T00:00:00Z", 10) + "\n";
    contracts += contract_line(addr_hex(8), "0x03", "2021-02-01T00:00:00Z", 20) + "\n";
    write_file((dir / "contracts.jsonl").string(), contracts);
    const auto stats = ingest::run((dir / "traces.jsonl").string(),
                                   (dir / "contracts.jsonl").string(), (dir / "index").string(), {});
    CHECK(stats.contracts == 2);
    CHECK(stats.contract_duplicates == 1);
    Corpus corpus = Corpus::open((dir / "index").string());
    const auto lookup = corpus.load_contracts();
    REQUIRE(lookup.size() == 2);
    const auto* rec = lookup.find(*Address::parse(addr_hex(7)));
    REQUIRE(rec != nullptr);
    CHECK(rec->bytecode.str() == "0x02");  // the earliest one
    CHECK_FALSE(lookup.is_contract(*Address::parse(addr_hex(9))));  // miss = EOA
}

TEST_CASE("csv dialect with identical headers is accepted") {
    const auto dir = temp_dir("csv");
    std::string csv =
        "transaction_hash,trace_address,from_address,to_address,call_type,input,output,"
        "gas_used,status,value,block_number,block_timestamp\n";
    csv += "0x" + std::string(64, 'a') + ",,";
    csv += addr_hex(1) + "," + addr_hex(2) + ",delegatecall,0xa9059cbb,0x,5000,1,0,7,";
    csv += "\"2021-03-01 00:00:00 UTC\"\n";
    write_file((dir / "traces.csv").string(), csv);
    write_file((dir / "contracts.csv").string(),
               "address,bytecode,block_timestamp,block_number,transaction_hash\n" + addr_hex(2) +
                   ",0x6001,2021-01-01T00:00:00Z,3,0x" + std::string(64, 'b') + "\n");
    const auto stats = ingest::run((dir / "traces.csv").string(), (dir / "contracts.csv").string(),
                                   (dir / "index").string(), {});
    CHECK(stats.trace_lines_accepted == 1);
    CHECK(stats.contracts == 1);
    Corpus corpus = Corpus::open((dir / "index").string());
    size_t groups = 0;
    corpus.for_each_group([&](const TxGroup& g) {
        ++groups;
        CHECK(g.traces.front().call_type == CallType::DelegateCall);
        CHECK(g.traces.front().block_number == 7);
    });
    CHECK(groups == 1);
}

TEST_CASE("ingest twice yields identical index artifacts") {
    const auto dir = temp_dir("determinism");
    oracle::Rng rng(42);
    std::string traces;
    for (int i = 0; i < 200; ++i) {
        const int tx = static_cast<int>(rng.below(50));
        char suffix[8];
        std::snprintf(suffix, sizeof(suffix), "%02x", tx);
        const std::string trace_addr = i % 4 == 0 ? "" : std::to_string(rng.below(3));
        traces += trace_line(suffix, trace_addr, addr_hex(static_cast<int>(rng.below(9))),
                             addr_hex(static_cast<int>(rng.below(9))), "call", "0x",
                             100 + static_cast<uint64_t>(tx)) +
                  "\n";
    }
    write_file((dir / "traces.jsonl").string(), traces);
    write_file((dir / "contracts.jsonl").string(), contract_line(addr_hex(1)) + "\n");

    auto digests = [&](const std::string& out) {
        ingest::Options opts;
        ingest::run((dir / "traces.jsonl").string(), (dir / "contracts.jsonl").string(), out, opts);
        return std::make_pair(digest_hex(file_digest(out + "/traces.jsonl")),
                              digest_hex(file_digest(out + "/contracts.jsonl")));
    };
    const auto first = digests((dir / "index1").string());
    const auto second = digests((dir / "index2").string());
    CHECK(first == second);

    // sum of group sizes equals accepted line count
    Corpus corpus = Corpus::open((dir / "index1").string());
    size_t total = 0;
    corpus.for_each_group([&](const TxGroup& g) { total += g.traces.size(); });
    const auto manifest = corpus.manifest();
    CHECK(total == manifest["counts"]["traces_indexed"].get<size_t>());
}

TEST_CASE("worker count and memory budget do not change the index bytes") {
    const auto dir = temp_dir("workers");
    oracle::Rng rng(77);
    std::string traces;
    for (int i = 0; i < 3000; ++i) {
        char suffix[12];
        std::snprintf(suffix, sizeof(suffix), "%03x", static_cast<int>(rng.below(800)));
        const std::string trace_addr = i % 3 == 0 ? "" : std::to_string(rng.below(4));
        traces += trace_line(suffix, trace_addr, addr_hex(static_cast<int>(rng.below(20))),
                             addr_hex(static_cast<int>(rng.below(20))), "call",
                             "0xdeadbeef" + std::string(static_cast<size_t>(rng.below(40)) * 2, 'e'),
                             1000 + rng.below(100)) +
                  "\n";
    }
    write_file((dir / "traces.jsonl").string(), traces);
    write_file((dir / "contracts.jsonl").string(), contract_line(addr_hex(3)) + "\n");

    auto digest_with = [&](const std::string& out, unsigned workers, uint64_t budget) {
        ingest::Options opts;
        opts.workers = workers;
        opts.mem_budget_bytes = budget;
        ingest::run((dir / "traces.jsonl").string(), (dir / "contracts.jsonl").string(), out, opts);
        return digest_hex(file_digest(out + "/traces.jsonl"));
    };
    const auto one = digest_with((dir / "w1").string(), 1, 512ull << 20);
    const auto eight = digest_with((dir / "w8").string(), 8, 512ull << 20);
    const auto tiny = digest_with((dir / "tiny").string(), 4, 64 << 10);  // forces spills
    CHECK(one == eight);
    CHECK(one == tiny);
}

TEST_CASE("missing input file aborts") {
    const auto dir = temp_dir("missing");
    write_file((dir / "contracts.jsonl").string(), "");
    CHECK_THROWS_AS(ingest::run((dir / "nope.jsonl").string(), (dir / "contracts.jsonl").string(),
                                (dir / "index").string(), {}),
                    IoError);
}

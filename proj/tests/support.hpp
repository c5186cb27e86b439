// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared helpers for tests that need a real on-disk corpus.

#include <filesystem>
#include <string>
#include <vector>

#include "proxyprobe/corpus.hpp"
#include "proxyprobe/ingest.hpp"

namespace test_support {

namespace fs = std::filesystem;

inline fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("pp_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Serializes the records, runs the real ingest, and opens the index.
inline proxyprobe::Corpus make_corpus(const std::string& name,
                                      const std::vector<proxyprobe::TraceRecord>& traces,
                                      const std::vector<proxyprobe::ContractRecord>& contracts) {
    const auto dir = fresh_dir(name);
    {
        proxyprobe::FileWriter w((dir / "traces.jsonl").string());
        std::string buf;
        for (const auto& t : traces) {
            buf.clear();
            proxyprobe::ingest::append_trace_jsonl(buf, t);
            buf += '\n';
            w.write(buf);
        }
        w.close();
    }
    {
        proxyprobe::FileWriter w((dir / "contracts.jsonl").string());
        std::string buf;
        for (const auto& c : contracts) {
            buf.clear();
            proxyprobe::ingest::append_contract_jsonl(buf, c);
            buf += '\n';
            w.write(buf);
        }
        w.close();
    }
    proxyprobe::ingest::run((dir / "traces.jsonl").string(), (dir / "contracts.jsonl").string(),
                            (dir / "index").string(), {});
    return proxyprobe::Corpus::open((dir / "index").string());
}

}  // namespace test_support

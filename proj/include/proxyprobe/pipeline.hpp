// SPDX-License-Identifier: Apache-2.0
#pragma once

// End-to-end pipeline: ingest -> graph -> detect -> lineage -> contexts ->
// catalog -> classify -> stats, with one run manifest. Stages whose inputs
// and outputs are unchanged (by digest) are skipped. The manifest holds
// provenance only; wall-clock times go to a sibling timings file so reruns
// and different worker counts produce byte-identical manifests.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyprobe/classify.hpp"
#include "proxyprobe/context.hpp"
#include "proxyprobe/corpus.hpp"
#include "proxyprobe/detector.hpp"
#include "proxyprobe/ingest.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/lineage.hpp"
#include "proxyprobe/series.hpp"
#include "proxyprobe/stats.hpp"
#include "proxyprobe/tracegraph.hpp"

namespace proxyprobe::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "proxyprobe 0.1.0";

struct Config {
    std::string traces_path;
    std::string contracts_path;
    std::string out_dir;
    std::string state_fixtures;  // optional: fixture-backed state reader
    std::string ground_truth;    // optional: detection scoring input
    bool strict = false;
    unsigned workers = 1;
    uint64_t mem_budget_mb = 512;
};

// Simple key = value format; '#' starts a comment.
inline Config parse_config_file(const std::string& path) {
    Config cfg;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "traces") cfg.traces_path = value;
        else if (key == "contracts") cfg.contracts_path = value;
        else if (key == "out") cfg.out_dir = value;
        else if (key == "state_fixtures") cfg.state_fixtures = value;
        else if (key == "ground_truth") cfg.ground_truth = value;
        else if (key == "strict") cfg.strict = value == "1" || value == "true";
        else if (key == "workers") cfg.workers = static_cast<unsigned>(std::stoul(value));
        else if (key == "mem_budget_mb") cfg.mem_budget_mb = std::stoull(value);
        else throw DataError("unknown config key: " + key);
    }
    if (cfg.traces_path.empty() || cfg.contracts_path.empty())
        throw DataError("config must set traces and contracts");
    return cfg;
}

struct RunResult {
    bool ok = true;
    std::string failed_stage;
    std::string error;
};

namespace detail {

class Runner {
  public:
    Runner(const Config& cfg) : cfg_(cfg) {
        fs::create_directories(cfg_.out_dir);
        fs::create_directories(out("reports"));
        const std::string manifest_path = out("run.manifest.json");
        if (fs::exists(manifest_path)) {
            auto parsed = nlohmann::json::parse(read_file(manifest_path), nullptr, false);
            if (!parsed.is_discarded()) previous_ = parsed;
        }
        manifest_["tool"] = kToolVersion;
        manifest_["params"] = {{"strict", cfg_.strict}};
        manifest_["stages"] = nlohmann::ordered_json::array();
        timings_["stages"] = nlohmann::ordered_json::object();
    }

    std::string out(const std::string& rel) const {
        return (fs::path(cfg_.out_dir) / rel).string();
    }

    // Runs `body` unless the previous manifest shows identical inputs and
    // intact outputs. Returns false when the stage failed.
    template <typename Body>
    bool stage(const std::string& name, const std::map<std::string, std::string>& inputs,
               const std::vector<std::string>& outputs, Body&& body) {
        nlohmann::ordered_json record;
        record["name"] = name;
        record["inputs"] = inputs;
        if (failed_) {
            record["status"] = "not-run";
            record["outputs"] = nlohmann::ordered_json::object();
            manifest_["stages"].push_back(std::move(record));
            return false;
        }
        const auto start = std::chrono::steady_clock::now();
        bool skipped = false;
        try {
            if (unchanged(name, inputs, outputs)) {
                skipped = true;
            } else {
                body();
            }
            record["status"] = "complete";
            nlohmann::ordered_json digests;
            for (const auto& rel : outputs) digests[rel] = digest_hex(file_digest(out(rel)));
            record["outputs"] = std::move(digests);
        } catch (const std::exception& e) {
            record["status"] = "failed";
            record["error"] = e.what();
            record["outputs"] = nlohmann::ordered_json::object();
            failed_ = true;
            result_.ok = false;
            result_.failed_stage = name;
            result_.error = e.what();
        }
        const auto wall =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
        timings_["stages"][name] = {{"wall_ms", wall}, {"skipped", skipped}};
        manifest_["stages"].push_back(std::move(record));
        return !failed_;
    }

    void finish() {
        write_file(out("run.manifest.json"), manifest_.dump(2) + "\n");
        write_file(out("run.timings.json"), timings_.dump(2) + "\n");
    }

    const RunResult& result() const { return result_; }

  private:
    bool unchanged(const std::string& name, const std::map<std::string, std::string>& inputs,
                   const std::vector<std::string>& outputs) {
        if (!previous_.contains("stages")) return false;
        for (const auto& stage : previous_["stages"]) {
            if (stage.value("name", "") != name) continue;
            if (stage.value("status", "") != "complete") return false;
            nlohmann::json want(inputs);
            if (stage.value("inputs", nlohmann::json::object()) != want) return false;
            const auto& recorded = stage.value("outputs", nlohmann::json::object());
            for (const auto& rel : outputs) {
                if (!recorded.contains(rel)) return false;
                if (!fs::exists(out(rel))) return false;
                if (digest_hex(file_digest(out(rel))) != recorded[rel].get<std::string>())
                    return false;
            }
            return true;
        }
        return false;
    }

    Config cfg_;
    nlohmann::ordered_json manifest_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json timings_ = nlohmann::ordered_json::object();
    nlohmann::json previous_ = nlohmann::json::object();
    bool failed_ = false;
    RunResult result_;
};

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

// Writes classes.csv for the given findings.
inline void classify_findings(const detector::Findings& findings, const ContractLookup& contracts,
                              classify::StateReader& reader, const classify::CodeOf& extra_code,
                              const std::string& out_path) {
    std::string csv = "proxy,impl_kind,purpose,evidence\n";
    const classify::CodeOf code_of = [&](const Address& a) -> std::optional<HexData> {
        if (const auto* rec = contracts.find(a)) return rec->bytecode;
        if (extra_code) return extra_code(a);
        return std::nullopt;
    };
    for (const auto& [addr, finding] : findings) {
        const ContractRecord* rec = contracts.find(addr);
        const HexData bytecode = rec ? rec->bytecode : HexData{};
        const auto fp = classify::fingerprint(addr, bytecode, reader);
        std::vector<std::pair<Address, HexData>> logics;
        for (const auto& logic : finding.logic_targets) {
            auto code = code_of(logic);
            logics.emplace_back(logic, code ? std::move(*code) : HexData{});
        }
        const auto verdict = classify::classify_purpose(addr, bytecode, logics, reader, code_of);
        std::string evidence;
        if (fp.status == classify::FingerprintResult::Status::Classified)
            evidence = fp.evidence;
        else
            evidence = "deferred: " + fp.deferred_probe;
        for (const auto& step : verdict.evidence) {
            evidence += "; ";
            evidence += step;
        }
        csv += addr.str();
        csv += ',';
        csv += fp.status == classify::FingerprintResult::Status::Classified
                   ? std::string(impl_kind_str(fp.kind))
                   : std::string("deferred");
        csv += ',';
        csv += purpose_str(verdict.purpose);
        csv += ',';
        csv += detail::csv_quote(evidence);
        csv += '\n';
    }
    write_file(out_path, csv);
}

inline std::string ccdf_csv(const std::vector<stats::CcdfPoint>& points) {
    std::string out = "threshold,fraction\n";
    for (const auto& p : points) {
        out += format_double(p.threshold);
        out += ',';
        out += format_double(p.fraction);
        out += '\n';
    }
    return out;
}

// Ground-truth CSV: header address,label with label in {proxy, other}.
inline std::map<Address, detector::TruthLabel> read_ground_truth(const std::string& path) {
    std::map<Address, detector::TruthLabel> out;
    LineReader reader(path);
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("address", 0) == 0) continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("bad ground truth line " + std::to_string(reader.line_number()));
        auto addr = Address::parse(line.substr(0, comma));
        const std::string label = line.substr(comma + 1);
        if (!addr || (label != "proxy" && label != "other"))
            throw DataError("bad ground truth line " + std::to_string(reader.line_number()));
        out[*addr] = label == "proxy" ? detector::TruthLabel::Proxy : detector::TruthLabel::Other;
    }
    return out;
}

inline nlohmann::ordered_json detection_report_json(const detector::DetectionReport& report) {
    auto metrics = [](const detector::ClassMetrics& m) {
        return nlohmann::ordered_json{{"tp", m.tp},
                                      {"fp", m.fp},
                                      {"fn", m.fn},
                                      {"tn", m.tn},
                                      {"precision", m.precision},
                                      {"recall", m.recall},
                                      {"f1", m.f1},
                                      {"degenerate_precision", m.degenerate_precision}};
    };
    nlohmann::ordered_json j;
    j["proxy"] = metrics(report.proxy);
    j["other"] = metrics(report.other);
    nlohmann::ordered_json missing = nlohmann::ordered_json::array();
    for (const auto& a : report.missing_from_corpus) missing.push_back(a.str());
    j["missing_from_corpus"] = std::move(missing);
    return j;
}

inline RunResult run_pipeline(const Config& cfg) {
    detail::Runner runner(cfg);
    const std::string index_dir = runner.out("index");

    // --- ingest ---
    const std::string traces_digest = digest_hex(file_digest(cfg.traces_path));
    const std::string contracts_digest = digest_hex(file_digest(cfg.contracts_path));
    runner.stage(
        "ingest", {{"traces", traces_digest}, {"contracts", contracts_digest}},
        {"index/traces.jsonl", "index/contracts.jsonl", "index/quarantine.jsonl",
         "index/errors.jsonl", "index/manifest.json"},
        [&] {
            ingest::Options opts;
            opts.strict = cfg.strict;
            opts.workers = cfg.workers;
            opts.mem_budget_bytes = cfg.mem_budget_mb << 20;
            ingest::run(cfg.traces_path, cfg.contracts_path, index_dir, opts);
        });

    // Digests of the index files drive every downstream stage.
    auto index_digest = [&](const char* rel) {
        return digest_hex(file_digest(runner.out(std::string("index/") + rel)));
    };
    std::map<std::string, std::string> index_inputs;
    if (runner.result().ok) {
        index_inputs = {{"index/traces.jsonl", index_digest("traces.jsonl")},
                        {"index/contracts.jsonl", index_digest("contracts.jsonl")}};
    }

    // --- graph ---
    runner.stage("graph", index_inputs,
                 {"reports/multi_contract_ratio.csv", "reports/multi_contract_ratio_call.csv",
                  "reports/multi_contract_ratio_callcode.csv",
                  "reports/multi_contract_ratio_staticcall.csv",
                  "reports/multi_contract_ratio_delegatecall.csv"},
                 [&] {
                     Corpus corpus = Corpus::open(index_dir);
                     const ContractLookup contracts = corpus.load_contracts();
                     tracegraph::monthly_multi_contract_ratio(corpus, contracts)
                         .write_csv(runner.out("reports/multi_contract_ratio.csv"));
                     const std::pair<CallType, const char*> kinds[] = {
                         {CallType::Call, "call"},
                         {CallType::CallCode, "callcode"},
                         {CallType::StaticCall, "staticcall"},
                         {CallType::DelegateCall, "delegatecall"}};
                     for (const auto& [type, name] : kinds)
                         tracegraph::monthly_multi_contract_ratio(corpus, contracts, type)
                             .write_csv(runner.out(std::string("reports/multi_contract_ratio_") +
                                                   name + ".csv"));
                 });

    // --- detect ---
    {
        auto inputs = index_inputs;
        if (!cfg.ground_truth.empty())
            inputs["ground_truth"] = digest_hex(file_digest(cfg.ground_truth));
        std::vector<std::string> outputs = {"proxies.jsonl", "reports/logic_ccdf.csv"};
        if (!cfg.ground_truth.empty()) outputs.push_back("reports/detection_score.json");
        runner.stage("detect", inputs, outputs, [&] {
            Corpus corpus = Corpus::open(index_dir);
            const auto findings = detector::detect_corpus(corpus, cfg.workers);
            detector::write_findings(findings, runner.out("proxies.jsonl"));
            std::string csv = "n_logics,fraction\n";
            for (const auto& row : detector::logic_per_proxy_ccdf(findings)) {
                csv += std::to_string(row.threshold);
                csv += ',';
                csv += format_double(row.fraction);
                csv += '\n';
            }
            write_file(runner.out("reports/logic_ccdf.csv"), csv);
            if (!cfg.ground_truth.empty()) {
                const ContractLookup contracts = corpus.load_contracts();
                const auto truth = read_ground_truth(cfg.ground_truth);
                const auto report = detector::score(findings, truth, contracts);
                nlohmann::ordered_json j = detection_report_json(report);
                j["inputs"] = inputs;
                write_file(runner.out("reports/detection_score.json"), j.dump(2) + "\n");
            }
        });
    }

    std::map<std::string, std::string> analysis_inputs = index_inputs;
    if (runner.result().ok && fs::exists(runner.out("proxies.jsonl")))
        analysis_inputs["proxies.jsonl"] = digest_hex(file_digest(runner.out("proxies.jsonl")));

    // --- lineage ---
    runner.stage("lineage", analysis_inputs, {"chains.jsonl"}, [&] {
        Corpus corpus = Corpus::open(index_dir);
        const ContractLookup contracts = corpus.load_contracts();
        const auto findings = detector::read_findings(runner.out("proxies.jsonl"));
        const auto creations = lineage::CreationIndex::build(corpus);
        const auto chains =
            lineage::build_chains(detector::proxy_set(findings), creations, contracts);
        lineage::write_chains(chains, runner.out("chains.jsonl"));
    });

    // --- contexts ---
    {
        auto inputs = analysis_inputs;
        if (runner.result().ok && fs::exists(runner.out("chains.jsonl")))
            inputs["chains.jsonl"] = digest_hex(file_digest(runner.out("chains.jsonl")));
        runner.stage("contexts", inputs,
                     {"contexts.jsonl", "reports/context_counts.csv", "reports/adoption.csv",
                      "reports/utilization_all.csv", "reports/utilization_multi.csv",
                      "reports/activity_proxy.csv", "reports/activity_other.csv"},
                     [&] {
                         Corpus corpus = Corpus::open(index_dir);
                         const ContractLookup contracts = corpus.load_contracts();
                         const auto findings =
                             detector::read_findings(runner.out("proxies.jsonl"));
                         const auto creations = lineage::CreationIndex::build(corpus);
                         const auto contexts =
                             context::cluster_contexts(findings, contracts, creations);
                         context::write_contexts(contexts, runner.out("contexts.jsonl"));
                         context::monthly_context_counts(contexts).write_csv(
                             runner.out("reports/context_counts.csv"));
                         const auto proxies = detector::proxy_set(findings);
                         write_file(runner.out("reports/adoption.csv"),
                                    context::adoption_series(corpus, proxies).to_csv());
                         const auto util =
                             context::utilization_series(corpus, contracts, proxies);
                         util.all_tx.write_csv(runner.out("reports/utilization_all.csv"));
                         util.multi_contract_tx.write_csv(
                             runner.out("reports/utilization_multi.csv"));
                         const auto activity =
                             context::activity_levels(corpus, contracts, proxies);
                         auto sample_csv = [](const std::vector<std::pair<Address, uint64_t>>& s) {
                             std::string out = "address,inbound_tx_count\n";
                             for (const auto& [a, c] : s) {
                                 out += a.str();
                                 out += ',';
                                 out += std::to_string(c);
                                 out += '\n';
                             }
                             return out;
                         };
                         write_file(runner.out("reports/activity_proxy.csv"),
                                    sample_csv(activity.proxy));
                         write_file(runner.out("reports/activity_other.csv"),
                                    sample_csv(activity.non_proxy));
                     });
    }

    // --- catalog (needs context counts per signature) ---
    {
        auto inputs = analysis_inputs;
        for (const char* rel : {"chains.jsonl", "contexts.jsonl"})
            if (runner.result().ok && fs::exists(runner.out(rel)))
                inputs[rel] = digest_hex(file_digest(runner.out(rel)));
        runner.stage("catalog", inputs, {"reports/patterns.csv"}, [&] {
            const auto chains = lineage::read_chains(runner.out("chains.jsonl"));
            const auto contexts = context::read_contexts(runner.out("contexts.jsonl"));
            std::map<Address, std::string> signature_of;
            for (const auto& c : chains)
                if (c.complete) signature_of[c.proxy] = c.signature();
            std::map<std::string, uint64_t> context_counts;
            for (const auto& ctx : contexts) {
                auto it = signature_of.find(ctx.representative);
                if (it != signature_of.end()) ++context_counts[it->second];
            }
            write_file(runner.out("reports/patterns.csv"),
                       lineage::patterns_csv(lineage::pattern_catalog(chains, context_counts)));
        });
    }

    // --- classify ---
    {
        auto inputs = analysis_inputs;
        const bool configured = !cfg.state_fixtures.empty();
        if (configured)
            inputs["state_fixtures"] = digest_hex(file_digest(cfg.state_fixtures));
        if (configured) {
            runner.stage("classify", inputs, {"classes.csv"}, [&] {
                Corpus corpus = Corpus::open(index_dir);
                const ContractLookup contracts = corpus.load_contracts();
                const auto findings = detector::read_findings(runner.out("proxies.jsonl"));
                auto reader = classify::FixtureStateReader::load(cfg.state_fixtures);
                const classify::CodeOf fixture_code = [&](const Address& a) {
                    return reader.bytecode_of(a);
                };
                classify_findings(findings, contracts, reader, fixture_code,
                                  runner.out("classes.csv"));
            });
        }
    }

    // --- stats ---
    {
        auto inputs = analysis_inputs;
        for (const char* rel : {"chains.jsonl", "contexts.jsonl"})
            if (runner.result().ok && fs::exists(runner.out(rel)))
                inputs[rel] = digest_hex(file_digest(runner.out(rel)));
        runner.stage(
            "stats", inputs,
            {"reports/activity_stats.json", "reports/context_size_stats.json",
             "reports/gas_contexts.csv", "reports/gas_stats.json",
             "reports/activity_ccdf_proxy.csv", "reports/activity_ccdf_other.csv",
             "reports/context_size_ccdf_onchain.csv", "reports/context_size_ccdf_offchain.csv"},
            [&] {
                Corpus corpus = Corpus::open(index_dir);
                const ContractLookup contracts = corpus.load_contracts();
                const auto findings = detector::read_findings(runner.out("proxies.jsonl"));
                const auto proxies = detector::proxy_set(findings);
                const auto creations = lineage::CreationIndex::build(corpus);
                const auto contexts = context::read_contexts(runner.out("contexts.jsonl"));
                const auto chains = lineage::read_chains(runner.out("chains.jsonl"));

                // activity level comparison
                const auto activity = context::activity_levels(corpus, contracts, proxies);
                const auto proxy_counts = activity.proxy_counts();
                const auto other_counts = activity.non_proxy_counts();
                nlohmann::ordered_json aj;
                aj["inputs"] = inputs;
                if (!proxy_counts.empty() && !other_counts.empty()) {
                    const auto mwu = stats::mann_whitney_one_tailed(proxy_counts, other_counts);
                    const auto delta = stats::cliffs_delta(proxy_counts, other_counts);
                    aj["mann_whitney"] = {{"u", mwu.u},
                                          {"p_value", mwu.p_value},
                                          {"greater", mwu.greater},
                                          {"exact", mwu.exact},
                                          {"degenerate", mwu.degenerate}};
                    aj["cliffs_delta"] = {{"delta", delta.delta},
                                          {"magnitude", delta_magnitude_str(delta.magnitude)}};
                    write_file(runner.out("reports/activity_ccdf_proxy.csv"),
                               ccdf_csv(stats::ccdf(proxy_counts)));
                    write_file(runner.out("reports/activity_ccdf_other.csv"),
                               ccdf_csv(stats::ccdf(other_counts)));
                } else {
                    aj["note"] = "a sample is empty";
                    write_file(runner.out("reports/activity_ccdf_proxy.csv"),
                               "threshold,fraction\n");
                    write_file(runner.out("reports/activity_ccdf_other.csv"),
                               "threshold,fraction\n");
                }
                write_file(runner.out("reports/activity_stats.json"), aj.dump(2) + "\n");

                // context size per deployment style
                std::vector<double> onchain_sizes, offchain_sizes;
                uint64_t on_multi = 0, on_single = 0, off_multi = 0, off_single = 0;
                for (const auto& ctx : contexts) {
                    if (!ctx.style) continue;
                    const bool on = *ctx.style == lineage::DeployStyle::OnChain;
                    (on ? onchain_sizes : offchain_sizes)
                        .push_back(static_cast<double>(ctx.size()));
                    if (on)
                        (ctx.size() > 1 ? on_multi : on_single) += 1;
                    else
                        (ctx.size() > 1 ? off_multi : off_single) += 1;
                }
                nlohmann::ordered_json cj;
                cj["inputs"] = inputs;
                cj["counts"] = {{"onchain_multi", on_multi},
                                {"onchain_singleton", on_single},
                                {"offchain_multi", off_multi},
                                {"offchain_singleton", off_single}};
                if (!onchain_sizes.empty() && !offchain_sizes.empty()) {
                    const auto mwu =
                        stats::mann_whitney_one_tailed(onchain_sizes, offchain_sizes);
                    const auto delta = stats::cliffs_delta(onchain_sizes, offchain_sizes);
                    cj["mann_whitney"] = {{"u", mwu.u},
                                          {"p_value", mwu.p_value},
                                          {"greater", mwu.greater},
                                          {"exact", mwu.exact},
                                          {"degenerate", mwu.degenerate}};
                    cj["cliffs_delta"] = {{"delta", delta.delta},
                                          {"magnitude", delta_magnitude_str(delta.magnitude)}};
                    write_file(runner.out("reports/context_size_ccdf_onchain.csv"),
                               ccdf_csv(stats::ccdf(onchain_sizes)));
                    write_file(runner.out("reports/context_size_ccdf_offchain.csv"),
                               ccdf_csv(stats::ccdf(offchain_sizes)));
                    try {
                        const auto chi =
                            stats::chi_square_2x2(on_multi, on_single, off_multi, off_single);
                        cj["chi_square"] = {{"chi2", chi.chi2},
                                            {"p_value", chi.p_value},
                                            {"phi", chi.effect.phi},
                                            {"magnitude", phi_magnitude_str(chi.effect.magnitude)}};
                    } catch (const DataError& e) {
                        cj["chi_square"] = {{"error", e.what()}};
                    }
                } else {
                    cj["note"] = "a style sample is empty";
                    write_file(runner.out("reports/context_size_ccdf_onchain.csv"),
                               "threshold,fraction\n");
                    write_file(runner.out("reports/context_size_ccdf_offchain.csv"),
                               "threshold,fraction\n");
                }
                write_file(runner.out("reports/context_size_stats.json"), cj.dump(2) + "\n");

                // gas report
                std::map<Address, lineage::CreationChain> chains_by_proxy;
                for (const auto& c : chains) chains_by_proxy.emplace(c.proxy, c);
                const auto costs =
                    stats::deployment_cost_report(contexts, chains_by_proxy, creations, contracts);
                std::string csv =
                    "context_id,style,size_class,size,avg_gas,avg_gas_excluding_factories,"
                    "avg_bytecode_len,total_fee_wei\n";
                std::vector<double> sizes_d, code_lens;
                for (const auto& c : costs) {
                    csv += c.context_id;
                    csv += ',';
                    csv += c.style ? std::string(lineage::style_str(*c.style)) : "unknown";
                    csv += ',';
                    csv += c.singleton ? "N=1" : "N>1";
                    csv += ',';
                    csv += std::to_string(c.size);
                    csv += ',';
                    if (c.avg_gas) csv += format_double(*c.avg_gas);
                    csv += ',';
                    if (c.avg_gas_excluding_factories)
                        csv += format_double(*c.avg_gas_excluding_factories);
                    csv += ',';
                    if (c.avg_bytecode_len) csv += format_double(*c.avg_bytecode_len);
                    csv += ',';
                    if (c.total_fee_wei) csv += c.total_fee_wei->str();
                    csv += '\n';
                    if (c.avg_bytecode_len) {
                        sizes_d.push_back(static_cast<double>(c.size));
                        code_lens.push_back(*c.avg_bytecode_len);
                    }
                }
                write_file(runner.out("reports/gas_contexts.csv"), csv);
                nlohmann::ordered_json gj;
                gj["inputs"] = inputs;
                if (sizes_d.size() >= 2) {
                    const auto rho = stats::spearman(sizes_d, code_lens);
                    gj["spearman_size_vs_bytecode_len"] =
                        rho ? nlohmann::ordered_json(*rho) : nlohmann::ordered_json(nullptr);
                } else {
                    gj["spearman_size_vs_bytecode_len"] = nullptr;
                }
                write_file(runner.out("reports/gas_stats.json"), gj.dump(2) + "\n");
            });
    }

    runner.finish();
    return runner.result();
}

}  // namespace proxyprobe::pipeline

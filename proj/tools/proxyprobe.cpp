// SPDX-License-Identifier: Apache-2.0

// proxyprobe: batch analysis of Ethereum proxy contracts from transaction
// traces. Subcommands mirror the pipeline stages; `run` executes them end to
// end under one manifest.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "proxyprobe/classify.hpp"
#include "proxyprobe/context.hpp"
#include "proxyprobe/corpus.hpp"
#include "proxyprobe/detector.hpp"
#include "proxyprobe/fixturegen.hpp"
#include "proxyprobe/ingest.hpp"
#include "proxyprobe/lineage.hpp"
#include "proxyprobe/pipeline.hpp"
#include "proxyprobe/rpc_reader.hpp"
#include "proxyprobe/series.hpp"
#include "proxyprobe/stats.hpp"
#include "proxyprobe/tracegraph.hpp"

namespace pp = proxyprobe;

namespace {

int run_cli(int argc, char** argv) {
    CLI::App app{"proxyprobe: Ethereum proxy contract analysis from transaction traces"};
    app.require_subcommand(1);

    unsigned workers = 1;
    app.add_option("--workers", workers, "worker threads for parallel stages")
        ->capture_default_str();

    // ---- ingest ----
    auto* ingest_cmd = app.add_subcommand("ingest", "validate and index traces and contracts");
    std::string traces_path, contracts_path, out_dir;
    bool strict = false;
    uint64_t mem_budget_mb = 512;
    ingest_cmd->add_option("--traces", traces_path, "traces JSONL or CSV")->required();
    ingest_cmd->add_option("--contracts", contracts_path, "contracts JSONL or CSV")->required();
    ingest_cmd->add_option("--out", out_dir, "index output directory")->required();
    ingest_cmd->add_flag("--strict", strict, "abort on the first schema violation");
    ingest_cmd->add_option("--mem-budget-mb", mem_budget_mb, "external-sort memory budget");

    // ---- graph stats ----
    auto* graph_cmd = app.add_subcommand("graph", "per-transaction call graph metrics");
    graph_cmd->require_subcommand(1);
    auto* graph_stats = graph_cmd->add_subcommand("stats", "monthly multi-contract ratios");
    std::string corpus_dir, out_path, call_type_name;
    graph_stats->add_option("--corpus", corpus_dir, "ingest index directory")->required();
    graph_stats->add_option("--out", out_path, "output CSV")->required();
    graph_stats->add_option("--call-type", call_type_name,
                            "restrict to call|callcode|staticcall|delegatecall");

    // ---- detect ----
    auto* detect_cmd = app.add_subcommand("detect", "behavioral proxy detection");
    std::string detect_corpus, detect_out, gt_path, proxies_path, score_out;
    detect_cmd->add_option("--corpus", detect_corpus, "ingest index directory");
    detect_cmd->add_option("--out", detect_out, "findings JSONL");
    auto* score_cmd = detect_cmd->add_subcommand("score", "score findings against ground truth");
    score_cmd->add_option("--corpus", detect_corpus, "ingest index directory")->required();
    score_cmd->add_option("--proxies", proxies_path, "findings JSONL")->required();
    score_cmd->add_option("--ground-truth", gt_path, "CSV address,label")->required();
    score_cmd->add_option("--out", score_out, "report JSON")->required();

    // ---- lineage ----
    auto* lineage_cmd = app.add_subcommand("lineage", "creation chain mining");
    std::string lineage_corpus, lineage_proxies, lineage_out;
    lineage_cmd->add_option("--corpus", lineage_corpus, "ingest index directory");
    lineage_cmd->add_option("--proxies", lineage_proxies, "findings JSONL");
    lineage_cmd->add_option("--out", lineage_out, "chains JSONL");
    auto* catalog_cmd = lineage_cmd->add_subcommand("catalog", "creational pattern catalog");
    std::string chains_path, contexts_path, catalog_out;
    catalog_cmd->add_option("--chains", chains_path, "chains JSONL")->required();
    catalog_cmd->add_option("--contexts", contexts_path, "contexts JSONL (for context counts)");
    catalog_cmd->add_option("--out", catalog_out, "patterns CSV")->required();

    // ---- contexts ----
    auto* contexts_cmd = app.add_subcommand("contexts", "usage context clustering");
    std::string ctx_corpus, ctx_proxies, ctx_out;
    contexts_cmd->add_option("--corpus", ctx_corpus, "ingest index directory");
    contexts_cmd->add_option("--proxies", ctx_proxies, "findings JSONL");
    contexts_cmd->add_option("--out", ctx_out, "contexts JSONL");
    auto* series_cmd = contexts_cmd->add_subcommand("series", "monthly series CSVs");
    std::string series_kind, series_corpus, series_proxies, series_contexts, series_out;
    series_cmd->add_option("--kind", series_kind,
                           "counts|adoption|utilization-all|utilization-multi")
        ->required();
    series_cmd->add_option("--corpus", series_corpus, "ingest index directory");
    series_cmd->add_option("--proxies", series_proxies, "findings JSONL");
    series_cmd->add_option("--contexts", series_contexts, "contexts JSONL (for counts)");
    series_cmd->add_option("--out", series_out, "output CSV")->required();

    // ---- classify ----
    auto* classify_cmd = app.add_subcommand("classify", "fingerprint and purpose per proxy");
    std::string cls_corpus, cls_proxies, cls_state, cls_rpc, cls_out;
    classify_cmd->add_option("--corpus", cls_corpus, "ingest index directory")->required();
    classify_cmd->add_option("--proxies", cls_proxies, "findings JSONL")->required();
    classify_cmd->add_option("--state", cls_state, "state fixtures JSON");
    classify_cmd->add_option("--rpc", cls_rpc, "JSON-RPC endpoint (http://host:port)");
    classify_cmd->add_option("--out", cls_out, "classes CSV")->required();

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "statistical analyses");
    std::string stats_kind, stats_corpus, stats_proxies, stats_contexts, stats_chains, stats_out;
    stats_cmd->add_option("analysis", stats_kind, "activity|context-size|gas")->required();
    stats_cmd->add_option("--corpus", stats_corpus, "ingest index directory");
    stats_cmd->add_option("--proxies", stats_proxies, "findings JSONL");
    stats_cmd->add_option("--contexts", stats_contexts, "contexts JSONL");
    stats_cmd->add_option("--chains", stats_chains, "chains JSONL");
    stats_cmd->add_option("--out", stats_out, "report JSON")->required();

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "full pipeline under one manifest");
    std::string config_path, run_traces, run_contracts, run_out, run_state, run_gt;
    bool run_strict = false;
    run_cmd->add_option("--config", config_path, "key = value config file");
    run_cmd->add_option("--traces", run_traces, "traces file (overrides config)");
    run_cmd->add_option("--contracts", run_contracts, "contracts file");
    run_cmd->add_option("--out", run_out, "output directory");
    run_cmd->add_option("--state", run_state, "state fixtures JSON");
    run_cmd->add_option("--ground-truth", run_gt, "detection ground truth CSV");
    run_cmd->add_flag("--strict", run_strict, "abort ingest on first schema violation");

    // ---- gen-fixture ----
    auto* gen_cmd = app.add_subcommand("gen-fixture", "deterministic synthetic corpus");
    pp::fixturegen::Spec gen_spec;
    std::string gen_out;
    std::vector<std::string> gen_patterns;
    gen_cmd->add_option("--out", gen_out, "output directory")->required();
    gen_cmd->add_option("--seed", gen_spec.seed, "RNG seed")->capture_default_str();
    gen_cmd->add_option("--txs", gen_spec.target_transactions, "transaction target")
        ->capture_default_str();
    gen_cmd->add_option("--active", gen_spec.active_proxies, "active proxies")
        ->capture_default_str();
    gen_cmd->add_option("--inactive", gen_spec.inactive_proxies, "inactive proxies")
        ->capture_default_str();
    gen_cmd->add_option("--others", gen_spec.non_proxies, "non-proxy contracts")
        ->capture_default_str();
    gen_cmd->add_option("--months", gen_spec.months, "traffic span in months")
        ->capture_default_str();
    gen_cmd->add_option("--pattern", gen_patterns, "creational pattern signature (repeatable)");
    gen_cmd->add_option("--stress", gen_spec.stress_records,
                        "generate a stress corpus with this many trace records");

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
        for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    auto open_reader = [&](const std::string& state,
                           const std::string& rpc) -> std::unique_ptr<pp::classify::StateReader> {
        if (!state.empty()) {
            auto reader = std::make_unique<pp::classify::FixtureStateReader>(
                pp::classify::FixtureStateReader::load(state));
            return reader;
        }
        if (!rpc.empty()) return std::make_unique<pp::classify::RpcStateReader>(rpc);
        throw pp::DataError("classify needs --state or --rpc");
    };

    if (*ingest_cmd) {
        pp::ingest::Options opts;
        opts.strict = strict;
        opts.workers = workers;
        opts.mem_budget_bytes = mem_budget_mb << 20;
        const auto stats = pp::ingest::run(traces_path, contracts_path, out_dir, opts);
        std::printf("ingested %llu traces in %llu transactions (%llu quarantined, %llu errors)\n",
                    static_cast<unsigned long long>(stats.traces_indexed),
                    static_cast<unsigned long long>(stats.transactions),
                    static_cast<unsigned long long>(stats.quarantined_transactions),
                    static_cast<unsigned long long>(stats.trace_line_errors));
        return 0;
    }

    if (*graph_stats) {
        pp::Corpus corpus = pp::Corpus::open(corpus_dir);
        const auto contracts = corpus.load_contracts();
        std::optional<pp::CallType> filter;
        if (!call_type_name.empty()) {
            filter = pp::parse_call_type(call_type_name);
            if (!filter) throw pp::DataError("unknown call type: " + call_type_name);
        }
        pp::tracegraph::monthly_multi_contract_ratio(corpus, contracts, filter)
            .write_csv(out_path);
        return 0;
    }

    if (*score_cmd) {
        pp::Corpus corpus = pp::Corpus::open(detect_corpus);
        const auto contracts = corpus.load_contracts();
        const auto findings = pp::detector::read_findings(proxies_path);
        const auto truth = pp::pipeline::read_ground_truth(gt_path);
        const auto report = pp::detector::score(findings, truth, contracts);
        for (const auto& missing : report.missing_from_corpus)
            std::fprintf(stderr, "warning: ground-truth address missing from corpus: %s\n",
                         missing.str().c_str());
        auto j = pp::pipeline::detection_report_json(report);
        j["inputs"] = {{"corpus", corpus.traces_digest()},
                       {"proxies", pp::digest_hex(pp::file_digest(proxies_path))},
                       {"ground_truth", pp::digest_hex(pp::file_digest(gt_path))}};
        pp::write_file(score_out, j.dump(2) + "\n");
        std::printf("proxy precision %.4f recall %.4f f1 %.4f\n", report.proxy.precision,
                    report.proxy.recall, report.proxy.f1);
        return 0;
    }

    if (*detect_cmd) {
        if (detect_corpus.empty() || detect_out.empty())
            throw CLI::ValidationError("detect", "--corpus and --out are required");
        pp::Corpus corpus = pp::Corpus::open(detect_corpus);
        const auto findings = pp::detector::detect_corpus(corpus, workers);
        pp::detector::write_findings(findings, detect_out);
        std::printf("detected %zu proxies\n", findings.size());
        return 0;
    }

    if (*catalog_cmd) {
        const auto chains = pp::lineage::read_chains(chains_path);
        std::map<std::string, uint64_t> context_counts;
        if (!contexts_path.empty()) {
            const auto contexts = pp::context::read_contexts(contexts_path);
            std::map<pp::Address, std::string> signature_of;
            for (const auto& c : chains)
                if (c.complete) signature_of[c.proxy] = c.signature();
            for (const auto& ctx : contexts) {
                auto it = signature_of.find(ctx.representative);
                if (it != signature_of.end()) ++context_counts[it->second];
            }
        }
        pp::write_file(catalog_out,
                       pp::lineage::patterns_csv(pp::lineage::pattern_catalog(chains, context_counts)));
        return 0;
    }

    if (*lineage_cmd) {
        if (lineage_corpus.empty() || lineage_proxies.empty() || lineage_out.empty())
            throw CLI::ValidationError("lineage", "--corpus, --proxies and --out are required");
        pp::Corpus corpus = pp::Corpus::open(lineage_corpus);
        const auto contracts = corpus.load_contracts();
        const auto findings = pp::detector::read_findings(lineage_proxies);
        const auto creations = pp::lineage::CreationIndex::build(corpus);
        for (const auto& addr : creations.redeployed())
            std::fprintf(stderr, "warning: multiple successful creations for %s, keeping earliest\n",
                         addr.str().c_str());
        const auto chains =
            pp::lineage::build_chains(pp::detector::proxy_set(findings), creations, contracts);
        pp::lineage::write_chains(chains, lineage_out);
        size_t incomplete = 0;
        for (const auto& c : chains) incomplete += c.complete ? 0 : 1;
        std::printf("built %zu chains (%zu incomplete)\n", chains.size(), incomplete);
        return 0;
    }

    if (*series_cmd) {
        if (series_kind == "counts") {
            if (series_contexts.empty())
                throw CLI::ValidationError("contexts series", "--contexts required for counts");
            const auto contexts = pp::context::read_contexts(series_contexts);
            pp::context::monthly_context_counts(contexts).write_csv(series_out);
            return 0;
        }
        if (series_corpus.empty() || series_proxies.empty())
            throw CLI::ValidationError("contexts series", "--corpus and --proxies required");
        pp::Corpus corpus = pp::Corpus::open(series_corpus);
        const auto findings = pp::detector::read_findings(series_proxies);
        const auto proxies = pp::detector::proxy_set(findings);
        if (series_kind == "adoption") {
            pp::write_file(series_out, pp::context::adoption_series(corpus, proxies).to_csv());
        } else if (series_kind == "utilization-all" || series_kind == "utilization-multi") {
            const auto contracts = corpus.load_contracts();
            const auto util = pp::context::utilization_series(corpus, contracts, proxies);
            (series_kind == "utilization-all" ? util.all_tx : util.multi_contract_tx)
                .write_csv(series_out);
        } else {
            throw pp::DataError("unknown series kind: " + series_kind);
        }
        return 0;
    }

    if (*contexts_cmd) {
        if (ctx_corpus.empty() || ctx_proxies.empty() || ctx_out.empty())
            throw CLI::ValidationError("contexts", "--corpus, --proxies and --out are required");
        pp::Corpus corpus = pp::Corpus::open(ctx_corpus);
        const auto contracts = corpus.load_contracts();
        const auto findings = pp::detector::read_findings(ctx_proxies);
        const auto creations = pp::lineage::CreationIndex::build(corpus);
        const auto contexts = pp::context::cluster_contexts(findings, contracts, creations);
        for (const auto& ctx : contexts)
            if (!contracts.find(ctx.representative))
                std::fprintf(stderr, "warning: context %s has no contract record for %s\n",
                             ctx.id.c_str(), ctx.representative.str().c_str());
        pp::context::write_contexts(contexts, ctx_out);
        std::printf("clustered %zu proxies into %zu contexts\n", findings.size(),
                    contexts.size());
        return 0;
    }

    if (*classify_cmd) {
        pp::Corpus corpus = pp::Corpus::open(cls_corpus);
        const auto contracts = corpus.load_contracts();
        const auto findings = pp::detector::read_findings(cls_proxies);
        auto reader = open_reader(cls_state, cls_rpc);
        pp::classify::CodeOf extra;
        if (auto* fixture = dynamic_cast<pp::classify::FixtureStateReader*>(reader.get()))
            extra = [fixture](const pp::Address& a) { return fixture->bytecode_of(a); };
        pp::pipeline::classify_findings(findings, contracts, *reader, extra, cls_out);
        std::printf("classified %zu proxies\n", findings.size());
        return 0;
    }

    if (*stats_cmd) {
        if (stats_kind == "activity") {
            if (stats_corpus.empty() || stats_proxies.empty())
                throw CLI::ValidationError("stats", "activity needs --corpus and --proxies");
            pp::Corpus corpus = pp::Corpus::open(stats_corpus);
            const auto contracts = corpus.load_contracts();
            const auto findings = pp::detector::read_findings(stats_proxies);
            const auto samples = pp::context::activity_levels(corpus, contracts,
                                                              pp::detector::proxy_set(findings));
            const auto a = samples.proxy_counts();
            const auto b = samples.non_proxy_counts();
            nlohmann::ordered_json j;
            j["inputs"] = {{"corpus", corpus.traces_digest()},
                           {"proxies", pp::digest_hex(pp::file_digest(stats_proxies))}};
            if (a.empty() || b.empty()) {
                j["note"] = "a sample is empty";
            } else {
                const auto mwu = pp::stats::mann_whitney_one_tailed(a, b);
                const auto delta = pp::stats::cliffs_delta(a, b);
                j["mann_whitney"] = {{"u", mwu.u},
                                     {"p_value", mwu.p_value},
                                     {"greater", mwu.greater},
                                     {"exact", mwu.exact},
                                     {"degenerate", mwu.degenerate}};
                j["cliffs_delta"] = {{"delta", delta.delta},
                                     {"magnitude", delta_magnitude_str(delta.magnitude)}};
            }
            pp::write_file(stats_out, j.dump(2) + "\n");
            return 0;
        }
        if (stats_kind == "context-size") {
            if (stats_contexts.empty())
                throw CLI::ValidationError("stats", "context-size needs --contexts");
            const auto contexts = pp::context::read_contexts(stats_contexts);
            std::vector<double> on, off;
            uint64_t on_multi = 0, on_single = 0, off_multi = 0, off_single = 0;
            for (const auto& ctx : contexts) {
                if (!ctx.style) continue;
                const bool is_on = *ctx.style == pp::lineage::DeployStyle::OnChain;
                (is_on ? on : off).push_back(static_cast<double>(ctx.size()));
                if (is_on)
                    (ctx.size() > 1 ? on_multi : on_single) += 1;
                else
                    (ctx.size() > 1 ? off_multi : off_single) += 1;
            }
            nlohmann::ordered_json j;
            j["inputs"] = {{"contexts", pp::digest_hex(pp::file_digest(stats_contexts))}};
            j["counts"] = {{"onchain_multi", on_multi},
                           {"onchain_singleton", on_single},
                           {"offchain_multi", off_multi},
                           {"offchain_singleton", off_single}};
            if (!on.empty() && !off.empty()) {
                const auto mwu = pp::stats::mann_whitney_one_tailed(on, off);
                const auto delta = pp::stats::cliffs_delta(on, off);
                j["mann_whitney"] = {{"u", mwu.u}, {"p_value", mwu.p_value},
                                     {"greater", mwu.greater}, {"exact", mwu.exact},
                                     {"degenerate", mwu.degenerate}};
                j["cliffs_delta"] = {{"delta", delta.delta},
                                     {"magnitude", delta_magnitude_str(delta.magnitude)}};
                try {
                    const auto chi =
                        pp::stats::chi_square_2x2(on_multi, on_single, off_multi, off_single);
                    j["chi_square"] = {{"chi2", chi.chi2},
                                       {"p_value", chi.p_value},
                                       {"phi", chi.effect.phi},
                                       {"magnitude", phi_magnitude_str(chi.effect.magnitude)}};
                } catch (const pp::DataError& e) {
                    j["chi_square"] = {{"error", e.what()}};
                }
            }
            pp::write_file(stats_out, j.dump(2) + "\n");
            return 0;
        }
        if (stats_kind == "gas") {
            if (stats_corpus.empty() || stats_contexts.empty() || stats_chains.empty())
                throw CLI::ValidationError("stats", "gas needs --corpus, --contexts, --chains");
            pp::Corpus corpus = pp::Corpus::open(stats_corpus);
            const auto contracts = corpus.load_contracts();
            const auto creations = pp::lineage::CreationIndex::build(corpus);
            const auto contexts = pp::context::read_contexts(stats_contexts);
            const auto chains = pp::lineage::read_chains(stats_chains);
            std::map<pp::Address, pp::lineage::CreationChain> by_proxy;
            for (const auto& c : chains) by_proxy.emplace(c.proxy, c);
            const auto costs =
                pp::stats::deployment_cost_report(contexts, by_proxy, creations, contracts);
            nlohmann::ordered_json j;
            j["inputs"] = {{"corpus", corpus.traces_digest()},
                           {"contexts", pp::digest_hex(pp::file_digest(stats_contexts))},
                           {"chains", pp::digest_hex(pp::file_digest(stats_chains))}};
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& c : costs) {
                nlohmann::ordered_json e;
                e["context_id"] = c.context_id;
                e["style"] = c.style ? std::string(pp::lineage::style_str(*c.style)) : "unknown";
                e["size_class"] = c.singleton ? "N=1" : "N>1";
                e["size"] = c.size;
                if (c.avg_gas) e["avg_gas"] = *c.avg_gas;
                if (c.avg_gas_excluding_factories)
                    e["avg_gas_excluding_factories"] = *c.avg_gas_excluding_factories;
                if (c.avg_bytecode_len) e["avg_bytecode_len"] = *c.avg_bytecode_len;
                if (c.total_fee_wei) e["total_fee_wei"] = c.total_fee_wei->str();
                arr.push_back(std::move(e));
            }
            j["contexts"] = std::move(arr);
            pp::write_file(stats_out, j.dump(2) + "\n");
            return 0;
        }
        throw pp::DataError("unknown analysis: " + stats_kind);
    }

    if (*run_cmd) {
        pp::pipeline::Config cfg;
        if (!config_path.empty()) cfg = pp::pipeline::parse_config_file(config_path);
        if (!run_traces.empty()) cfg.traces_path = run_traces;
        if (!run_contracts.empty()) cfg.contracts_path = run_contracts;
        if (!run_out.empty()) cfg.out_dir = run_out;
        if (!run_state.empty()) cfg.state_fixtures = run_state;
        if (!run_gt.empty()) cfg.ground_truth = run_gt;
        if (run_strict) cfg.strict = true;
        cfg.workers = workers;
        if (cfg.out_dir.empty()) throw pp::DataError("run needs --out (or out= in config)");
        const auto result = pp::pipeline::run_pipeline(cfg);
        if (!result.ok) {
            std::fprintf(stderr, "stage %s failed: %s\n", result.failed_stage.c_str(),
                         result.error.c_str());
            return 2;
        }
        std::printf("pipeline complete, manifest at %s/run.manifest.json\n", cfg.out_dir.c_str());
        return 0;
    }

    if (*gen_cmd) {
        if (!gen_patterns.empty()) gen_spec.patterns = gen_patterns;
        pp::fixturegen::generate(gen_spec, gen_out);
        std::printf("fixture written to %s\n", gen_out.c_str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const pp::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const pp::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}

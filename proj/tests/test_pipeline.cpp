// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "proxyprobe/fixturegen.hpp"
#include "proxyprobe/pipeline.hpp"
#include "support.hpp"

using namespace proxyprobe;
namespace fs = std::filesystem;

namespace {

// One small fixture shared by the tests in this file.
struct SmallFixture {
    fs::path dir;
    SmallFixture() {
        dir = test_support::fresh_dir("pipeline_fixture");
        fixturegen::Spec spec;
        spec.seed = 7;
        spec.target_transactions = 260;
        spec.active_proxies = 6;
        spec.inactive_proxies = 3;
        spec.non_proxies = 12;
        spec.months = 4;
        fixturegen::generate(spec, dir.string());
    }
};

const SmallFixture& small_fixture() {
    static SmallFixture fixture;
    return fixture;
}

pipeline::Config config_for(const fs::path& fixture, const fs::path& out) {
    pipeline::Config cfg;
    cfg.traces_path = (fixture / "traces.jsonl").string();
    cfg.contracts_path = (fixture / "contracts.jsonl").string();
    cfg.out_dir = out.string();
    cfg.state_fixtures = (fixture / "state_fixtures.json").string();
    cfg.ground_truth = (fixture / "ground_truth.csv").string();
    return cfg;
}

}  // namespace

TEST_CASE("gen-fixture: the same seed is byte-identical, seeds differ") {
    const auto a = test_support::fresh_dir("gen_a");
    const auto b = test_support::fresh_dir("gen_b");
    const auto c = test_support::fresh_dir("gen_c");
    fixturegen::Spec spec;
    spec.seed = 11;
    spec.target_transactions = 150;
    spec.active_proxies = 4;
    spec.inactive_proxies = 2;
    spec.non_proxies = 8;
    spec.months = 3;
    fixturegen::generate(spec, a.string());
    fixturegen::generate(spec, b.string());
    spec.seed = 12;
    fixturegen::generate(spec, c.string());
    for (const char* name : {"traces.jsonl", "contracts.jsonl", "ground_truth.csv",
                             "state_fixtures.json", "plants.json"}) {
        CHECK(file_digest((a / name).string()) == file_digest((b / name).string()));
    }
    CHECK(file_digest((a / "traces.jsonl").string()) !=
          file_digest((c / "traces.jsonl").string()));
}

TEST_CASE("gen-fixture rejects infeasible pattern specs") {
    fixturegen::Spec spec;
    spec.patterns = {"EOA > XX > P"};
    CHECK_THROWS_AS(fixturegen::Generator(spec), DataError);
    fixturegen::Spec deep;
    deep.patterns = {[] {
        std::string s = "EOA";
        for (int i = 0; i < 33; ++i) s += " > FA";
        return s + " > P";
    }()};
    CHECK_THROWS_AS(fixturegen::Generator(deep), DataError);
    fixturegen::Spec no_proxy;
    no_proxy.patterns = {"EOA > FA"};
    CHECK_THROWS_AS(fixturegen::Generator(no_proxy), DataError);
}

TEST_CASE("full pipeline on the small fixture") {
    const auto& fixture = small_fixture();
    const auto out = test_support::fresh_dir("pipeline_run");
    const auto result = pipeline::run_pipeline(config_for(fixture.dir, out));
    REQUIRE(result.ok);

    const auto manifest = nlohmann::json::parse(read_file((out / "run.manifest.json").string()));
    for (const auto& stage : manifest["stages"]) CHECK(stage["status"] == "complete");

    // detection matches the planted ground truth exactly
    const auto plants = nlohmann::json::parse(read_file((fixture.dir / "plants.json").string()));
    const auto findings = detector::read_findings((out / "proxies.jsonl").string());
    std::set<std::string> detected;
    for (const auto& [addr, f] : findings) detected.insert(addr.str());
    std::set<std::string> expected;
    for (const auto& a : plants["expected_detected"]) expected.insert(a.get<std::string>());
    CHECK(detected == expected);

    // detection score: precision 1, recall actives/(actives+inactives)
    const auto score =
        nlohmann::json::parse(read_file((out / "reports" / "detection_score.json").string()));
    CHECK(score["proxy"]["precision"].get<double>() == 1.0);
    CHECK(score["proxy"]["tp"].get<int>() == 6);
    CHECK(score["proxy"]["fn"].get<int>() == 3);
    CHECK(score["proxy"]["fp"].get<int>() == 0);

    // the planted monthly ratios equal the computed graph series
    {
        Corpus corpus = Corpus::open((out / "index").string());
        const auto contracts = corpus.load_contracts();
        const auto series = tracegraph::monthly_multi_contract_ratio(corpus, contracts);
        for (const auto& [month, entry] : series.entries) {
            const auto& m = plants["monthly"][month.str()];
            CHECK(entry.denominator == m["txs"].get<uint64_t>());
            CHECK(entry.numerator == m["multi"].get<uint64_t>());
        }
        const auto delegate_series = tracegraph::monthly_multi_contract_ratio(
            corpus, contracts, CallType::DelegateCall);
        for (const auto& [month, entry] : delegate_series.entries)
            CHECK(entry.numerator ==
                  plants["monthly"][month.str()]["multi_delegatecall"].get<uint64_t>());
    }

    // utilization series equals the plant
    {
        Corpus corpus = Corpus::open((out / "index").string());
        const auto contracts = corpus.load_contracts();
        const auto proxies = detector::proxy_set(findings);
        const auto util = context::utilization_series(corpus, contracts, proxies);
        for (const auto& [month, entry] : util.all_tx.entries) {
            CHECK(entry.numerator ==
                  plants["monthly"][month.str()]["proxy_touch"].get<uint64_t>());
        }
        for (const auto& [month, entry] : util.multi_contract_tx.entries) {
            CHECK(entry.numerator ==
                  plants["monthly"][month.str()]["proxy_touch_multi"].get<uint64_t>());
        }
    }

    // the pattern catalog recovers exactly the planted signatures
    {
        const auto chains = lineage::read_chains((out / "chains.jsonl").string());
        const auto catalog = lineage::pattern_catalog(chains);
        std::set<std::string> signatures;
        for (const auto& p : catalog) signatures.insert(p.signature);
        std::set<std::string> planted(fixturegen::kAllPatterns.begin(),
                                      fixturegen::kAllPatterns.end());
        CHECK(signatures == planted);
        for (const auto& p : catalog)
            CHECK((p.style == lineage::DeployStyle::OffChain) == (p.signature == "EOA > P"));
    }

    // every context is styled and every member is in exactly one context
    {
        const auto contexts = context::read_contexts((out / "contexts.jsonl").string());
        std::set<Address> members;
        size_t total = 0;
        for (const auto& ctx : contexts) {
            CHECK(ctx.style.has_value());
            for (const auto& m : ctx.members) {
                CHECK(members.insert(m).second);
                ++total;
            }
        }
        CHECK(total == findings.size());
    }

    // classifier kinds match the plants
    {
        const std::string classes = read_file((out / "classes.csv").string());
        for (const auto& [kind, address] : plants["classifier"]["kinds"].items()) {
            const std::string row_prefix = address.get<std::string>() + "," + kind;
            INFO("expect " << row_prefix);
            CHECK(classes.find(row_prefix) != std::string::npos);
        }
        for (const auto& [address, purpose] : plants["classifier"]["purpose"].items()) {
            const std::string address_row = address + ",";
            const auto pos = classes.find(address_row);
            REQUIRE(pos != std::string::npos);
            const auto line_end = classes.find('\n', pos);
            const std::string line = classes.substr(pos, line_end - pos);
            INFO("line " << line);
            CHECK(line.find("," + purpose.get<std::string>() + ",") != std::string::npos);
        }
    }
}

TEST_CASE("rerun skips unchanged stages and reproduces the manifest bytes") {
    const auto& fixture = small_fixture();
    const auto out = test_support::fresh_dir("pipeline_rerun");
    const auto cfg = config_for(fixture.dir, out);

    REQUIRE(pipeline::run_pipeline(cfg).ok);
    const auto manifest_first = read_file((out / "run.manifest.json").string());
    const auto proxies_first = read_file((out / "proxies.jsonl").string());

    REQUIRE(pipeline::run_pipeline(cfg).ok);
    const auto manifest_second = read_file((out / "run.manifest.json").string());
    CHECK(manifest_first == manifest_second);
    CHECK(read_file((out / "proxies.jsonl").string()) == proxies_first);

    const auto timings = nlohmann::json::parse(read_file((out / "run.timings.json").string()));
    for (const auto& [name, t] : timings["stages"].items()) CHECK(t["skipped"] == true);
}

TEST_CASE("a corrupted traces file fails ingest and marks downstream not-run") {
    const auto& fixture = small_fixture();
    const auto out = test_support::fresh_dir("pipeline_fail");
    auto cfg = config_for(fixture.dir, out);
    const auto bad_traces = out / "bad_traces.jsonl";
    write_file(bad_traces.string(), "this is not json\n{\"also\": \"not a trace\"}\n");
    cfg.traces_path = bad_traces.string();
    cfg.strict = true;

    const auto result = pipeline::run_pipeline(cfg);
    CHECK_FALSE(result.ok);
    CHECK(result.failed_stage == "ingest");
    const auto manifest = nlohmann::json::parse(read_file((out / "run.manifest.json").string()));
    bool saw_failed = false, saw_not_run = false;
    for (const auto& stage : manifest["stages"]) {
        if (stage["name"] == "ingest") {
            CHECK(stage["status"] == "failed");
            saw_failed = true;
        } else {
            CHECK(stage["status"] == "not-run");
            saw_not_run = true;
        }
    }
    CHECK(saw_failed);
    CHECK(saw_not_run);
}

TEST_CASE("pipeline config file round-trip") {
    const auto dir = test_support::fresh_dir("pipeline_config");
    const auto path = (dir / "run.conf").string();
    write_file(path,
               "# comment\n"
               "traces = /tmp/t.jsonl\n"
               "contracts = /tmp/c.jsonl\n"
               "out = /tmp/out\n"
               "strict = true\n"
               "workers = 3\n");
    const auto cfg = pipeline::parse_config_file(path);
    CHECK(cfg.traces_path == "/tmp/t.jsonl");
    CHECK(cfg.contracts_path == "/tmp/c.jsonl");
    CHECK(cfg.out_dir == "/tmp/out");
    CHECK(cfg.strict);
    CHECK(cfg.workers == 3);

    write_file(path, "unknown_key = 1\n");
    CHECK_THROWS_AS(pipeline::parse_config_file(path), DataError);
}

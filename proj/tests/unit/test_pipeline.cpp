#include "doctest.h"

#include "fixture_repo.hpp"

#include "sstub/errors.hpp"
#include "sstub/pipeline.hpp"
#include "sstub/process.hpp"

#include <atomic>
#include <cmath>

using namespace sstub;
using namespace sstub::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig fixture_config(const PipelineFixture& fx, const fs::path& out, int jobs)
{
    RunConfig c;
    c.dataset_path = fx.dataset;
    c.repos_dir = fx.repos_dir;
    c.output_dir = out;
    c.jobs = jobs;
    c.report_formats = { "json", "csv" };
    return c;
}

json read_report(const fs::path& dir)
{
    return json::parse(read_file(dir / artifact::report_json));
}

struct Quiet {
    Quiet() { set_log_enabled(false); }
    ~Quiet() { set_log_enabled(true); }
};

} // namespace

TEST_CASE("five-record fixture produces the hand-derived report")
{
    Quiet quiet;
    TempDir tmp;
    auto fx = build_pipeline_fixture(tmp.path());
    auto out = tmp.path() / "out";
    REQUIRE(run_pipeline(fixture_config(fx, out, 1)) == exit_code::ok);
    auto r = read_report(out);

    const auto& t = r["totals"];
    CHECK(t["records_in"] == 5);
    CHECK(t["records_processed"] == 4);
    CHECK(t["commits_examined"] == 5);
    CHECK(t["omitted"]["ambiguous"] == 1);
    CHECK(t["omitted"]["no_match"] == 0);
    CHECK(t["omitted"]["error"] == 0);
    CHECK(t["omitted"]["negative_duration"] == 0);
    int omitted = 0;
    for (const auto& [k, v] : t["omitted"].items())
        omitted += v.get<int>();
    CHECK(t["records_in"].get<int>() == t["records_processed"].get<int>() + omitted);

    CHECK(r["rq1"]["pct_same_author_surrounding"].get<double>() == doctest::Approx(200.0 / 3).epsilon(1e-12));
    CHECK(r["rq1"]["denominator"] == 3);
    CHECK(r["rq1"]["inclusive_variant"].get<double>() == 75.0);
    CHECK(r["rq1"]["inclusive_denominator"] == 4);
    CHECK(r["rq2"]["pct_same_commit_surrounding"].get<double>() == doctest::Approx(200.0 / 3).epsilon(1e-12));
    CHECK(r["rq2"]["inclusive_variant"].get<double>() == 75.0);
    CHECK(r["rq2"]["pct_added_new"].get<double>() == 75.0);
    CHECK(r["rq2"]["pct_modified_existing"].get<double>() == 25.0);
    CHECK(r["rq2"]["mode_denominator"] == 4);

    const auto& overall = r["rq3"]["overall"];
    CHECK(overall["count"] == 4);
    CHECK(overall["mean_days"].get<double>() == 25.25);
    CHECK(overall["median_days"].get<double>() == 20.0);
    CHECK(overall["stddev_days"].get<double>() == doctest::Approx(std::sqrt(117.6875)).epsilon(1e-12));
    CHECK(r["rq3"]["same_author_fix"]["mean_days"].get<double>() == 20.5);
    CHECK(r["rq3"]["same_author_fix"]["median_days"].get<double>() == 11.0);
    CHECK(r["rq3"]["same_author_fix"]["stddev_days"].get<double>() == 9.5);
    CHECK(r["rq3"]["different_author_fix"]["mean_days"].get<double>() == 30.0);
    CHECK(r["rq3"]["different_author_fix"]["median_days"].get<double>() == 20.0);
    CHECK(r["rq3"]["different_author_fix"]["stddev_days"].get<double>() == 10.0);
    CHECK(r["rq3"]["pct_fixed_by_same_author"].get<double>() == 50.0);
    CHECK_FALSE(r.contains("rq4"));

    // Candidate hashes of the ambiguous record stay in the mining file.
    auto mining = read_jsonl(out / artifact::mining);
    REQUIRE(mining.size() == 5);
    CHECK(mining[3]["status"] == "AmbiguousMultiMatch");
    CHECK(mining[3]["candidates"] == json::array({ fx.commits[1], fx.commits[3] }));
    CHECK(mining[2]["resolved"] == fx.commits[2]);
    CHECK(mining[2]["mode"] == "ModifiedExisting");
    CHECK(mining[0]["same_author"] == "no-surrounding");
}

TEST_CASE("jobs and staged execution do not change any artifact")
{
    Quiet quiet;
    TempDir tmp;
    auto fx = build_pipeline_fixture(tmp.path());
    auto a = tmp.path() / "a";
    auto b = tmp.path() / "b";
    auto c = tmp.path() / "c";
    REQUIRE(run_pipeline(fixture_config(fx, a, 1)) == exit_code::ok);
    REQUIRE(run_pipeline(fixture_config(fx, b, 4)) == exit_code::ok);
    auto staged = fixture_config(fx, c, 2);
    for (auto stage : { Stage::Ingest, Stage::Mine, Stage::Analyze, Stage::Flagcheck, Stage::Report })
        REQUIRE(run_stage(stage, staged) == exit_code::ok);
    for (const char* name : { artifact::records, artifact::ingest_diagnostics, artifact::mining, artifact::lifecycle,
             artifact::report_json, artifact::report_csv }) {
        INFO(name);
        CHECK(read_file(a / name) == read_file(b / name));
        CHECK(read_file(a / name) == read_file(c / name));
    }
}

TEST_CASE("analyzer configured adds rq4")
{
    Quiet quiet;
    TempDir tmp;
    auto fx = build_pipeline_fixture(tmp.path());
    auto config = fixture_config(fx, tmp.path() / "out", 2);
    config.analyzer = demo_adapter(demo_analyzer_path());
    REQUIRE(run_pipeline(config) == exit_code::ok);
    auto r = read_report(config.output_dir);
    REQUIRE(r.contains("rq4"));
    CHECK(r["rq4"]["adapter_name"] == "demo-todobug");
    CHECK(r["rq4"]["analyzed_count"] == 5);
    CHECK(r["rq4"]["flagged_count"] == 0);
    CHECK(r["rq4"]["flag_rate"].get<double>() == 0.0);
    CHECK(read_jsonl(config.output_dir / artifact::flags).size() == 5);
}

TEST_CASE("report from hand-written intermediates")
{
    Quiet quiet;
    TempDir tmp;
    RunConfig config;
    config.output_dir = tmp.path();
    write_jsonl(tmp.path() / artifact::mining,
        {
            json::parse(R"({"record_index":0,"status":"Resolved","candidates":["a"],"resolved":"a","resolved_author":"x@y",
              "resolved_time":0,"mode":"AddedNew","same_author":"no-surrounding","same_commit":"no-surrounding","diagnostics":[]})"),
            json::parse(R"({"record_index":1,"status":"NoMatch","candidates":["b","c"],"resolved":null,"resolved_author":null,
              "resolved_time":null,"mode":null,"same_author":null,"same_commit":null,"diagnostics":[]})"),
            json::parse(R"({"record_index":2,"status":"Resolved","candidates":["d","a"],"resolved":"d","resolved_author":"x@y",
              "resolved_time":0,"mode":"ModifiedExisting","same_author":false,"same_commit":false,"diagnostics":[]})"),
        });
    write_jsonl(tmp.path() / artifact::lifecycle,
        {
            json::parse(R"({"record_index":0,"origin_time":0,"fix_time":172800,"duration_days":2.0,"fixed_by_same_author":true})"),
            json::parse(R"({"record_index":2,"excluded":"negative_duration","message":"fix precedes origin"})"),
        });
    REQUIRE(run_stage(Stage::Report, config) == exit_code::ok);
    auto r = read_report(tmp.path());
    CHECK(r["totals"]["records_in"] == 3);
    CHECK(r["totals"]["records_processed"] == 1);
    CHECK(r["totals"]["commits_examined"] == 4);
    CHECK(r["totals"]["omitted"]["no_match"] == 1);
    CHECK(r["totals"]["omitted"]["negative_duration"] == 1);
    CHECK(r["rq3"]["overall"]["mean_days"].get<double>() == 2.0);
    CHECK(r["rq3"]["different_author_fix"].is_null());
}

TEST_CASE("config file")
{
    TempDir tmp;
    write_file(tmp.path() / "cfg.json",
        R"({"dataset_path":"data/d.json","jobs":3,"analyzer":{"name":"a","command":"x {file}","format":"json-report","version":"9"}})");
    auto c = load_config(tmp.path() / "cfg.json");
    CHECK(c.dataset_path == tmp.path() / "data/d.json");
    CHECK(c.jobs == 3);
    REQUIRE(c.analyzer);
    CHECK(c.analyzer->format == AnalyzerFormat::JsonReport);
    CHECK(c.analyzer->version == "9");

    write_file(tmp.path() / "bad.json", R"({"datset_path":"x"})");
    CHECK_THROWS_AS(load_config(tmp.path() / "bad.json"), ConfigError);
    write_file(tmp.path() / "bad2.json", R"({"analyzer":{"name":"a","command":"x","format":"xml"}})");
    CHECK_THROWS_AS(load_config(tmp.path() / "bad2.json"), ConfigError);

    RunConfig zero;
    zero.jobs = 0;
    zero.output_dir = tmp.path() / "o";
    CHECK_THROWS_AS(validate_config(zero), ConfigError);
}

TEST_CASE("command line exit codes")
{
    TempDir tmp;
    auto miner = miner_path().string();
    auto run = [&](std::vector<std::string> args) {
        args.insert(args.begin(), miner);
        return run_process(args);
    };
    CHECK(run({ "frobnicate" }).exit_code == exit_code::config_error);
    CHECK(run({ "run", "--jobs", "0" }).exit_code == exit_code::config_error);
    CHECK(run({ "ingest", "--output", (tmp.path() / "o").string() }).exit_code == exit_code::config_error);

    write_file(tmp.path() / "broken.json", "[{");
    CHECK(run({ "ingest", "--dataset", (tmp.path() / "broken.json").string(), "--output", (tmp.path() / "o").string() })
              .exit_code
        == exit_code::dataset_error);

    write_file(tmp.path() / "empty.json", "[]");
    CHECK(run({ "run", "--dataset", (tmp.path() / "empty.json").string(), "--repos-dir", (tmp.path() / "repos").string(),
                  "--output", (tmp.path() / "e").string() })
              .exit_code
        == exit_code::nothing_processed);

    auto fx = build_pipeline_fixture(tmp.path() / "fx");
    auto out = tmp.path() / "cli";
    auto ok = run({ "run", "--dataset", fx.dataset.string(), "--repos-dir", fx.repos_dir.string(), "--output", out.string(),
        "--jobs", "2", "--format", "json,csv" });
    CHECK(ok.exit_code == exit_code::ok);
    CHECK(fs::exists(out / artifact::report_json));
    CHECK(fs::exists(out / artifact::report_csv));

    // Missing repository with cloning disabled: every record errors, nothing processed.
    auto missing = run({ "run", "--dataset", fx.dataset.string(), "--repos-dir", (tmp.path() / "none").string(), "--output",
        (tmp.path() / "m").string() });
    CHECK(missing.exit_code == exit_code::nothing_processed);
    auto r = read_report(tmp.path() / "m");
    CHECK(r["totals"]["omitted"]["error"] == 5);
}

TEST_CASE("parallel_for visits every index once")
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits)
        CHECK(h.load() == 1);
}

TEST_CASE("jsonl round trip uses sorted keys")
{
    TempDir tmp;
    write_jsonl(tmp.path() / "x.jsonl", { json { { "b", 1 }, { "a", 0.1 } } });
    CHECK(read_file(tmp.path() / "x.jsonl") == "{\"a\":0.1,\"b\":1}\n");
    CHECK(read_jsonl(tmp.path() / "x.jsonl")[0]["b"] == 1);
}

#include "sstub/pipeline.hpp"

#include "sstub/errors.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace sstub {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> log_enabled { true };
std::mutex log_mutex;

template <typename... Args>
void log(const Args&... args)
{
    if (!log_enabled)
        return;
    std::ostringstream line;
    line << "sstub-miner: ";
    (line << ... << args);
    line << '\n';
    std::lock_guard guard(log_mutex);
    std::cerr << line.str();
}

fs::path resolve_against(const fs::path& base, const fs::path& p)
{
    if (p.empty() || p.is_absolute() || base.empty())
        return p;
    return base / p;
}

std::vector<SStubRecord> load_records(const fs::path& path)
{
    std::vector<SStubRecord> records;
    for (const auto& row : read_jsonl(path)) {
        std::vector<Diagnostic> diagnostics;
        SStubRecord r;
        auto index = row.at("record_index").get<std::size_t>();
        if (!record_from_json(row, index, r, diagnostics))
            throw ParseError("invalid record " + std::to_string(index) + " in " + path.string() + ": "
                    + diagnostics.front().field + " " + diagnostics.front().message,
                0);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<MiningRecord> load_mining(const fs::path& path)
{
    std::vector<MiningRecord> out;
    for (const auto& row : read_jsonl(path))
        out.push_back(mining_record_from_json(row));
    return out;
}

/// Acquires every distinct project once; failures are kept as messages.
class RepoTable {
public:
    RepoTable(const GitClient& git, const RunConfig& config, const std::vector<SStubRecord>& records)
    {
        std::set<std::string> names;
        for (const auto& r : records)
            names.insert(r.project_name);
        std::vector<std::string> projects(names.begin(), names.end());
        std::vector<Entry> entries(projects.size());
        parallel_for(projects.size(), config.jobs, [&](std::size_t i) {
            try {
                entries[i].handle = git.acquire_repo(projects[i], config.repos_dir, config.clone_missing);
            } catch (const Error& e) {
                entries[i].error = e.what();
            }
        });
        for (std::size_t i = 0; i < projects.size(); ++i) {
            if (!entries[i].error.empty())
                log("repository for ", projects[i], " unavailable: ", entries[i].error);
            table_.emplace(projects[i], std::move(entries[i]));
        }
    }

    // Throws RepoUnavailable with the recorded cause.
    const RepoHandle& get(const std::string& project) const
    {
        const auto& entry = table_.at(project);
        if (!entry.error.empty())
            throw RepoUnavailable(entry.error);
        return entry.handle;
    }

private:
    struct Entry {
        RepoHandle handle;
        std::string error;
    };
    std::map<std::string, Entry> table_;
};

GitClient make_git(const RunConfig& config)
{
    return GitClient(resolve_git_binary(config.git_binary));
}

json percent_json(const Percentage& p)
{
    auto v = p.percent();
    return v ? json(*v) : json(nullptr);
}

json summary_json(const std::optional<StatSummary>& s)
{
    if (!s)
        return nullptr;
    return json { { "count", s->count }, { "mean_days", s->mean_days }, { "median_days", s->median_days },
        { "stddev_days", s->stddev_days } };
}

int stage_ingest(const RunConfig& config)
{
    if (config.dataset_path.empty())
        throw ConfigError("dataset_path is required for ingest");
    ParsedDataset parsed;
    try {
        parsed = parse_dataset(config.dataset_path);
    } catch (const IngestError& e) {
        log("ingest failed: ", e.what());
        return exit_code::dataset_error;
    }
    std::vector<json> rows, diagnostics;
    for (const auto& r : parsed.records)
        rows.push_back(record_to_json(r));
    for (const auto& d : parsed.diagnostics)
        diagnostics.push_back(diagnostic_to_json(d));
    write_jsonl(config.output_dir / artifact::records, rows);
    write_jsonl(config.output_dir / artifact::ingest_diagnostics, diagnostics);
    log("ingest: ", parsed.input_objects, " objects, ", parsed.records.size(), " records, ", parsed.diagnostics.size(),
        " diagnostics");
    return exit_code::ok;
}

int stage_mine(const RunConfig& config)
{
    auto records = load_records(config.output_dir / artifact::records);
    auto git = make_git(config);
    RepoTable repos(git, config, records);

    std::vector<MiningRecord> mined(records.size());
    std::atomic<std::size_t> done { 0 };
    parallel_for(records.size(), config.jobs, [&](std::size_t i) {
        const auto& record = records[i];
        try {
            mined[i] = trace_record(record, repos.get(record.project_name), git);
        } catch (const std::exception& e) {
            mined[i] = error_record(record.record_index, e.what());
        }
        auto n = ++done;
        if (n % 100 == 0)
            log("mine: ", n, "/", records.size());
    });
    std::sort(mined.begin(), mined.end(), [](const auto& a, const auto& b) { return a.record_index < b.record_index; });

    std::vector<json> rows;
    std::map<ResolutionStatus, std::size_t> counts;
    for (const auto& m : mined) {
        rows.push_back(mining_record_to_json(m));
        ++counts[m.origin.status];
    }
    write_jsonl(config.output_dir / artifact::mining, rows);
    log("mine: ", mined.size(), " records (", counts[ResolutionStatus::Resolved], " resolved, ",
        counts[ResolutionStatus::AmbiguousMultiMatch], " ambiguous, ", counts[ResolutionStatus::NoMatch], " no match, ",
        counts[ResolutionStatus::Error], " errors)");
    return exit_code::ok;
}

int stage_analyze(const RunConfig& config)
{
    auto records = load_records(config.output_dir / artifact::records);
    auto mining = load_mining(config.output_dir / artifact::mining);
    std::map<std::size_t, const SStubRecord*> by_index;
    for (const auto& r : records)
        by_index[r.record_index] = &r;

    std::vector<SStubRecord> needed;
    for (const auto& m : mining) {
        if (m.origin.status == ResolutionStatus::Resolved && by_index.count(m.record_index))
            needed.push_back(*by_index[m.record_index]);
    }
    auto git = make_git(config);
    RepoTable repos(git, config, needed);

    std::map<std::pair<std::string, std::string>, CommitMeta> meta_cache;
    auto meta = [&](const SStubRecord& r, const std::string& commit) -> const CommitMeta& {
        auto key = std::make_pair(r.project_name, commit);
        auto it = meta_cache.find(key);
        if (it == meta_cache.end())
            it = meta_cache.emplace(key, git.commit_meta(repos.get(r.project_name), commit)).first;
        return it->second;
    };

    std::vector<json> rows;
    for (const auto& m : mining) {
        if (m.origin.status != ResolutionStatus::Resolved)
            continue;
        LifecycleEntry entry;
        auto it = by_index.find(m.record_index);
        if (it == by_index.end()) {
            entry = Excluded { m.record_index, ExclusionReason::Error, "record missing from " + std::string(artifact::records) };
        } else {
            try {
                entry = build_lifecycle(m, meta(*it->second, it->second->fix_commit), meta(*it->second, *m.origin.resolved));
            } catch (const Error& e) {
                entry = Excluded { m.record_index, ExclusionReason::Error, e.what() };
            }
        }
        rows.push_back(lifecycle_entry_to_json(entry));
    }
    write_jsonl(config.output_dir / artifact::lifecycle, rows);
    log("analyze: ", rows.size(), " lifecycle entries");
    return exit_code::ok;
}

int stage_flagcheck(const RunConfig& config)
{
    if (!config.analyzer) {
        log("flagcheck: no analyzer configured, skipping");
        return exit_code::ok;
    }
    auto records = load_records(config.output_dir / artifact::records);
    auto git = make_git(config);
    RepoTable repos(git, config, records);
    const auto work_root = config.output_dir / "flagcheck-work";

    std::vector<FlagResult> results(records.size());
    parallel_for(records.size(), config.jobs, [&](std::size_t i) {
        const auto& record = records[i];
        const auto workdir = work_root / std::to_string(record.record_index);
        try {
            const auto& repo = repos.get(record.project_name);
            auto loaded = load_bug_block(record, repo, git);
            results[i] = run_analyzer(*config.analyzer, record, loaded.derivation.block, repo, git, workdir);
        } catch (const std::exception& e) {
            results[i] = FlagResult {};
            results[i].record_index = record.record_index;
            results[i].error = e.what();
        }
        std::error_code ec;
        fs::remove_all(workdir, ec);
    });
    std::error_code ec;
    fs::remove_all(work_root, ec);

    std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.record_index < b.record_index; });
    std::vector<json> rows;
    for (const auto& r : results)
        rows.push_back(flag_result_to_json(r));
    write_jsonl(config.output_dir / artifact::flags, rows);
    auto rate = flag_rate(results);
    log("flagcheck: ", rate.flagged_count, " of ", rate.analyzed_count, " flagged, ", rate.error_count, " analyzer errors");
    return exit_code::ok;
}

int stage_report(const RunConfig& config)
{
    auto mining = load_mining(config.output_dir / artifact::mining);
    std::vector<LifecycleEntry> lifecycle;
    for (const auto& row : read_jsonl(config.output_dir / artifact::lifecycle))
        lifecycle.push_back(lifecycle_entry_from_json(row));
    std::vector<FlagResult> flags;
    if (config.analyzer) {
        for (const auto& row : read_jsonl(config.output_dir / artifact::flags))
            flags.push_back(flag_result_from_json(row));
    }

    auto report = build_report(mining, lifecycle, config.analyzer, flags);
    auto as_json = dump_json(report_to_json(report));
    auto as_csv = report_to_csv(report);
    bool want_json = std::find(config.report_formats.begin(), config.report_formats.end(), "json") != config.report_formats.end();
    bool want_csv = std::find(config.report_formats.begin(), config.report_formats.end(), "csv") != config.report_formats.end();

    auto write_file = [](const fs::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out)
            throw Error("cannot write " + path.string());
    };
    if (want_json)
        write_file(config.output_dir / artifact::report_json, as_json);
    if (want_csv)
        write_file(config.output_dir / artifact::report_csv, as_csv);
    if (config.report_to_stdout)
        std::cout << (want_json || !want_csv ? as_json : as_csv) << std::flush;

    log("report: ", report.totals.records_processed, " of ", report.totals.records_in, " records processed");
    return report.totals.records_processed == 0 ? exit_code::nothing_processed : exit_code::ok;
}

} // namespace

void set_log_enabled(bool enabled)
{
    log_enabled = enabled;
}

std::optional<Stage> stage_from_string(std::string_view name)
{
    if (name == "ingest")
        return Stage::Ingest;
    if (name == "mine")
        return Stage::Mine;
    if (name == "analyze")
        return Stage::Analyze;
    if (name == "flagcheck")
        return Stage::Flagcheck;
    if (name == "report")
        return Stage::Report;
    return std::nullopt;
}

RunConfig config_from_json(const json& j, const fs::path& base_dir)
{
    if (!j.is_object())
        throw ConfigError("configuration must be a JSON object");
    static const std::set<std::string> known { "dataset_path", "repos_dir", "clone_missing", "jobs", "output_dir",
        "git_binary", "analyzer", "report_formats" };
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key))
            throw ConfigError("unknown configuration key '" + key + "'");
    }

    RunConfig c;
    try {
        if (j.contains("dataset_path"))
            c.dataset_path = resolve_against(base_dir, j["dataset_path"].get<std::string>());
        if (j.contains("repos_dir"))
            c.repos_dir = resolve_against(base_dir, j["repos_dir"].get<std::string>());
        if (j.contains("output_dir"))
            c.output_dir = resolve_against(base_dir, j["output_dir"].get<std::string>());
        c.clone_missing = j.value("clone_missing", false);
        c.jobs = j.value("jobs", 1);
        c.git_binary = j.value("git_binary", std::string("git"));
        if (j.contains("report_formats"))
            c.report_formats = j["report_formats"].get<std::vector<std::string>>();
        if (auto it = j.find("analyzer"); it != j.end() && !it->is_null()) {
            AnalyzerAdapter a;
            a.name = it->at("name").get<std::string>();
            a.command_template = it->at("command").get<std::string>();
            a.format = analyzer_format_from_string(it->value("format", std::string("line-colon")));
            a.version = it->value("version", std::string());
            c.analyzer = a;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad configuration value: ") + e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read configuration " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("configuration " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

void validate_config(const RunConfig& c)
{
    if (c.jobs < 1)
        throw ConfigError("jobs must be >= 1");
    if (c.output_dir.empty())
        throw ConfigError("output_dir is required");
    for (const auto& f : c.report_formats) {
        if (f != "json" && f != "csv")
            throw ConfigError("unknown report format '" + f + "' (expected json or csv)");
    }
    if (c.analyzer && c.analyzer->command_template.find("{file}") == std::string::npos)
        throw ConfigError("analyzer command must contain the {file} placeholder");

    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    auto probe = c.output_dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out)
            throw ConfigError("output_dir " + c.output_dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

std::string dump_json(const json& j)
{
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        for (const auto& row : rows)
            out << dump_json(row) << '\n';
        if (!out)
            throw Error("cannot write " + path.string());
    }
    fs::rename(tmp, path);
}

std::vector<json> read_jsonl(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string() + " (run the previous stage first)");
    std::vector<json> rows;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (line.empty())
            continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what(), number);
        }
    }
    return rows;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task)
{
    const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            task(i);
        return;
    }
    std::atomic<std::size_t> next { 0 };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (auto i = next++; i < count; i = next++)
                task(i);
        });
    }
}

LifecycleReport build_report(std::span<const MiningRecord> mining, std::span<const LifecycleEntry> lifecycle,
    const std::optional<AnalyzerAdapter>& analyzer, std::span<const FlagResult> flags)
{
    LifecycleReport report;
    auto& t = report.totals;
    t.records_in = mining.size();

    std::map<std::size_t, const LifecycleEntry*> entries;
    for (const auto& e : lifecycle)
        entries[record_index_of(e)] = &e;

    std::set<std::string> commits;
    std::vector<LifecycleRecord> processed;
    for (const auto& m : mining) {
        commits.insert(m.origin.candidates.begin(), m.origin.candidates.end());
        switch (m.origin.status) {
        case ResolutionStatus::NoMatch:
            ++t.no_match;
            continue;
        case ResolutionStatus::AmbiguousMultiMatch:
            ++t.ambiguous;
            continue;
        case ResolutionStatus::Error:
            ++t.error;
            continue;
        case ResolutionStatus::Resolved:
            break;
        }
        auto it = entries.find(m.record_index);
        if (it == entries.end()) {
            ++t.error;
        } else if (const auto* ex = std::get_if<Excluded>(it->second)) {
            ++(ex->reason == ExclusionReason::NegativeDuration ? t.negative_duration : t.error);
        } else {
            processed.push_back(std::get<LifecycleRecord>(*it->second));
        }
    }
    t.records_processed = processed.size();
    t.commits_examined = commits.size();

    report.rq = rq_percentages(mining, processed);

    std::vector<LifecycleRecord> same, different;
    for (const auto& r : processed)
        (r.fixed_by_same_author ? same : different).push_back(r);
    if (!processed.empty())
        report.overall = summarize(processed);
    if (!same.empty())
        report.same_author_fix = summarize(same);
    if (!different.empty())
        report.different_author_fix = summarize(different);

    if (analyzer)
        report.rq4 = LifecycleReport::Rq4 { analyzer->name, analyzer->version, flag_rate(flags) };
    return report;
}

json report_to_json(const LifecycleReport& r)
{
    const auto& t = r.totals;
    json j;
    j["totals"] = {
        { "records_in", t.records_in },
        { "records_processed", t.records_processed },
        { "commits_examined", t.commits_examined },
        { "omitted",
            { { "no_match", t.no_match }, { "ambiguous", t.ambiguous }, { "error", t.error },
                { "negative_duration", t.negative_duration } } },
    };
    j["rq1"] = {
        { "pct_same_author_surrounding", percent_json(r.rq.same_author_surrounding) },
        { "denominator", r.rq.same_author_surrounding.denominator },
        { "inclusive_variant", percent_json(r.rq.same_author_surrounding_inclusive) },
        { "inclusive_denominator", r.rq.same_author_surrounding_inclusive.denominator },
    };
    j["rq2"] = {
        { "pct_same_commit_surrounding", percent_json(r.rq.same_commit_surrounding) },
        { "denominator", r.rq.same_commit_surrounding.denominator },
        { "inclusive_variant", percent_json(r.rq.same_commit_surrounding_inclusive) },
        { "inclusive_denominator", r.rq.same_commit_surrounding_inclusive.denominator },
        { "pct_added_new", percent_json(r.rq.added_new) },
        { "pct_modified_existing", percent_json(r.rq.modified_existing) },
        { "mode_denominator", r.rq.added_new.denominator },
    };
    j["rq3"] = {
        { "overall", summary_json(r.overall) },
        { "same_author_fix", summary_json(r.same_author_fix) },
        { "different_author_fix", summary_json(r.different_author_fix) },
        { "pct_fixed_by_same_author", percent_json(r.rq.fixed_by_same_author) },
        { "denominator", r.rq.fixed_by_same_author.denominator },
    };
    if (r.rq4) {
        const auto& rate = r.rq4->rate;
        j["rq4"] = {
            { "adapter_name", r.rq4->adapter_name },
            { "adapter_version", r.rq4->adapter_version },
            { "flag_rate", rate.rate_percent ? json(*rate.rate_percent) : json(nullptr) },
            { "analyzed_count", rate.analyzed_count },
            { "flagged_count", rate.flagged_count },
            { "error_count", rate.error_count },
        };
    }
    return j;
}

std::string report_to_csv(const LifecycleReport& r)
{
    std::ostringstream out;
    out << "metric,group,value,denominator\n";
    auto cell = [](const json& v) { return v.is_null() ? std::string() : dump_json(v); };
    auto row = [&](std::string_view metric, std::string_view group, const json& value, const json& denominator) {
        out << metric << ',' << group << ',' << cell(value) << ',' << cell(denominator) << '\n';
    };
    auto pct = [&](std::string_view metric, std::string_view group, const Percentage& p) {
        row(metric, group, percent_json(p), p.denominator);
    };

    const auto& t = r.totals;
    row("records_in", "totals", t.records_in, nullptr);
    row("records_processed", "totals", t.records_processed, t.records_in);
    row("commits_examined", "totals", t.commits_examined, nullptr);
    row("omitted_no_match", "totals", t.no_match, t.records_in);
    row("omitted_ambiguous", "totals", t.ambiguous, t.records_in);
    row("omitted_error", "totals", t.error, t.records_in);
    row("omitted_negative_duration", "totals", t.negative_duration, t.records_in);
    pct("pct_same_author_surrounding", "rq1", r.rq.same_author_surrounding);
    pct("pct_same_author_surrounding_inclusive", "rq1", r.rq.same_author_surrounding_inclusive);
    pct("pct_same_commit_surrounding", "rq2", r.rq.same_commit_surrounding);
    pct("pct_same_commit_surrounding_inclusive", "rq2", r.rq.same_commit_surrounding_inclusive);
    pct("pct_added_new", "rq2", r.rq.added_new);
    pct("pct_modified_existing", "rq2", r.rq.modified_existing);
    for (const auto& [group, summary] : { std::pair { "overall", &r.overall }, std::pair { "same_author_fix", &r.same_author_fix },
             std::pair { "different_author_fix", &r.different_author_fix } }) {
        if (!*summary) {
            row("count", group, 0, nullptr);
            continue;
        }
        const auto& s = **summary;
        row("count", group, s.count, nullptr);
        row("mean_days", group, s.mean_days, s.count);
        row("median_days", group, s.median_days, s.count);
        row("stddev_days", group, s.stddev_days, s.count);
    }
    pct("pct_fixed_by_same_author", "rq3", r.rq.fixed_by_same_author);
    if (r.rq4) {
        const auto& rate = r.rq4->rate;
        row("flag_rate", "rq4", rate.rate_percent ? json(*rate.rate_percent) : json(nullptr), rate.analyzed_count);
        row("flagged_count", "rq4", rate.flagged_count, rate.analyzed_count);
        row("analyzer_errors", "rq4", rate.error_count, nullptr);
    }
    return out.str();
}

int run_stage(Stage stage, const RunConfig& config)
{
    try {
        validate_config(config);
        switch (stage) {
        case Stage::Ingest:
            return stage_ingest(config);
        case Stage::Mine:
            return stage_mine(config);
        case Stage::Analyze:
            return stage_analyze(config);
        case Stage::Flagcheck:
            return stage_flagcheck(config);
        case Stage::Report:
            return stage_report(config);
        }
    } catch (const ConfigError& e) {
        log("configuration error: ", e.what());
        return exit_code::config_error;
    } catch (const std::exception& e) {
        log("error: ", e.what());
        return exit_code::failure;
    }
    return exit_code::failure;
}

int run_pipeline(const RunConfig& config)
{
    for (auto stage : { Stage::Ingest, Stage::Mine, Stage::Analyze, Stage::Flagcheck }) {
        if (int rc = run_stage(stage, config); rc != exit_code::ok)
            return rc;
    }
    return run_stage(Stage::Report, config);
}

} // namespace sstub

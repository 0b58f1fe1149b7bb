#pragma once

#include "sstub/analytics.hpp"
#include "sstub/flagcheck.hpp"
#include "sstub/tracer.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sstub {

struct RunConfig {
    std::filesystem::path dataset_path;
    std::filesystem::path repos_dir = "repos";
    bool clone_missing = false;
    int jobs = 1;
    std::filesystem::path output_dir = "sstub-out";
    std::string git_binary = "git";
    std::optional<AnalyzerAdapter> analyzer;
    std::vector<std::string> report_formats { "json" };
    // Also print the report on standard output ("--output -").
    bool report_to_stdout = false;
};

/// Relative paths inside the file are resolved against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Throws ConfigError; creates output_dir.
void validate_config(const RunConfig& config);

enum class Stage { Ingest, Mine, Analyze, Flagcheck, Report };
std::optional<Stage> stage_from_string(std::string_view name);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config_error = 2;
inline constexpr int dataset_error = 3;
inline constexpr int nothing_processed = 4;
} // namespace exit_code

namespace artifact {
inline constexpr const char* records = "records.jsonl";
inline constexpr const char* ingest_diagnostics = "ingest_diagnostics.jsonl";
inline constexpr const char* mining = "mining.jsonl";
inline constexpr const char* lifecycle = "lifecycle.jsonl";
inline constexpr const char* flags = "flags.jsonl";
inline constexpr const char* report_json = "report.json";
inline constexpr const char* report_csv = "report.csv";
} // namespace artifact

struct LifecycleReport {
    struct Totals {
        std::size_t records_in = 0;
        std::size_t records_processed = 0;
        std::size_t commits_examined = 0;
        std::size_t no_match = 0;
        std::size_t ambiguous = 0;
        std::size_t error = 0;
        std::size_t negative_duration = 0;
    } totals;
    RqPercentages rq;
    std::optional<StatSummary> overall;
    std::optional<StatSummary> same_author_fix;
    std::optional<StatSummary> different_author_fix;
    struct Rq4 {
        std::string adapter_name;
        std::string adapter_version;
        FlagRate rate;
    };
    std::optional<Rq4> rq4;
};

LifecycleReport build_report(std::span<const MiningRecord> mining, std::span<const LifecycleEntry> lifecycle,
    const std::optional<AnalyzerAdapter>& analyzer, std::span<const FlagResult> flags);

nlohmann::json report_to_json(const LifecycleReport& report);
std::string report_to_csv(const LifecycleReport& report);

/// Serialized the same way as every intermediate: sorted keys, shortest round-trip floats.
std::string dump_json(const nlohmann::json& j);

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Runs `count` tasks on at most `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// Executes one stage, reading the previous stage's artifacts from
/// config.output_dir. Returns a process exit code.
int run_stage(Stage stage, const RunConfig& config);
/// ingest, mine, analyze, flagcheck, report in order.
int run_pipeline(const RunConfig& config);

/// Progress lines on standard error; silenced in tests.
void set_log_enabled(bool enabled);

} // namespace sstub

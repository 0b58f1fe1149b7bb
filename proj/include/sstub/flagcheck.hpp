#pragma once

#include "sstub/dataset.hpp"
#include "sstub/vcs.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sstub {

enum class AnalyzerFormat { LineColon, JsonReport };

std::string_view to_string(AnalyzerFormat format);
AnalyzerFormat analyzer_format_from_string(std::string_view text);

/// External analyzer invocation. `{file}` in the command template is replaced
/// by the shell-quoted absolute path of the materialized file; the command is
/// run through /bin/sh inside the work directory.
struct AnalyzerAdapter {
    std::string name;
    std::string command_template;
    AnalyzerFormat format = AnalyzerFormat::LineColon;
    // Free-form, copied into the report verbatim.
    std::string version;

    bool operator==(const AnalyzerAdapter&) const = default;
};

struct Warning {
    std::string path;
    int line = 0;
    std::string rule;
    std::string message;
};

/// "line-colon": lines of "path:line: message" (other lines are ignored).
/// "json-report": an array of {path, line, rule, message}; throws AnalyzerError
/// when it is not one.
std::vector<Warning> parse_analyzer_output(std::string_view output, AnalyzerFormat format);

struct MatchedWarning {
    int line = 0;
    std::string rule;

    bool operator==(const MatchedWarning&) const = default;
};

struct FlagResult {
    std::size_t record_index = 0;
    bool flagged = false;
    std::vector<MatchedWarning> matched_warnings;
    std::size_t total_warnings_in_file = 0;
    // Set when the analyzer could not be run or its output not understood;
    // such results count toward neither side of the flag rate.
    std::optional<std::string> error;

    bool operator==(const FlagResult&) const = default;
};

/// Any warning on any block line flags the record.
FlagResult match_warnings(std::size_t record_index, const BugBlock& block, std::span<const Warning> warnings);

FlagResult run_analyzer(const AnalyzerAdapter& adapter, const SStubRecord& record, const BugBlock& block,
    const RepoHandle& repo, const GitClient& git, const std::filesystem::path& workdir);

struct FlagRate {
    std::size_t flagged_count = 0;
    std::size_t analyzed_count = 0;
    std::size_t error_count = 0;
    std::optional<double> rate_percent;
};

FlagRate flag_rate(std::span<const FlagResult> results);

nlohmann::json flag_result_to_json(const FlagResult& result);
FlagResult flag_result_from_json(const nlohmann::json& j);

/// Adapter for the bundled demo analyzer, which warns on lines containing "TODOBUG".
AnalyzerAdapter demo_adapter(const std::filesystem::path& demo_binary);

std::string shell_quote(std::string_view text);

} // namespace sstub

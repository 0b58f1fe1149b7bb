#include "sstub/flagcheck.hpp"

#include "sstub/errors.hpp"
#include "sstub/process.hpp"
#include "sstub/text.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <tuple>

namespace sstub {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(AnalyzerFormat format)
{
    return format == AnalyzerFormat::LineColon ? "line-colon" : "json-report";
}

AnalyzerFormat analyzer_format_from_string(std::string_view text)
{
    if (text == "line-colon")
        return AnalyzerFormat::LineColon;
    if (text == "json-report")
        return AnalyzerFormat::JsonReport;
    throw ConfigError("unknown analyzer format '" + std::string(text) + "' (expected line-colon or json-report)");
}

std::string shell_quote(std::string_view text)
{
    std::string out = "'";
    for (char c : text) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += '\'';
    return out;
}

std::vector<Warning> parse_analyzer_output(std::string_view output, AnalyzerFormat format)
{
    std::vector<Warning> warnings;
    if (format == AnalyzerFormat::LineColon) {
        static const std::regex pattern(R"(^(.+?):([0-9]+):[ \t]?(.*)$)");
        for (auto line : split_lines(output)) {
            std::string text(line);
            if (!text.empty() && text.back() == '\r')
                text.pop_back();
            std::smatch m;
            if (!std::regex_match(text, m, pattern))
                continue;
            Warning w;
            w.path = m[1].str();
            w.line = std::stoi(m[2].str());
            w.message = m[3].str();
            warnings.push_back(std::move(w));
        }
        return warnings;
    }

    json doc;
    try {
        doc = json::parse(output);
    } catch (const json::parse_error& e) {
        throw AnalyzerError(std::string("analyzer report is not JSON: ") + e.what());
    }
    if (!doc.is_array())
        throw AnalyzerError("analyzer report must be a JSON array");
    for (const auto& item : doc) {
        try {
            Warning w;
            w.path = item.at("path").get<std::string>();
            w.line = item.at("line").get<int>();
            w.rule = item.value("rule", "");
            w.message = item.value("message", "");
            warnings.push_back(std::move(w));
        } catch (const json::exception& e) {
            throw AnalyzerError(std::string("bad analyzer report entry: ") + e.what());
        }
    }
    return warnings;
}

FlagResult match_warnings(std::size_t record_index, const BugBlock& block, std::span<const Warning> warnings)
{
    FlagResult result;
    result.record_index = record_index;
    result.total_warnings_in_file = warnings.size();
    for (const auto& w : warnings) {
        if (block.contains_line(w.line))
            result.matched_warnings.push_back({ w.line, w.rule });
    }
    std::sort(result.matched_warnings.begin(), result.matched_warnings.end(), [](const auto& a, const auto& b) {
        return std::tie(a.line, a.rule) < std::tie(b.line, b.rule);
    });
    result.flagged = !result.matched_warnings.empty();
    return result;
}

FlagResult run_analyzer(const AnalyzerAdapter& adapter, const SStubRecord& record, const BugBlock& block,
    const RepoHandle& repo, const GitClient& git, const fs::path& workdir)
{
    auto relative = fs::path(record.bug_file_path).lexically_normal();
    if (relative.empty() || relative.is_absolute() || *relative.begin() == "..")
        throw AnalyzerError("refusing to materialize path outside the work directory: " + record.bug_file_path);

    auto content = git.file_at(repo, record.fix_parent_commit, record.bug_file_path);
    fs::create_directories(workdir);
    const auto root = fs::canonical(workdir);
    const auto file = root / relative;
    fs::create_directories(file.parent_path());
    {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out)
            throw AnalyzerError("cannot write " + file.string());
    }

    std::string command = adapter.command_template;
    const std::string placeholder = "{file}";
    const std::string quoted = shell_quote(file.string());
    for (auto pos = command.find(placeholder); pos != std::string::npos; pos = command.find(placeholder, pos + quoted.size()))
        command.replace(pos, placeholder.size(), quoted);

    ProcessOptions options;
    options.cwd = root;
    auto run = run_process({ "/bin/sh", "-c", command }, options);

    auto warnings = parse_analyzer_output(run.out, adapter.format);
    if (run.exit_code != 0 && warnings.empty())
        throw AnalyzerError(adapter.name + " exited with status " + std::to_string(run.exit_code)
            + " and no parsable output: " + std::string(trim(run.err)));

    // Single-file analysis: keep only warnings that point at the materialized file.
    std::vector<Warning> own;
    for (auto& w : warnings) {
        fs::path p(w.path);
        if (p.is_relative())
            p = root / p;
        std::error_code ec;
        if (fs::weakly_canonical(p, ec) == file)
            own.push_back(std::move(w));
    }
    return match_warnings(record.record_index, block, own);
}

FlagRate flag_rate(std::span<const FlagResult> results)
{
    FlagRate rate;
    for (const auto& r : results) {
        if (r.error) {
            ++rate.error_count;
            continue;
        }
        ++rate.analyzed_count;
        if (r.flagged)
            ++rate.flagged_count;
    }
    if (rate.analyzed_count > 0)
        rate.rate_percent = 100.0 * static_cast<double>(rate.flagged_count) / static_cast<double>(rate.analyzed_count);
    return rate;
}

json flag_result_to_json(const FlagResult& r)
{
    json matched = json::array();
    for (const auto& m : r.matched_warnings)
        matched.push_back(json { { "line", m.line }, { "rule", m.rule } });
    return json { { "record_index", r.record_index }, { "flagged", r.flagged }, { "matched_warnings", matched },
        { "total_warnings_in_file", r.total_warnings_in_file }, { "error", r.error ? json(*r.error) : json(nullptr) } };
}

FlagResult flag_result_from_json(const json& j)
{
    try {
        FlagResult r;
        r.record_index = j.at("record_index").get<std::size_t>();
        r.flagged = j.at("flagged").get<bool>();
        for (const auto& m : j.at("matched_warnings"))
            r.matched_warnings.push_back({ m.at("line").get<int>(), m.at("rule").get<std::string>() });
        r.total_warnings_in_file = j.at("total_warnings_in_file").get<std::size_t>();
        if (auto it = j.find("error"); it != j.end() && !it->is_null())
            r.error = it->get<std::string>();
        if (r.flagged != !r.matched_warnings.empty())
            throw ParseError("flagged must agree with matched_warnings", 0);
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad flag result: ") + e.what(), 0);
    }
}

AnalyzerAdapter demo_adapter(const fs::path& demo_binary)
{
    return { "demo-todobug", shell_quote(demo_binary.string()) + " {file}", AnalyzerFormat::LineColon, "1" };
}

} // namespace sstub

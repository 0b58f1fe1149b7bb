#include "sstub/tracer.hpp"

#include "sstub/diffparse.hpp"
#include "sstub/errors.hpp"
#include "sstub/text.hpp"

#include <algorithm>

namespace sstub {

using nlohmann::json;

namespace {

std::string_view to_string(IntroductionMode mode)
{
    return mode == IntroductionMode::AddedNew ? "AddedNew" : "ModifiedExisting";
}

json surrounding_to_json(Surrounding s)
{
    switch (s) {
    case Surrounding::Same:
        return true;
    case Surrounding::Different:
        return false;
    case Surrounding::NoSurrounding:
        break;
    }
    return "no-surrounding";
}

Surrounding surrounding_from_json(const json& j)
{
    if (j.is_boolean())
        return j.get<bool>() ? Surrounding::Same : Surrounding::Different;
    if (j.is_string() && j.get<std::string>() == "no-surrounding")
        return Surrounding::NoSurrounding;
    throw ParseError("bad surrounding value " + j.dump(), 0);
}

// Lines of `haystack` (1-based) containing `needle`.
std::vector<int> lines_containing(std::string_view haystack, std::string_view needle)
{
    std::vector<int> out;
    if (needle.empty())
        return out;
    auto lines = split_lines(haystack);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find(needle) != std::string_view::npos)
            out.push_back(static_cast<int>(i) + 1);
    }
    return out;
}

std::string_view first_nonblank_line(std::string_view text)
{
    for (auto line : split_lines(text)) {
        auto t = trim(line);
        if (!t.empty())
            return t;
    }
    return {};
}

} // namespace

std::string_view to_string(ResolutionStatus status)
{
    switch (status) {
    case ResolutionStatus::Resolved:
        return "Resolved";
    case ResolutionStatus::AmbiguousMultiMatch:
        return "AmbiguousMultiMatch";
    case ResolutionStatus::NoMatch:
        return "NoMatch";
    case ResolutionStatus::Error:
        break;
    }
    return "Error";
}

ResolutionStatus resolution_status_from_string(std::string_view text)
{
    for (auto s : { ResolutionStatus::Resolved, ResolutionStatus::AmbiguousMultiMatch, ResolutionStatus::NoMatch,
             ResolutionStatus::Error }) {
        if (to_string(s) == text)
            return s;
    }
    throw ParseError("unknown resolution status '" + std::string(text) + "'", 0);
}

CandidateSet candidate_origins(const BugBlock& block, const BlameResult& blame)
{
    if (block.end_line > static_cast<int>(blame.lines.size()))
        throw RangeError("block ends at line " + std::to_string(block.end_line) + " but blame covers "
                + std::to_string(blame.lines.size()) + " lines",
            blame.lines.size(), static_cast<std::size_t>(block.start_line), static_cast<std::size_t>(block.line_count()));

    CandidateSet set;
    for (int line = block.start_line; line <= block.end_line; ++line) {
        const auto& b = blame.at(line);
        if (set.paths.emplace(b.origin_commit, b.origin_path).second)
            set.commits.push_back(b.origin_commit);
    }
    return set;
}

OriginResolution resolve_origin(const SStubRecord& record, const CandidateSet& candidates, const RepoHandle& repo,
    const GitClient& git)
{
    OriginResolution res;
    res.candidates = candidates.commits;
    if (candidates.commits.empty()) {
        res.status = ResolutionStatus::NoMatch;
        return res;
    }

    auto path_of = [&](const std::string& commit) {
        auto it = candidates.paths.find(commit);
        return it == candidates.paths.end() || it->second.empty() ? record.bug_file_path : it->second;
    };

    try {
        std::vector<std::string> matches;
        if (candidates.commits.size() == 1) {
            matches = candidates.commits;
        } else {
            std::vector<std::string> contents;
            contents.reserve(candidates.commits.size());
            for (const auto& commit : candidates.commits)
                contents.push_back(git.file_at(repo, commit, path_of(commit)));

            for (std::size_t i = 0; i < contents.size(); ++i) {
                if (contents[i].find(record.source_before_fix) != std::string::npos)
                    matches.push_back(candidates.commits[i]);
            }
            if (matches.empty()) {
                auto needle = collapse_whitespace(record.source_before_fix);
                for (std::size_t i = 0; i < contents.size(); ++i) {
                    if (collapse_whitespace(contents[i]).find(needle) != std::string::npos)
                        matches.push_back(candidates.commits[i]);
                }
            }
        }

        if (matches.empty()) {
            res.status = ResolutionStatus::NoMatch;
        } else if (matches.size() > 1) {
            res.status = ResolutionStatus::AmbiguousMultiMatch;
        } else {
            auto meta = git.commit_meta(repo, matches.front());
            res.resolved = matches.front();
            res.resolved_author = identity_key(meta.author_email, meta.author_name);
            res.resolved_time = meta.author_time;
            res.status = ResolutionStatus::Resolved;
        }
    } catch (const Error& e) {
        res = OriginResolution {};
        res.candidates = candidates.commits;
        res.status = ResolutionStatus::Error;
        res.error = e.what();
    }
    return res;
}

IntroductionClass classify_introduction(const SStubRecord& record, const OriginResolution& origin, const BugBlock& block,
    const BlameResult& blame, const std::map<std::string, std::string>& origin_paths, const RepoHandle& repo,
    const GitClient& git, std::vector<std::string>& notes)
{
    if (origin.status != ResolutionStatus::Resolved || !origin.resolved)
        throw Error("classify_introduction requires a resolved origin");
    const auto& commit = *origin.resolved;

    IntroductionClass intro;

    // Surroundings are judged on the fix-parent blame of the other block lines.
    bool any_other = false, all_same_commit = true, all_same_author = true;
    for (int line = block.start_line; line <= block.end_line; ++line) {
        if (line == block.bug_line)
            continue;
        any_other = true;
        const auto& b = blame.at(line);
        if (b.origin_commit != commit)
            all_same_commit = false;
        if (identity_key(b.origin_author_email, b.origin_author_name) != origin.resolved_author.value_or(""))
            all_same_author = false;
    }
    if (any_other) {
        intro.same_author_as_surrounding = all_same_author ? Surrounding::Same : Surrounding::Different;
        intro.same_commit_as_surrounding = all_same_commit ? Surrounding::Same : Surrounding::Different;
    }

    std::string origin_path = record.bug_file_path;
    if (auto it = origin_paths.find(commit); it != origin_paths.end() && !it->second.empty())
        origin_path = it->second;

    std::vector<FilePatch> patches;
    try {
        patches = parse_patch(git.commit_patch(repo, commit));
    } catch (const ParseError& e) {
        notes.push_back(std::string("origin patch unparsable: ") + e.what());
        return intro;
    }
    const FilePatch* patch = find_file_patch(patches, origin_path);
    if (!patch) {
        notes.push_back("origin patch does not touch " + origin_path);
        return intro;
    }

    // Blame's own mapping of the bug line (or the first block line owned by
    // the origin) into the origin commit's version of the file.
    std::optional<int> blamed_position;
    if (blame.at(block.bug_line).origin_commit == commit) {
        blamed_position = blame.at(block.bug_line).origin_line;
    } else {
        for (int line = block.start_line; line <= block.end_line && !blamed_position; ++line) {
            if (blame.at(line).origin_commit == commit)
                blamed_position = blame.at(line).origin_line;
        }
    }

    auto origin_text = git.file_at(repo, commit, origin_path);
    auto textual = lines_containing(origin_text, first_nonblank_line(record.source_before_fix));

    std::optional<int> position;
    if (blamed_position && std::find(textual.begin(), textual.end(), *blamed_position) != textual.end()) {
        position = blamed_position;
    } else {
        for (int candidate : textual) {
            if (classify_new_line(*patch, candidate) != LineClass::NotTouched) {
                position = candidate;
                break;
            }
        }
        if (!position && blamed_position) {
            notes.push_back("bug line located through blame mapping");
            position = blamed_position;
        }
        if (!position && !textual.empty())
            position = textual.front();
    }
    if (!position) {
        notes.push_back("bug line not found in origin version of " + origin_path);
        return intro;
    }

    switch (classify_new_line(*patch, *position)) {
    case LineClass::AddedNew:
        intro.mode = IntroductionMode::AddedNew;
        break;
    case LineClass::ModifiedExisting:
        intro.mode = IntroductionMode::ModifiedExisting;
        break;
    case LineClass::NotTouched:
        notes.push_back("origin line " + std::to_string(*position) + " not changed by the origin patch");
        break;
    }
    return intro;
}

LoadedBlock load_bug_block(const SStubRecord& record, const RepoHandle& repo, const GitClient& git)
{
    LoadedBlock loaded;
    loaded.file_text = git.file_at(repo, record.fix_parent_commit, record.bug_file_path);
    loaded.derivation = derive_block(loaded.file_text, record.bug_node_start_char, record.bug_node_length, record.bug_line_num);
    return loaded;
}

MiningRecord error_record(std::size_t record_index, std::string message)
{
    MiningRecord m;
    m.record_index = record_index;
    m.origin.status = ResolutionStatus::Error;
    m.diagnostics.push_back(std::move(message));
    return m;
}

MiningRecord trace_record(const SStubRecord& record, const RepoHandle& repo, const GitClient& git)
{
    MiningRecord m;
    m.record_index = record.record_index;

    LoadedBlock loaded;
    BlameResult blame;
    CandidateSet candidates;
    try {
        loaded = load_bug_block(record, repo, git);
        m.diagnostics = loaded.derivation.notes;
        blame = git.blame(repo, record.fix_parent_commit, record.bug_file_path);
        candidates = candidate_origins(loaded.derivation.block, blame);
    } catch (const Error& e) {
        m.origin.status = ResolutionStatus::Error;
        m.diagnostics.push_back(e.what());
        return m;
    }

    m.origin = resolve_origin(record, candidates, repo, git);
    if (m.origin.error) {
        m.diagnostics.push_back(*m.origin.error);
        m.origin.error.reset();
    }
    if (m.origin.status != ResolutionStatus::Resolved)
        return m;

    try {
        m.introduction = classify_introduction(
            record, m.origin, loaded.derivation.block, blame, candidates.paths, repo, git, m.diagnostics);
    } catch (const Error& e) {
        // The origin itself is sound; only the introduction analysis failed.
        m.diagnostics.push_back(std::string("introduction analysis failed: ") + e.what());
    }
    return m;
}

json mining_record_to_json(const MiningRecord& m)
{
    json j;
    j["record_index"] = m.record_index;
    j["status"] = std::string(to_string(m.origin.status));
    j["candidates"] = m.origin.candidates;
    j["resolved"] = m.origin.resolved ? json(*m.origin.resolved) : json(nullptr);
    j["resolved_author"] = m.origin.resolved_author ? json(*m.origin.resolved_author) : json(nullptr);
    j["resolved_time"] = m.origin.resolved_time ? json(*m.origin.resolved_time) : json(nullptr);
    if (m.introduction) {
        j["mode"] = m.introduction->mode ? json(std::string(to_string(*m.introduction->mode))) : json(nullptr);
        j["same_author"] = surrounding_to_json(m.introduction->same_author_as_surrounding);
        j["same_commit"] = surrounding_to_json(m.introduction->same_commit_as_surrounding);
    } else {
        j["mode"] = nullptr;
        j["same_author"] = nullptr;
        j["same_commit"] = nullptr;
    }
    j["diagnostics"] = m.diagnostics;
    return j;
}

MiningRecord mining_record_from_json(const json& j)
{
    try {
        MiningRecord m;
        m.record_index = j.at("record_index").get<std::size_t>();
        m.origin.status = resolution_status_from_string(j.at("status").get<std::string>());
        m.origin.candidates = j.at("candidates").get<std::vector<std::string>>();
        if (!j.at("resolved").is_null())
            m.origin.resolved = j["resolved"].get<std::string>();
        if (!j.at("resolved_author").is_null())
            m.origin.resolved_author = j["resolved_author"].get<std::string>();
        if (!j.at("resolved_time").is_null())
            m.origin.resolved_time = j["resolved_time"].get<std::int64_t>();
        if (!j.at("same_author").is_null() || !j.at("same_commit").is_null() || !j.at("mode").is_null()) {
            IntroductionClass intro;
            const auto& mode = j["mode"];
            if (!mode.is_null()) {
                auto text = mode.get<std::string>();
                if (text == "AddedNew")
                    intro.mode = IntroductionMode::AddedNew;
                else if (text == "ModifiedExisting")
                    intro.mode = IntroductionMode::ModifiedExisting;
                else
                    throw ParseError("unknown mode '" + text + "'", 0);
            }
            intro.same_author_as_surrounding = surrounding_from_json(j.at("same_author"));
            intro.same_commit_as_surrounding = surrounding_from_json(j.at("same_commit"));
            m.introduction = intro;
        }
        if (auto it = j.find("diagnostics"); it != j.end())
            m.diagnostics = it->get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad mining record: ") + e.what(), 0);
    }
}

} // namespace sstub

#pragma once

#include "sstub/dataset.hpp"
#include "sstub/vcs.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sstub {

enum class ResolutionStatus { Resolved, AmbiguousMultiMatch, NoMatch, Error };

std::string_view to_string(ResolutionStatus status);
ResolutionStatus resolution_status_from_string(std::string_view text);

struct OriginResolution {
    // Deduplicated, ordered by first covered block line. Kept for every status.
    std::vector<std::string> candidates;
    std::optional<std::string> resolved;
    std::optional<std::string> resolved_author;
    std::optional<std::int64_t> resolved_time;
    ResolutionStatus status = ResolutionStatus::Error;
    // Set with status Error; not part of the interchange record.
    std::optional<std::string> error;

    bool operator==(const OriginResolution&) const = default;
};

enum class IntroductionMode { AddedNew, ModifiedExisting };
enum class Surrounding { Same, Different, NoSurrounding };

struct IntroductionClass {
    std::optional<IntroductionMode> mode;
    Surrounding same_author_as_surrounding = Surrounding::NoSurrounding;
    Surrounding same_commit_as_surrounding = Surrounding::NoSurrounding;

    bool operator==(const IntroductionClass&) const = default;
};

/// Candidate origin commits of a block together with the path each commit
/// knew the file under (blame follows whole-file renames).
struct CandidateSet {
    std::vector<std::string> commits;
    std::map<std::string, std::string> paths;
};

CandidateSet candidate_origins(const BugBlock& block, const BlameResult& blame);

/// Searches each candidate's version of the file for the buggy fragment;
/// exact substring first, whitespace-collapsed as a fallback.
OriginResolution resolve_origin(const SStubRecord& record, const CandidateSet& candidates, const RepoHandle& repo,
    const GitClient& git);

/// Requires origin.status == Resolved. Notes about fallbacks go to `notes`.
IntroductionClass classify_introduction(const SStubRecord& record, const OriginResolution& origin, const BugBlock& block,
    const BlameResult& blame, const std::map<std::string, std::string>& origin_paths, const RepoHandle& repo,
    const GitClient& git, std::vector<std::string>& notes);

struct LoadedBlock {
    std::string file_text;
    BlockDerivation derivation;
};

/// The buggy block at the fix-parent revision; shared by tracing and flag checking.
LoadedBlock load_bug_block(const SStubRecord& record, const RepoHandle& repo, const GitClient& git);

/// One line of the mining interchange file.
struct MiningRecord {
    std::size_t record_index = 0;
    OriginResolution origin;
    std::optional<IntroductionClass> introduction;
    std::vector<std::string> diagnostics;

    bool operator==(const MiningRecord&) const = default;
};

/// Full trace of one record. Never throws for per-record failures; they end
/// up as status Error with a diagnostic.
MiningRecord trace_record(const SStubRecord& record, const RepoHandle& repo, const GitClient& git);

MiningRecord error_record(std::size_t record_index, std::string message);

nlohmann::json mining_record_to_json(const MiningRecord& record);
MiningRecord mining_record_from_json(const nlohmann::json& j);

} // namespace sstub

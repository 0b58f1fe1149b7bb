#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sstub {

struct RepoHandle {
    std::string project_name;
    std::filesystem::path local_path;
    std::string origin_url;
};

struct CommitMeta {
    std::string commit_id;
    std::string author_name;
    std::string author_email;
    std::int64_t author_time = 0;
    std::vector<std::string> parent_ids;

    bool operator==(const CommitMeta&) const = default;
};

/// Maximal run of consecutive lines attributed to one commit.
struct BlameSpan {
    int start_line = 1;
    int line_count = 1;
    std::string origin_commit;
    std::string origin_author_email;
    std::string origin_author_name;

    bool operator==(const BlameSpan&) const = default;
};

/// Per-line blame detail; `origin_line`/`origin_path` locate the line inside
/// the origin commit's version of the file.
struct BlameLine {
    int line = 1;
    int origin_line = 1;
    std::string origin_commit;
    std::string origin_path;
    std::string origin_author_email;
    std::string origin_author_name;
};

struct BlameResult {
    std::vector<BlameLine> lines;
    std::vector<BlameSpan> spans;

    const BlameLine& at(int line) const { return lines.at(static_cast<std::size_t>(line - 1)); }
};

/// Lower-cased email; falls back to the lower-cased, trimmed name.
std::string identity_key(std::string_view email, std::string_view name);

struct OwnerRepo {
    std::string owner;
    std::string repo;
};

/// Splits "owner.repo" on the first dot. Throws RepoUnavailable if either side is empty.
OwnerRepo split_project_name(std::string_view project_name);

/// Parses `git blame --porcelain` output.
BlameResult parse_blame_porcelain(std::string_view text);

/// Merges per-line attributions into maximal same-commit spans.
std::vector<BlameSpan> merge_blame_spans(const std::vector<BlameLine>& lines);

/// Thin read-only adapter over a git executable. Safe for concurrent use.
class GitClient {
public:
    explicit GitClient(std::string git_binary = "git");

    const std::string& git_binary() const { return git_binary_; }

    /// Base used for clone URLs; tests point this at a local directory.
    void set_clone_base_url(std::string url) { clone_base_url_ = std::move(url); }

    RepoHandle acquire_repo(std::string_view project_name, const std::filesystem::path& repos_dir, bool clone_missing) const;

    BlameResult blame(const RepoHandle& repo, std::string_view commit, std::string_view path) const;
    std::vector<BlameSpan> blame_file(const RepoHandle& repo, std::string_view commit, std::string_view path) const
    {
        return blame(repo, commit, path).spans;
    }

    /// Raw blob bytes. Throws NotFound when the commit or path does not exist.
    std::string file_at(const RepoHandle& repo, std::string_view commit, std::string_view path) const;

    CommitMeta commit_meta(const RepoHandle& repo, std::string_view commit) const;

    /// Unified diff of `commit` against its first parent (the empty tree for roots).
    std::string commit_patch(const RepoHandle& repo, std::string_view commit) const;

    bool is_ancestor(const RepoHandle& repo, std::string_view ancestor, std::string_view descendant) const;

private:
    std::string run_git(const RepoHandle& repo, const std::vector<std::string>& args, std::string_view what) const;
    std::shared_ptr<std::mutex> lock_for(const std::filesystem::path& dir) const;

    std::string git_binary_;
    std::string clone_base_url_ = "https://github.com";
    mutable std::mutex locks_mutex_;
    mutable std::map<std::filesystem::path, std::shared_ptr<std::mutex>> locks_;
};

/// `git_binary` from configuration, overridden by SSTUB_MINER_GIT when set.
std::string resolve_git_binary(std::string configured);

} // namespace sstub

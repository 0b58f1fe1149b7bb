#include "sstub/vcs.hpp"

#include "sstub/errors.hpp"
#include "sstub/process.hpp"
#include "sstub/text.hpp"

#include <charconv>
#include <cstdlib>
#include <unistd.h>
#include <unordered_map>

namespace sstub {

namespace fs = std::filesystem;

namespace {

bool looks_like_missing_object(std::string_view err)
{
    for (std::string_view marker : { "Not a valid object name", "Not a valid commit name", "no such path", "bad object",
             "bad revision", "unknown revision", "does not exist", "ambiguous argument", "invalid object name" }) {
        if (err.find(marker) != std::string_view::npos)
            return true;
    }
    return false;
}

int parse_int(std::string_view text, std::string_view what)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ToolError("blame porcelain: bad " + std::string(what) + " '" + std::string(text) + "'");
    return value;
}

std::string strip_angle_brackets(std::string_view mail)
{
    if (mail.size() >= 2 && mail.front() == '<' && mail.back() == '>')
        mail = mail.substr(1, mail.size() - 2);
    return std::string(mail);
}

} // namespace

std::string identity_key(std::string_view email, std::string_view name)
{
    auto mail = trim(email);
    if (!mail.empty())
        return to_lower(mail);
    return to_lower(trim(name));
}

OwnerRepo split_project_name(std::string_view project_name)
{
    auto dot = project_name.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == project_name.size())
        throw RepoUnavailable("project name '" + std::string(project_name) + "' is not of the form owner.repo");
    return { std::string(project_name.substr(0, dot)), std::string(project_name.substr(dot + 1)) };
}

BlameResult parse_blame_porcelain(std::string_view text)
{
    struct CommitInfo {
        std::string author;
        std::string mail;
        std::string filename;
    };
    std::unordered_map<std::string, CommitInfo> commits;

    BlameResult result;
    auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        auto header = lines[i++];
        // "<sha> <orig_line> <final_line> [<group_size>]"
        auto sp1 = header.find(' ');
        auto sp2 = sp1 == std::string_view::npos ? sp1 : header.find(' ', sp1 + 1);
        if (sp1 != 40 || sp2 == std::string_view::npos)
            throw ToolError("blame porcelain: unexpected header '" + std::string(header) + "'");
        std::string sha(header.substr(0, 40));
        int orig_line = parse_int(header.substr(sp1 + 1, sp2 - sp1 - 1), "original line");
        auto rest = header.substr(sp2 + 1);
        auto sp3 = rest.find(' ');
        int final_line = parse_int(rest.substr(0, sp3), "final line");

        auto& info = commits[sha];
        while (i < lines.size() && (lines[i].empty() || lines[i].front() != '\t')) {
            auto kv = lines[i++];
            auto space = kv.find(' ');
            auto key = kv.substr(0, space);
            auto value = space == std::string_view::npos ? std::string_view {} : kv.substr(space + 1);
            if (key == "author")
                info.author = std::string(value);
            else if (key == "author-mail")
                info.mail = strip_angle_brackets(value);
            else if (key == "filename")
                info.filename = unquote_c_style(value);
        }
        if (i >= lines.size())
            throw ToolError("blame porcelain: missing content line for line " + std::to_string(final_line));
        ++i; // "\t<content>"

        if (final_line != static_cast<int>(result.lines.size()) + 1)
            throw ToolError("blame porcelain: line " + std::to_string(final_line) + " out of order");
        result.lines.push_back({ final_line, orig_line, sha, info.filename, info.mail, info.author });
    }
    result.spans = merge_blame_spans(result.lines);
    return result;
}

std::vector<BlameSpan> merge_blame_spans(const std::vector<BlameLine>& lines)
{
    std::vector<BlameSpan> spans;
    for (const auto& line : lines) {
        if (!spans.empty() && spans.back().origin_commit == line.origin_commit
            && spans.back().start_line + spans.back().line_count == line.line) {
            ++spans.back().line_count;
            continue;
        }
        spans.push_back({ line.line, 1, line.origin_commit, line.origin_author_email, line.origin_author_name });
    }
    return spans;
}

GitClient::GitClient(std::string git_binary)
    : git_binary_(std::move(git_binary))
{
}

std::string resolve_git_binary(std::string configured)
{
    if (const char* env = std::getenv("SSTUB_MINER_GIT"); env && *env)
        return env;
    return configured.empty() ? std::string("git") : configured;
}

std::shared_ptr<std::mutex> GitClient::lock_for(const fs::path& dir) const
{
    std::lock_guard guard(locks_mutex_);
    auto& slot = locks_[dir];
    if (!slot)
        slot = std::make_shared<std::mutex>();
    return slot;
}

std::string GitClient::run_git(const RepoHandle& repo, const std::vector<std::string>& args, std::string_view what) const
{
    std::vector<std::string> argv { git_binary_, "-C", repo.local_path.string(), "-c", "core.quotePath=true" };
    argv.insert(argv.end(), args.begin(), args.end());
    auto result = run_process(argv);
    if (result.exit_code != 0) {
        auto message = std::string(what) + ": " + std::string(trim(result.err));
        if (looks_like_missing_object(result.err))
            throw NotFound(message);
        throw ToolError(message + " (exit " + std::to_string(result.exit_code) + ")");
    }
    return std::move(result.out);
}

RepoHandle GitClient::acquire_repo(std::string_view project_name, const fs::path& repos_dir, bool clone_missing) const
{
    auto [owner, name] = split_project_name(project_name);
    RepoHandle handle;
    handle.project_name = std::string(project_name);
    handle.local_path = repos_dir / (owner + "__" + name);
    handle.origin_url = clone_base_url_ + "/" + owner + "/" + name;

    auto lock = lock_for(fs::absolute(handle.local_path).lexically_normal());
    std::lock_guard guard(*lock);

    std::error_code ec;
    if (!fs::exists(handle.local_path, ec)) {
        if (!clone_missing)
            throw RepoUnavailable(handle.local_path.string() + " does not exist and cloning is disabled");
        fs::create_directories(repos_dir, ec);
        auto staging = handle.local_path;
        staging += ".partial-" + std::to_string(::getpid());
        fs::remove_all(staging, ec);
        ProcessResult cloned;
        try {
            cloned = run_process({ git_binary_, "clone", "--quiet", "--no-checkout", handle.origin_url, staging.string() });
        } catch (const ToolError& e) {
            throw RepoUnavailable(std::string("clone of ") + handle.origin_url + " failed: " + e.what());
        }
        if (cloned.exit_code != 0) {
            fs::remove_all(staging, ec);
            throw RepoUnavailable("clone of " + handle.origin_url + " failed: " + std::string(trim(cloned.err)));
        }
        fs::rename(staging, handle.local_path, ec);
        if (ec)
            throw RepoUnavailable("cannot move clone into place: " + ec.message());
    }

    ProcessResult probe;
    try {
        probe = run_process({ git_binary_, "-C", handle.local_path.string(), "rev-parse", "--absolute-git-dir",
            "--is-shallow-repository" });
    } catch (const ToolError& e) {
        throw RepoUnavailable(e.what());
    }
    auto probe_lines = split_lines(probe.out);
    if (probe.exit_code != 0 || probe_lines.size() != 2)
        throw RepoUnavailable(handle.local_path.string() + " is not a git repository: " + std::string(trim(probe.err)));

    // A plain directory nested in some other work tree resolves to that tree's git dir.
    auto git_dir = fs::weakly_canonical(fs::path(std::string(probe_lines[0])));
    auto root = fs::weakly_canonical(handle.local_path);
    if (git_dir != root && git_dir != root / ".git")
        throw RepoUnavailable(handle.local_path.string() + " is not the root of a git repository");
    if (probe_lines[1] == "true")
        throw RepoUnavailable(handle.local_path.string() + " is a shallow clone; full history is required");
    return handle;
}

BlameResult GitClient::blame(const RepoHandle& repo, std::string_view commit, std::string_view path) const
{
    // Whole-file rename following is git's default; -M/-C and -w stay off.
    auto out = run_git(repo, { "blame", "--porcelain", std::string(commit), "--", std::string(path) },
        "blame " + std::string(commit) + " " + std::string(path));
    return parse_blame_porcelain(out);
}

std::string GitClient::file_at(const RepoHandle& repo, std::string_view commit, std::string_view path) const
{
    return run_git(repo, { "cat-file", "blob", std::string(commit) + ":" + std::string(path) },
        "read " + std::string(path) + " at " + std::string(commit));
}

CommitMeta GitClient::commit_meta(const RepoHandle& repo, std::string_view commit) const
{
    // Mailmapped identity, matching what blame reports for the same commit.
    auto out = run_git(repo,
        { "show", "-s", "--no-show-signature", "--format=%H%x00%aN%x00%aE%x00%at%x00%P", std::string(commit), "--" },
        "commit metadata for " + std::string(commit));
    if (!out.empty() && out.back() == '\n')
        out.pop_back();

    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        auto nul = out.find('\0', pos);
        fields.push_back(out.substr(pos, nul == std::string::npos ? std::string::npos : nul - pos));
        if (nul == std::string::npos)
            break;
        pos = nul + 1;
    }
    if (fields.size() != 5 || !fields[0].size())
        throw ToolError("unexpected commit metadata output for " + std::string(commit));

    CommitMeta meta;
    meta.commit_id = fields[0];
    meta.author_name = fields[1];
    meta.author_email = fields[2];
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), meta.author_time);
    if (ec != std::errc())
        throw ToolError("bad author time '" + fields[3] + "' for " + std::string(commit));
    std::string_view parents = fields[4];
    while (!parents.empty()) {
        auto sp = parents.find(' ');
        meta.parent_ids.emplace_back(parents.substr(0, sp));
        if (sp == std::string_view::npos)
            break;
        parents.remove_prefix(sp + 1);
    }
    return meta;
}

std::string GitClient::commit_patch(const RepoHandle& repo, std::string_view commit) const
{
    // Merges are diffed against their first parent only; roots against the empty tree.
    return run_git(repo,
        { "diff-tree", "-p", "-M", "--root", "--diff-merges=first-parent", "--no-commit-id", "--no-color", "--no-ext-diff",
            std::string(commit), "--" },
        "patch of " + std::string(commit));
}

bool GitClient::is_ancestor(const RepoHandle& repo, std::string_view ancestor, std::string_view descendant) const
{
    auto result = run_process({ git_binary_, "-C", repo.local_path.string(), "merge-base", "--is-ancestor",
        std::string(ancestor), std::string(descendant) });
    if (result.exit_code == 0)
        return true;
    if (result.exit_code == 1)
        return false;
    throw NotFound("merge-base " + std::string(ancestor) + " " + std::string(descendant) + ": " + std::string(trim(result.err)));
}

} // namespace sstub

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sstub {

enum class LineTag { Context, Removed, Added };

struct HunkLine {
    LineTag tag = LineTag::Context;
    std::string text;
    // Followed by "\ No newline at end of file".
    bool no_newline = false;

    bool operator==(const HunkLine&) const = default;
};

struct Hunk {
    int old_start = 0;
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
    // Text after the closing "@@", including its leading space.
    std::string section;
    std::vector<HunkLine> lines;

    bool operator==(const Hunk&) const = default;
};

struct FilePatch {
    std::optional<std::string> old_path;
    std::optional<std::string> new_path;
    std::vector<Hunk> hunks;

    bool operator==(const FilePatch&) const = default;
};

/// Parses git-style unified diff text. Throws ParseError (1-based line number)
/// on malformed hunk headers or truncated hunks.
std::vector<FilePatch> parse_patch(std::string_view diff_text);

/// Parses "@@ -a[,b] +c[,d] @@..." into the header fields of `hunk`.
bool parse_hunk_header(std::string_view line, Hunk& hunk);

std::string render_hunk_header(const Hunk& hunk);
/// Header plus body, exactly as git prints it.
std::string render_hunk(const Hunk& hunk);

enum class LineClass { AddedNew, ModifiedExisting, NotTouched };

std::string_view to_string(LineClass c);

/// Reorders each change block (maximal run of non-context lines) so that its
/// removals precede its additions, keeping relative order within each kind.
Hunk normalize_change_blocks(const Hunk& hunk);

/// Classifies a post-image line: an added line is a modification when the
/// maximal run of added lines containing it is immediately preceded by a
/// removal in the (normalized) hunk body. Throws RangeError for lines that
/// cannot exist in the post-image.
LineClass classify_new_line(const FilePatch& patch, int new_line);

/// Picks the file patch whose post-image path is `path`, if any.
const FilePatch* find_file_patch(const std::vector<FilePatch>& patches, std::string_view path);

} // namespace sstub

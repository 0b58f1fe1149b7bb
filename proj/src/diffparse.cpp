#include "sstub/diffparse.hpp"

#include "sstub/errors.hpp"
#include "sstub/text.hpp"

#include <algorithm>
#include <charconv>

namespace sstub {

namespace {

constexpr std::string_view no_newline_marker = "\\ No newline at end of file";

bool parse_range(std::string_view text, int& start, int& count)
{
    auto comma = text.find(',');
    auto start_text = text.substr(0, comma);
    auto [p1, e1] = std::from_chars(start_text.data(), start_text.data() + start_text.size(), start);
    if (start_text.empty() || e1 != std::errc() || p1 != start_text.data() + start_text.size() || start < 0)
        return false;
    if (comma == std::string_view::npos) {
        count = 1;
        return true;
    }
    auto count_text = text.substr(comma + 1);
    auto [p2, e2] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    return !count_text.empty() && e2 == std::errc() && p2 == count_text.data() + count_text.size() && count >= 0;
}

std::string render_range(int start, int count)
{
    if (count == 1)
        return std::to_string(start);
    return std::to_string(start) + "," + std::to_string(count);
}

std::optional<std::string> header_path(std::string_view raw, char side)
{
    // "--- a/path\t<timestamp>" from non-git tools carries a trailing timestamp.
    if (!raw.empty() && raw.front() != '"') {
        if (auto tab = raw.find('\t'); tab != std::string_view::npos)
            raw = raw.substr(0, tab);
    }
    auto path = unquote_c_style(raw);
    if (path == "/dev/null")
        return std::nullopt;
    if (path.size() > 2 && path[0] == side && path[1] == '/')
        path.erase(0, 2);
    return path;
}

// "diff --git a/X b/Y": the only reliable split for unquoted names with spaces
// is when both names are equal, which is the common case.
void paths_from_git_header(std::string_view rest, FilePatch& patch)
{
    if (!rest.empty() && rest.front() == '"') {
        auto close = rest.find("\" ", 1);
        while (close != std::string_view::npos && rest[close - 1] == '\\')
            close = rest.find("\" ", close + 1);
        if (close == std::string_view::npos)
            return;
        patch.old_path = header_path(rest.substr(0, close + 1), 'a');
        patch.new_path = header_path(rest.substr(close + 2), 'b');
        return;
    }
    if (rest.size() % 2 == 1) {
        auto half = rest.size() / 2;
        auto left = rest.substr(0, half);
        auto right = rest.substr(half + 1);
        if (rest[half] == ' ' && left.size() > 2 && left.substr(2) == right.substr(2)) {
            patch.old_path = header_path(left, 'a');
            patch.new_path = header_path(right, 'b');
            return;
        }
    }
    auto split = rest.find(" b/");
    if (split == std::string_view::npos)
        split = rest.find(" \"b/");
    if (split == std::string_view::npos)
        return;
    patch.old_path = header_path(rest.substr(0, split), 'a');
    patch.new_path = header_path(rest.substr(split + 1), 'b');
}

} // namespace

bool parse_hunk_header(std::string_view line, Hunk& hunk)
{
    if (!starts_with(line, "@@ -"))
        return false;
    auto rest = line.substr(4);
    auto space = rest.find(' ');
    if (space == std::string_view::npos)
        return false;
    if (!parse_range(rest.substr(0, space), hunk.old_start, hunk.old_count))
        return false;
    rest = rest.substr(space + 1);
    if (rest.empty() || rest.front() != '+')
        return false;
    rest.remove_prefix(1);
    space = rest.find(' ');
    if (space == std::string_view::npos)
        return false;
    if (!parse_range(rest.substr(0, space), hunk.new_start, hunk.new_count))
        return false;
    rest = rest.substr(space + 1);
    if (!starts_with(rest, "@@"))
        return false;
    hunk.section = std::string(rest.substr(2));
    return true;
}

std::string render_hunk_header(const Hunk& hunk)
{
    return "@@ -" + render_range(hunk.old_start, hunk.old_count) + " +" + render_range(hunk.new_start, hunk.new_count) + " @@"
        + hunk.section;
}

std::string render_hunk(const Hunk& hunk)
{
    std::string out = render_hunk_header(hunk);
    out += '\n';
    for (const auto& line : hunk.lines) {
        out += line.tag == LineTag::Context ? ' ' : line.tag == LineTag::Removed ? '-' : '+';
        out += line.text;
        out += '\n';
        if (line.no_newline) {
            out += no_newline_marker;
            out += '\n';
        }
    }
    return out;
}

std::vector<FilePatch> parse_patch(std::string_view diff_text)
{
    std::vector<FilePatch> patches;
    auto lines = split_lines(diff_text);

    // Whether the current file patch still accepts "---"/"+++" headers.
    bool in_header = false;

    auto start_file = [&] {
        patches.emplace_back();
        in_header = true;
    };

    std::size_t i = 0;
    while (i < lines.size()) {
        const auto line = lines[i];
        const std::size_t line_no = i + 1;
        ++i;

        if (starts_with(line, "diff --git ")) {
            start_file();
            paths_from_git_header(line.substr(11), patches.back());
            continue;
        }
        if (starts_with(line, "@@ ")) {
            Hunk hunk;
            if (!parse_hunk_header(line, hunk))
                throw ParseError("malformed hunk header '" + std::string(line) + "'", line_no);
            if (patches.empty())
                patches.emplace_back();
            in_header = false;

            int old_left = hunk.old_count;
            int new_left = hunk.new_count;
            while (old_left > 0 || new_left > 0) {
                if (i >= lines.size())
                    throw ParseError("hunk truncated: " + std::to_string(old_left) + " old and " + std::to_string(new_left)
                            + " new lines missing",
                        line_no);
                auto body = lines[i];
                const std::size_t body_no = ++i;
                if (body.empty())
                    throw ParseError("empty line inside hunk", body_no);
                HunkLine entry;
                entry.text = std::string(body.substr(1));
                switch (body.front()) {
                case ' ':
                    entry.tag = LineTag::Context;
                    --old_left;
                    --new_left;
                    break;
                case '-':
                    entry.tag = LineTag::Removed;
                    --old_left;
                    break;
                case '+':
                    entry.tag = LineTag::Added;
                    --new_left;
                    break;
                case '\\':
                    if (hunk.lines.empty())
                        throw ParseError("no-newline marker before any hunk line", body_no);
                    hunk.lines.back().no_newline = true;
                    continue;
                default:
                    throw ParseError("unexpected line inside hunk '" + std::string(body) + "'", body_no);
                }
                if (old_left < 0 || new_left < 0)
                    throw ParseError("hunk body longer than its header declares", body_no);
                hunk.lines.push_back(std::move(entry));
            }
            if (i < lines.size() && starts_with(lines[i], "\\")) {
                hunk.lines.back().no_newline = true;
                ++i;
            }

            auto& hunks = patches.back().hunks;
            if (!hunks.empty()) {
                const auto& prev = hunks.back();
                if (hunk.old_start < prev.old_start + prev.old_count || hunk.new_start < prev.new_start + prev.new_count)
                    throw ParseError("hunk overlaps or precedes the previous hunk", line_no);
            }
            hunks.push_back(std::move(hunk));
            continue;
        }
        if (starts_with(line, "--- ")) {
            if (patches.empty() || !in_header || !patches.back().hunks.empty())
                start_file();
            patches.back().old_path = header_path(line.substr(4), 'a');
            continue;
        }
        if (starts_with(line, "+++ ") && in_header && !patches.empty()) {
            patches.back().new_path = header_path(line.substr(4), 'b');
            continue;
        }
        if (!in_header || patches.empty())
            continue;

        auto& patch = patches.back();
        if (starts_with(line, "new file mode"))
            patch.old_path.reset();
        else if (starts_with(line, "deleted file mode"))
            patch.new_path.reset();
        else if (starts_with(line, "rename from ") || starts_with(line, "copy from "))
            patch.old_path = unquote_c_style(line.substr(line.find(" from ") + 6));
        else if (starts_with(line, "rename to ") || starts_with(line, "copy to "))
            patch.new_path = unquote_c_style(line.substr(line.find(" to ") + 4));
    }
    return patches;
}

std::string_view to_string(LineClass c)
{
    switch (c) {
    case LineClass::AddedNew:
        return "AddedNew";
    case LineClass::ModifiedExisting:
        return "ModifiedExisting";
    case LineClass::NotTouched:
        break;
    }
    return "NotTouched";
}

Hunk normalize_change_blocks(const Hunk& hunk)
{
    Hunk out = hunk;
    auto& lines = out.lines;
    auto it = lines.begin();
    while (it != lines.end()) {
        if (it->tag == LineTag::Context) {
            ++it;
            continue;
        }
        auto block_end = std::find_if(it, lines.end(), [](const HunkLine& l) { return l.tag == LineTag::Context; });
        std::stable_partition(it, block_end, [](const HunkLine& l) { return l.tag == LineTag::Removed; });
        it = block_end;
    }
    return out;
}

LineClass classify_new_line(const FilePatch& patch, int new_line)
{
    if (new_line < 1)
        throw RangeError("post-image line " + std::to_string(new_line) + " is not a valid line number", 0, 0, 0);
    if (patch.old_path && !patch.new_path)
        throw RangeError("file is deleted by the patch; it has no post-image", 0, 0, 0);
    if (!patch.old_path && patch.new_path) {
        int length = 0;
        for (const auto& h : patch.hunks)
            length += h.new_count;
        if (new_line > length)
            throw RangeError("post-image line " + std::to_string(new_line) + " beyond new file of "
                    + std::to_string(length) + " lines",
                static_cast<std::size_t>(length), static_cast<std::size_t>(new_line), 1);
    }

    for (const auto& raw : patch.hunks) {
        if (raw.new_count == 0 || new_line < raw.new_start || new_line >= raw.new_start + raw.new_count)
            continue;
        auto hunk = normalize_change_blocks(raw);
        int current = hunk.new_start;
        const auto& lines = hunk.lines;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            if (lines[k].tag == LineTag::Removed)
                continue;
            if (current != new_line) {
                ++current;
                continue;
            }
            if (lines[k].tag == LineTag::Context)
                return LineClass::NotTouched;
            std::size_t run_start = k;
            while (run_start > 0 && lines[run_start - 1].tag == LineTag::Added)
                --run_start;
            if (run_start > 0 && lines[run_start - 1].tag == LineTag::Removed)
                return LineClass::ModifiedExisting;
            return LineClass::AddedNew;
        }
    }
    return LineClass::NotTouched;
}

const FilePatch* find_file_patch(const std::vector<FilePatch>& patches, std::string_view path)
{
    for (const auto& p : patches) {
        if (p.new_path && *p.new_path == path)
            return &p;
    }
    return nullptr;
}

} // namespace sstub

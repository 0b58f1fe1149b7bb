#include "sstub/dataset.hpp"

#include "sstub/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace sstub {

namespace {

using nlohmann::json;

bool require_string(const json& object, const char* field, std::size_t index, std::string& out, std::vector<Diagnostic>& diagnostics)
{
    auto it = object.find(field);
    if (it == object.end()) {
        diagnostics.push_back({ index, field, "missing field" });
        return false;
    }
    if (!it->is_string()) {
        diagnostics.push_back({ index, field, std::string("expected string, got ") + it->type_name() });
        return false;
    }
    out = it->get<std::string>();
    return true;
}

bool require_integer(const json& object, const char* field, std::size_t index, std::int64_t minimum, std::int64_t& out, std::vector<Diagnostic>& diagnostics)
{
    auto it = object.find(field);
    if (it == object.end()) {
        diagnostics.push_back({ index, field, "missing field" });
        return false;
    }
    if (!it->is_number_integer()) {
        diagnostics.push_back({ index, field, std::string("expected integer, got ") + it->type_name() });
        return false;
    }
    out = it->get<std::int64_t>();
    if (out < minimum) {
        diagnostics.push_back({ index, field, "must be >= " + std::to_string(minimum) + ", got " + std::to_string(out) });
        return false;
    }
    return true;
}

} // namespace

bool is_commit_id(std::string_view text)
{
    return text.size() == 40 && std::all_of(text.begin(), text.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

bool record_from_json(const json& object, std::size_t index, SStubRecord& out, std::vector<Diagnostic>& diagnostics)
{
    if (!object.is_object()) {
        diagnostics.push_back({ index, "", std::string("expected object, got ") + object.type_name() });
        return false;
    }

    SStubRecord r;
    r.record_index = index;
    // Evaluate every field so one bad object reports all of its problems.
    bool ok = true;
    ok &= require_string(object, "projectName", index, r.project_name, diagnostics);
    ok &= require_string(object, "fixCommitSHA1", index, r.fix_commit, diagnostics);
    ok &= require_string(object, "fixCommitParentSHA1", index, r.fix_parent_commit, diagnostics);
    ok &= require_string(object, "bugFilePath", index, r.bug_file_path, diagnostics);
    ok &= require_string(object, "fixFilePath", index, r.fix_file_path, diagnostics);
    ok &= require_integer(object, "bugLineNum", index, 1, r.bug_line_num, diagnostics);
    ok &= require_integer(object, "bugNodeStartChar", index, 0, r.bug_node_start_char, diagnostics);
    ok &= require_integer(object, "bugNodeLength", index, 1, r.bug_node_length, diagnostics);
    ok &= require_string(object, "sourceBeforeFix", index, r.source_before_fix, diagnostics);
    ok &= require_string(object, "sourceAfterFix", index, r.source_after_fix, diagnostics);
    ok &= require_string(object, "bugType", index, r.bug_type, diagnostics);
    if (!ok)
        return false;

    if (!is_commit_id(r.fix_commit)) {
        diagnostics.push_back({ index, "fixCommitSHA1", "not a 40-hex commit id" });
        ok = false;
    }
    if (!is_commit_id(r.fix_parent_commit)) {
        diagnostics.push_back({ index, "fixCommitParentSHA1", "not a 40-hex commit id" });
        ok = false;
    }
    if (ok && r.fix_commit == r.fix_parent_commit) {
        diagnostics.push_back({ index, "fixCommitParentSHA1", "equals fixCommitSHA1" });
        ok = false;
    }
    if (r.source_before_fix == r.source_after_fix) {
        diagnostics.push_back({ index, "sourceAfterFix", "equals sourceBeforeFix" });
        ok = false;
    }
    if (r.project_name.find('.') == std::string::npos) {
        diagnostics.push_back({ index, "projectName", "expected owner.repo" });
        ok = false;
    }
    if (ok)
        out = std::move(r);
    return ok;
}

json record_to_json(const SStubRecord& r)
{
    return json {
        { "record_index", r.record_index },
        { "projectName", r.project_name },
        { "fixCommitSHA1", r.fix_commit },
        { "fixCommitParentSHA1", r.fix_parent_commit },
        { "bugFilePath", r.bug_file_path },
        { "fixFilePath", r.fix_file_path },
        { "bugLineNum", r.bug_line_num },
        { "bugNodeStartChar", r.bug_node_start_char },
        { "bugNodeLength", r.bug_node_length },
        { "sourceBeforeFix", r.source_before_fix },
        { "sourceAfterFix", r.source_after_fix },
        { "bugType", r.bug_type },
    };
}

json diagnostic_to_json(const Diagnostic& d)
{
    return json { { "record_index", d.record_index }, { "field", d.field }, { "message", d.message } };
}

ParsedDataset parse_dataset_text(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw IngestError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_array())
        throw IngestError(std::string("dataset must be a JSON array, got ") + doc.type_name());

    ParsedDataset parsed;
    parsed.input_objects = doc.size();
    for (std::size_t i = 0; i < doc.size(); ++i) {
        SStubRecord record;
        if (record_from_json(doc[i], i, record, parsed.diagnostics))
            parsed.records.push_back(std::move(record));
    }
    return parsed;
}

ParsedDataset parse_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestError("cannot read dataset " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad())
        throw IngestError("error reading dataset " + path.string());
    return parse_dataset_text(buffer.str());
}

std::vector<std::size_t> scalar_boundaries(std::string_view s)
{
    std::vector<std::size_t> out;
    out.reserve(s.size() + 1);
    std::size_t i = 0;
    auto cont = [&](std::size_t k) {
        return k < s.size() && (static_cast<unsigned char>(s[k]) & 0xC0) == 0x80;
    };
    while (i < s.size()) {
        out.push_back(i);
        auto b = static_cast<unsigned char>(s[i]);
        std::size_t width = 1;
        if (b >= 0xC2 && b <= 0xDF) {
            width = cont(i + 1) ? 2 : 1;
        } else if (b >= 0xE0 && b <= 0xEF) {
            if (cont(i + 1) && cont(i + 2)) {
                auto b1 = static_cast<unsigned char>(s[i + 1]);
                bool overlong = b == 0xE0 && b1 < 0xA0;
                bool surrogate = b == 0xED && b1 >= 0xA0;
                if (!overlong && !surrogate)
                    width = 3;
            }
        } else if (b >= 0xF0 && b <= 0xF4) {
            if (cont(i + 1) && cont(i + 2) && cont(i + 3)) {
                auto b1 = static_cast<unsigned char>(s[i + 1]);
                bool overlong = b == 0xF0 && b1 < 0x90;
                bool too_large = b == 0xF4 && b1 >= 0x90;
                if (!overlong && !too_large)
                    width = 4;
            }
        }
        // Anything else (ASCII, stray continuation, invalid lead) is one unit.
        i += width;
    }
    out.push_back(s.size());
    return out;
}

BlockDerivation derive_block(std::string_view text, std::int64_t start_char, std::int64_t length, std::int64_t bug_line_hint)
{
    if (start_char < 0 || length < 1)
        throw RangeError("invalid character range " + std::to_string(start_char) + "+" + std::to_string(length), text.size(),
            static_cast<std::size_t>(std::max<std::int64_t>(start_char, 0)), static_cast<std::size_t>(std::max<std::int64_t>(length, 0)));

    const auto start = static_cast<std::size_t>(start_char);
    const auto len = static_cast<std::size_t>(length);

    BlockDerivation d;
    std::size_t begin_byte = 0, end_byte = 0, last_byte = 0;

    auto bounds = scalar_boundaries(text);
    const std::size_t scalar_count = bounds.size() - 1;
    if (start + len <= scalar_count) {
        begin_byte = bounds[start];
        end_byte = bounds[start + len];
        last_byte = bounds[start + len - 1];
    } else if (start + len <= text.size()) {
        d.unit = OffsetUnit::Byte;
        begin_byte = start;
        end_byte = start + len;
        last_byte = end_byte - 1;
        d.notes.push_back("character range exceeds " + std::to_string(scalar_count)
            + " decoded characters; interpreted offsets as byte positions");
    } else {
        throw RangeError("range " + std::to_string(start) + "+" + std::to_string(len) + " exceeds file of "
                + std::to_string(scalar_count) + " characters (" + std::to_string(text.size()) + " bytes)",
            scalar_count, start, len);
    }

    auto newlines_before = [&](std::size_t byte) {
        return static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    };
    d.block.start_line = 1 + newlines_before(begin_byte);
    d.block.end_line = 1 + newlines_before(last_byte);
    d.block.text = std::string(text.substr(begin_byte, end_byte - begin_byte));

    auto hint = std::clamp<std::int64_t>(bug_line_hint, d.block.start_line, d.block.end_line);
    d.block.bug_line = static_cast<int>(hint);
    if (hint != bug_line_hint) {
        d.hint_clamped = true;
        d.notes.push_back("bugLineNum " + std::to_string(bug_line_hint) + " outside block lines "
            + std::to_string(d.block.start_line) + ".." + std::to_string(d.block.end_line) + "; clamped to "
            + std::to_string(hint));
    }
    return d;
}

} // namespace sstub

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sstub {

/// One ManySStuBs4J entry. `record_index` is the position of the object in
/// the input array and stays attached to the record through every stage.
struct SStubRecord {
    std::size_t record_index = 0;
    std::string project_name;
    std::string fix_commit;
    std::string fix_parent_commit;
    std::string bug_file_path;
    std::string fix_file_path;
    std::int64_t bug_line_num = 1;
    std::int64_t bug_node_start_char = 0;
    std::int64_t bug_node_length = 1;
    std::string source_before_fix;
    std::string source_after_fix;
    std::string bug_type;

    bool operator==(const SStubRecord&) const = default;
};

struct Diagnostic {
    std::size_t record_index = 0;
    std::string field;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

struct ParsedDataset {
    std::vector<SStubRecord> records;
    // Only objects that were rejected produce diagnostics here.
    std::vector<Diagnostic> diagnostics;
    std::size_t input_objects = 0;
};

/// Reads a JSON array of ManySStuBs4J objects. Throws IngestError when the
/// file cannot be read or is not a JSON array; bad objects only yield
/// diagnostics.
ParsedDataset parse_dataset(const std::filesystem::path& path);
ParsedDataset parse_dataset_text(std::string_view json_text);

/// Validates one object; on failure appends diagnostics and returns false.
bool record_from_json(const nlohmann::json& object, std::size_t index, SStubRecord& out, std::vector<Diagnostic>& diagnostics);

/// ManySStuBs4J field names plus "record_index".
nlohmann::json record_to_json(const SStubRecord& record);
nlohmann::json diagnostic_to_json(const Diagnostic& diagnostic);

bool is_commit_id(std::string_view text);

/// The buggy code block: node character range widened to whole line numbers.
struct BugBlock {
    int start_line = 1;
    int end_line = 1;
    std::string text;
    int bug_line = 1;

    bool operator==(const BugBlock&) const = default;
    int line_count() const { return end_line - start_line + 1; }
    bool contains_line(int line) const { return line >= start_line && line <= end_line; }
};

enum class OffsetUnit { ScalarValue, Byte };

struct BlockDerivation {
    BugBlock block;
    OffsetUnit unit = OffsetUnit::ScalarValue;
    bool hint_clamped = false;
    std::vector<std::string> notes;
};

/// Maps [start_char, start_char + length) onto line numbers of `file_text`.
/// Offsets count Unicode scalar values of the UTF-8 decoded text; each
/// invalid byte counts as one replacement character. When that range does
/// not fit, the offsets are retried as byte positions (noted in `notes`).
/// Throws RangeError when neither interpretation fits.
BlockDerivation derive_block(std::string_view file_text, std::int64_t start_char, std::int64_t length, std::int64_t bug_line_hint);

inline BugBlock char_range_to_block(std::string_view file_text, std::int64_t start_char, std::int64_t length, std::int64_t bug_line_hint)
{
    return derive_block(file_text, start_char, length, bug_line_hint).block;
}

/// Byte offset at which each scalar value starts, plus a trailing entry equal to text.size().
std::vector<std::size_t> scalar_boundaries(std::string_view utf8_text);

} // namespace sstub

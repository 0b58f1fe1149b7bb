#pragma once

// Reference computations used to check the library from the outside. None of
// these call into the code under test.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sstub::testing {

std::string encode_utf8(const std::vector<char32_t>& code_points);

/// Line (1-based) of every code point, counted directly on the code point list.
std::vector<int> code_point_lines(const std::vector<char32_t>& code_points);

struct ReferenceStats {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
};

/// Welford running mean/variance plus a full sort for the lower-middle median.
ReferenceStats reference_stats(const std::vector<double>& values);

bool close_relative(double actual, double expected, double tolerance);

struct PlainBlameLine {
    std::string commit;
    int line = 0;
};

/// Runs `git blame -l -s --root <commit> -- <path>` and reads the commit of each line.
std::vector<PlainBlameLine> reference_blame(const std::filesystem::path& repo, const std::string& commit,
    const std::string& path);

struct PlainSpan {
    int start_line = 0;
    int line_count = 0;
    std::string commit;

    bool operator==(const PlainSpan&) const = default;
};

std::vector<PlainSpan> merge_plain(const std::vector<PlainBlameLine>& lines);

/// `git show --format= -M --no-color <commit>`.
std::string reference_patch(const std::filesystem::path& repo, const std::string& commit);

} // namespace sstub::testing

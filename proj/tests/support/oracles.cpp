#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace sstub::testing {

std::string encode_utf8(const std::vector<char32_t>& code_points)
{
    std::string out;
    for (char32_t cp : code_points) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }
    return out;
}

std::vector<int> code_point_lines(const std::vector<char32_t>& code_points)
{
    std::vector<int> lines;
    int line = 1;
    for (char32_t cp : code_points) {
        lines.push_back(line);
        if (cp == U'\n')
            ++line;
    }
    return lines;
}

ReferenceStats reference_stats(const std::vector<double>& values)
{
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : values) {
        ++n;
        double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    ReferenceStats s;
    s.mean = mean;
    s.median = sorted[(sorted.size() - 1) / 2];
    s.stddev = std::sqrt(m2 / static_cast<double>(n));
    return s;
}

bool close_relative(double actual, double expected, double tolerance)
{
    if (actual == expected)
        return true;
    double scale = std::max(std::fabs(expected), 1e-300);
    return std::fabs(actual - expected) / scale <= tolerance;
}

namespace {

std::string capture(const std::string& command)
{
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(command.c_str(), "r"), ::pclose);
    if (!pipe)
        throw std::runtime_error("popen failed: " + command);
    std::string out;
    std::array<char, 65536> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0)
        out.append(buf.data(), n);
    int status = ::pclose(pipe.release());
    if (status != 0)
        throw std::runtime_error("command failed: " + command);
    return out;
}

std::string quoted(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

} // namespace

std::vector<PlainBlameLine> reference_blame(const std::filesystem::path& repo, const std::string& commit,
    const std::string& path)
{
    auto out = capture("git -C " + quoted(repo.string()) + " blame -l -s --root " + quoted(commit) + " -- " + quoted(path));
    std::vector<PlainBlameLine> lines;
    std::istringstream in(out);
    std::string row;
    while (std::getline(in, row)) {
        // "<sha40> [<path>] <lineno>) <content>"; the path column shows up after renames.
        PlainBlameLine l;
        l.commit = row.substr(0, 40);
        auto paren = row.find(')', 41);
        auto space = row.rfind(' ', paren);
        l.line = std::stoi(row.substr(space + 1, paren - space - 1));
        lines.push_back(l);
    }
    return lines;
}

std::vector<PlainSpan> merge_plain(const std::vector<PlainBlameLine>& lines)
{
    std::vector<PlainSpan> spans;
    for (const auto& l : lines) {
        if (!spans.empty() && spans.back().commit == l.commit)
            ++spans.back().line_count;
        else
            spans.push_back({ l.line, 1, l.commit });
    }
    return spans;
}

std::string reference_patch(const std::filesystem::path& repo, const std::string& commit)
{
    return capture("git -C " + quoted(repo.string()) + " show --format= -M --no-color " + quoted(commit));
}

} // namespace sstub::testing

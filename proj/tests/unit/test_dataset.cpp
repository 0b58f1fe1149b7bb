#include "doctest.h"

#include "fixture_repo.hpp"
#include "oracles.hpp"

#include "sstub/dataset.hpp"
#include "sstub/errors.hpp"

#include <random>
#include <set>

using namespace sstub;
using namespace sstub::testing;
using nlohmann::json;

namespace {

json valid_object(int n = 0)
{
    return json {
        { "bugType", "CHANGE_OPERATOR" },
        { "fixCommitSHA1", std::string(39, 'a') + static_cast<char>('0' + n % 10) },
        { "fixCommitParentSHA1", std::string(40, 'b') },
        { "bugFilePath", "src/main/java/A.java" },
        { "fixFilePath", "src/main/java/A.java" },
        { "projectName", "apache.commons-lang" },
        { "bugLineNum", 12 },
        { "bugNodeStartChar", 340 },
        { "bugNodeLength", 5 },
        { "fixLineNum", 12 },
        { "fixNodeStartChar", 340 },
        { "fixNodeLength", 5 },
        { "sourceBeforeFix", "a < b" },
        { "sourceAfterFix", "a <= b" },
    };
}

} // namespace

TEST_CASE("array of valid objects")
{
    auto parsed = parse_dataset_text(json::array({ valid_object(1), valid_object(2), valid_object(3) }).dump());
    CHECK(parsed.records.size() == 3);
    CHECK(parsed.diagnostics.empty());
    CHECK(parsed.input_objects == 3);
    CHECK(parsed.records[2].record_index == 2);
    CHECK(parsed.records[0].project_name == "apache.commons-lang");
    CHECK(parsed.records[0].bug_node_length == 5);
}

TEST_CASE("missing field yields a diagnostic naming it")
{
    auto broken = valid_object();
    broken.erase("bugLineNum");
    auto parsed = parse_dataset_text(json::array({ valid_object(), broken }).dump());
    CHECK(parsed.records.size() == 1);
    REQUIRE(parsed.diagnostics.size() == 1);
    CHECK(parsed.diagnostics[0].record_index == 1);
    CHECK(parsed.diagnostics[0].field == "bugLineNum");
}

TEST_CASE("ill-typed and inconsistent objects")
{
    auto typed = valid_object();
    typed["bugNodeLength"] = "5";
    auto short_sha = valid_object();
    short_sha["fixCommitSHA1"] = "abc";
    auto same = valid_object();
    same["sourceAfterFix"] = same["sourceBeforeFix"];
    auto no_dot = valid_object();
    no_dot["projectName"] = "nodot";
    auto zero_len = valid_object();
    zero_len["bugNodeLength"] = 0;
    auto parsed = parse_dataset_text(json::array({ typed, short_sha, same, no_dot, zero_len, 42 }).dump());
    CHECK(parsed.records.empty());
    CHECK(parsed.input_objects == 6);
    std::vector<std::string> fields;
    for (const auto& d : parsed.diagnostics)
        fields.push_back(d.field);
    CHECK(fields == std::vector<std::string> { "bugNodeLength", "fixCommitSHA1", "sourceAfterFix", "projectName", "bugNodeLength", "" });
}

TEST_CASE("every input object is either a record or diagnosed")
{
    std::mt19937 rng(7);
    auto objects = json::array();
    for (int i = 0; i < 300; ++i) {
        auto o = valid_object(i);
        switch (rng() % 4) {
        case 0:
            o.erase("projectName");
            break;
        case 1:
            o["bugLineNum"] = -3;
            break;
        default:
            break;
        }
        objects.push_back(o);
    }
    auto parsed = parse_dataset_text(objects.dump());
    std::set<std::size_t> diagnosed;
    for (const auto& d : parsed.diagnostics)
        diagnosed.insert(d.record_index);
    CHECK(parsed.records.size() + diagnosed.size() == 300);
    for (const auto& r : parsed.records)
        CHECK(diagnosed.count(r.record_index) == 0);
}

TEST_CASE("dataset-sized file")
{
    auto objects = json::array();
    for (int i = 0; i < 25539; ++i)
        objects.push_back(valid_object(i));
    TempDir tmp;
    write_file(tmp.path() / "d.json", objects.dump());
    auto parsed = parse_dataset(tmp.path() / "d.json");
    CHECK(parsed.records.size() == 25539);
    CHECK(parsed.diagnostics.empty());
    CHECK(parsed.records.back().record_index == 25538);
}

TEST_CASE("fatal ingest errors")
{
    CHECK_THROWS_AS(parse_dataset_text("[{"), IngestError);
    CHECK_THROWS_AS(parse_dataset_text("{\"a\":1}"), IngestError);
    CHECK_THROWS_AS(parse_dataset("/nonexistent/dataset.json"), IngestError);
    CHECK(parse_dataset_text("[]").records.empty());
}

TEST_CASE("record json round trip")
{
    std::vector<Diagnostic> diags;
    SStubRecord r;
    REQUIRE(record_from_json(valid_object(4), 9, r, diags));
    SStubRecord back;
    REQUIRE(record_from_json(record_to_json(r), 9, back, diags));
    CHECK(back == r);
    CHECK(record_to_json(r)["record_index"] == 9);
}

TEST_CASE("block derivation examples")
{
    auto a = char_range_to_block("ab\ncd\n", 0, 2, 1);
    CHECK(a.start_line == 1);
    CHECK(a.end_line == 1);
    CHECK(a.text == "ab");

    auto b = char_range_to_block("ab\ncd\nef\n", 3, 5, 2);
    CHECK(b.start_line == 2);
    CHECK(b.end_line == 3);
    CHECK(b.text == "cd\nef");
    CHECK(b.bug_line == 2);
}

TEST_CASE("range ending on a newline stays on that line")
{
    auto b = char_range_to_block("ab\ncd\n", 0, 3, 1);
    CHECK(b.start_line == 1);
    CHECK(b.end_line == 1);
}

TEST_CASE("offsets count code points, not bytes")
{
    // "é" is two bytes; the node "x" is the 6th code point.
    std::string text = "\xC3\xA9\xC3\xA9\n\xC3\xA9\xC3\xA9\nx\n";
    auto d = derive_block(text, 6, 1, 3);
    CHECK(d.unit == OffsetUnit::ScalarValue);
    CHECK(d.block.start_line == 3);
    CHECK(d.block.text == "x");
}

TEST_CASE("byte fallback when the code point range does not fit")
{
    std::string text = "\xC3\xA9\nabc\n"; // 5 code points, 7 bytes
    auto d = derive_block(text, 4, 3, 2);
    CHECK(d.unit == OffsetUnit::Byte);
    CHECK(d.block.text == "bc\n");
    CHECK_FALSE(d.notes.empty());
}

TEST_CASE("invalid bytes count once each")
{
    std::string text = "\xFF\xFE\nz";
    auto d = derive_block(text, 3, 1, 2);
    CHECK(d.unit == OffsetUnit::ScalarValue);
    CHECK(d.block.text == "z");
    CHECK(scalar_boundaries(text).size() == 5);
}

TEST_CASE("out of range")
{
    try {
        char_range_to_block("abc", 2, 5, 1);
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(e.file_length == 3);
        CHECK(e.start == 2);
        CHECK(e.length == 5);
    }
    CHECK_THROWS_AS(char_range_to_block("abc", -1, 1, 1), RangeError);
    CHECK_THROWS_AS(char_range_to_block("abc", 0, 0, 1), RangeError);
}

TEST_CASE("bug line hint is clamped into the block")
{
    auto d = derive_block("a\nb\nc\nd\n", 2, 3, 9);
    CHECK(d.block.start_line == 2);
    CHECK(d.block.end_line == 3);
    CHECK(d.block.bug_line == 3);
    CHECK(d.hint_clamped);
}

TEST_CASE("random ranges agree with the code point line oracle")
{
    std::mt19937_64 rng(20240611);
    const std::vector<char32_t> alphabet { U'a', U'Z', U' ', U'\t', U'\n', U'\n', U';', U'é', U'中', U'\U0001F600',
        U'Δ', U'{', U'}' };
    for (int iteration = 0; iteration < 2000; ++iteration) {
        std::vector<char32_t> cps(1 + rng() % 200);
        for (auto& cp : cps)
            cp = alphabet[rng() % alphabet.size()];
        auto lines = code_point_lines(cps);
        auto start = rng() % cps.size();
        auto length = 1 + rng() % (cps.size() - start);
        auto text = encode_utf8(cps);

        auto d = derive_block(text, static_cast<std::int64_t>(start), static_cast<std::int64_t>(length), 1);
        std::vector<char32_t> slice(cps.begin() + static_cast<std::ptrdiff_t>(start),
            cps.begin() + static_cast<std::ptrdiff_t>(start + length));
        INFO("iteration " << iteration);
        REQUIRE(d.unit == OffsetUnit::ScalarValue);
        CHECK(d.block.start_line == lines[start]);
        CHECK(d.block.end_line == lines[start + length - 1]);
        CHECK(d.block.text == encode_utf8(slice));
    }
}

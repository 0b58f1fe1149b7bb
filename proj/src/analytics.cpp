#include "sstub/analytics.hpp"

#include "sstub/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sstub {

using nlohmann::json;

LifecycleEntry build_lifecycle(const MiningRecord& mining, const CommitMeta& fix_meta, const CommitMeta& origin_meta)
{
    if (mining.origin.status != ResolutionStatus::Resolved)
        throw Error("record " + std::to_string(mining.record_index) + " has no resolved origin");

    LifecycleRecord r;
    r.record_index = mining.record_index;
    r.origin_time = origin_meta.author_time;
    r.fix_time = fix_meta.author_time;
    if (r.fix_time < r.origin_time) {
        return Excluded { mining.record_index, ExclusionReason::NegativeDuration,
            "fix time " + std::to_string(r.fix_time) + " precedes origin time " + std::to_string(r.origin_time) };
    }
    r.duration_days = static_cast<double>(r.fix_time - r.origin_time) / seconds_per_day;
    r.fixed_by_same_author = identity_key(fix_meta.author_email, fix_meta.author_name)
        == identity_key(origin_meta.author_email, origin_meta.author_name);
    return r;
}

StatSummary summarize_durations(std::span<const double> durations)
{
    if (durations.empty())
        throw EmptyGroup("cannot summarize an empty group");

    StatSummary s;
    s.count = durations.size();
    const auto n = static_cast<double>(s.count);

    double sum = 0.0;
    for (double d : durations)
        sum += d;
    s.mean_days = sum / n;

    double squares = 0.0;
    for (double d : durations)
        squares += (d - s.mean_days) * (d - s.mean_days);
    s.stddev_days = std::sqrt(squares / n);

    std::vector<double> sorted(durations.begin(), durations.end());
    auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    s.median_days = *mid;
    return s;
}

StatSummary summarize(std::span<const LifecycleRecord> group)
{
    std::vector<double> durations;
    durations.reserve(group.size());
    for (const auto& r : group)
        durations.push_back(r.duration_days);
    return summarize_durations(durations);
}

std::optional<double> Percentage::percent() const
{
    if (denominator == 0)
        return std::nullopt;
    return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

RqPercentages rq_percentages(std::span<const MiningRecord> mining, std::span<const LifecycleRecord> lifecycle)
{
    RqPercentages p;
    auto tally = [](Surrounding s, Percentage& strict, Percentage& inclusive) {
        ++inclusive.denominator;
        if (s == Surrounding::NoSurrounding) {
            ++inclusive.numerator;
            return;
        }
        ++strict.denominator;
        if (s == Surrounding::Same) {
            ++strict.numerator;
            ++inclusive.numerator;
        }
    };

    for (const auto& m : mining) {
        if (m.origin.status != ResolutionStatus::Resolved || !m.introduction)
            continue;
        const auto& intro = *m.introduction;
        tally(intro.same_author_as_surrounding, p.same_author_surrounding, p.same_author_surrounding_inclusive);
        tally(intro.same_commit_as_surrounding, p.same_commit_surrounding, p.same_commit_surrounding_inclusive);
        if (intro.mode) {
            ++p.added_new.denominator;
            ++p.modified_existing.denominator;
            if (*intro.mode == IntroductionMode::AddedNew)
                ++p.added_new.numerator;
            else
                ++p.modified_existing.numerator;
        }
    }
    for (const auto& l : lifecycle) {
        ++p.fixed_by_same_author.denominator;
        if (l.fixed_by_same_author)
            ++p.fixed_by_same_author.numerator;
    }
    return p;
}

std::size_t record_index_of(const LifecycleEntry& entry)
{
    return std::visit([](const auto& e) { return e.record_index; }, entry);
}

json lifecycle_entry_to_json(const LifecycleEntry& entry)
{
    if (const auto* r = std::get_if<LifecycleRecord>(&entry)) {
        return json { { "record_index", r->record_index }, { "origin_time", r->origin_time }, { "fix_time", r->fix_time },
            { "duration_days", r->duration_days }, { "fixed_by_same_author", r->fixed_by_same_author } };
    }
    const auto& e = std::get<Excluded>(entry);
    return json { { "record_index", e.record_index },
        { "excluded", e.reason == ExclusionReason::NegativeDuration ? "negative_duration" : "error" },
        { "message", e.message } };
}

LifecycleEntry lifecycle_entry_from_json(const json& j)
{
    try {
        if (auto it = j.find("excluded"); it != j.end()) {
            Excluded e;
            e.record_index = j.at("record_index").get<std::size_t>();
            auto reason = it->get<std::string>();
            if (reason == "negative_duration")
                e.reason = ExclusionReason::NegativeDuration;
            else if (reason == "error")
                e.reason = ExclusionReason::Error;
            else
                throw ParseError("unknown exclusion reason '" + reason + "'", 0);
            e.message = j.value("message", "");
            return e;
        }
        LifecycleRecord r;
        r.record_index = j.at("record_index").get<std::size_t>();
        r.origin_time = j.at("origin_time").get<std::int64_t>();
        r.fix_time = j.at("fix_time").get<std::int64_t>();
        r.duration_days = j.at("duration_days").get<double>();
        r.fixed_by_same_author = j.at("fixed_by_same_author").get<bool>();
        if (!std::isfinite(r.duration_days) || r.duration_days < 0)
            throw ParseError("duration_days must be finite and non-negative", 0);
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad lifecycle entry: ") + e.what(), 0);
    }
}

} // namespace sstub

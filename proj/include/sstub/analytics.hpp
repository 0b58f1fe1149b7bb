#pragma once

#include "sstub/tracer.hpp"
#include "sstub/vcs.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sstub {

inline constexpr double seconds_per_day = 86400.0;

struct LifecycleRecord {
    std::size_t record_index = 0;
    std::int64_t origin_time = 0;
    std::int64_t fix_time = 0;
    double duration_days = 0.0;
    bool fixed_by_same_author = false;

    bool operator==(const LifecycleRecord&) const = default;
};

enum class ExclusionReason { NegativeDuration, Error };

struct Excluded {
    std::size_t record_index = 0;
    ExclusionReason reason = ExclusionReason::Error;
    std::string message;

    bool operator==(const Excluded&) const = default;
};

using LifecycleEntry = std::variant<LifecycleRecord, Excluded>;

/// Requires a Resolved mining record. Fix time earlier than origin time
/// (clock skew, rebases) is excluded rather than clamped.
LifecycleEntry build_lifecycle(const MiningRecord& mining, const CommitMeta& fix_commit_meta, const CommitMeta& origin_meta);

struct StatSummary {
    std::size_t count = 0;
    double mean_days = 0.0;
    double median_days = 0.0;
    // Population standard deviation.
    double stddev_days = 0.0;

    bool operator==(const StatSummary&) const = default;
};

/// Median is the lower-middle element for even counts. Throws EmptyGroup.
StatSummary summarize_durations(std::span<const double> durations);
StatSummary summarize(std::span<const LifecycleRecord> group);

struct Percentage {
    std::size_t numerator = 0;
    std::size_t denominator = 0;

    /// Empty when the denominator is zero.
    std::optional<double> percent() const;
};

struct RqPercentages {
    // Single-line blocks (no surroundings) are left out of the strict
    // variants and counted as agreeing in the inclusive ones.
    Percentage same_author_surrounding;
    Percentage same_author_surrounding_inclusive;
    Percentage same_commit_surrounding;
    Percentage same_commit_surrounding_inclusive;
    Percentage added_new;
    Percentage modified_existing;
    Percentage fixed_by_same_author;
};

RqPercentages rq_percentages(std::span<const MiningRecord> mining, std::span<const LifecycleRecord> lifecycle);

nlohmann::json lifecycle_entry_to_json(const LifecycleEntry& entry);
LifecycleEntry lifecycle_entry_from_json(const nlohmann::json& j);
std::size_t record_index_of(const LifecycleEntry& entry);

} // namespace sstub

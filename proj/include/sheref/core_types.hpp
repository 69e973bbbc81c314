#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "sheref/errors.hpp"

namespace sheref {

// Sensor indices are 1-based and unique within a scenario.
using SensorId = std::uint32_t;
using TimeIndex = std::int32_t;

// A sorted, duplicate-free set of sensor ids.
using SensorSet = std::vector<SensorId>;

inline SensorSet make_sensor_set(std::vector<SensorId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

inline bool set_contains(const SensorSet& s, SensorId k) {
    return std::binary_search(s.begin(), s.end(), k);
}

inline bool set_subset(const SensorSet& sub, const SensorSet& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

// Last pre-change time of a sensor. The sensor is post-change at times
// t > value. Zero means post-change from the first observation; infinity
// means it never changes.
struct ChangePoint {
    static constexpr std::int64_t kInfinite = std::numeric_limits<std::int64_t>::max();

    std::int64_t value = kInfinite;

    static ChangePoint zero() { return {0}; }
    static ChangePoint finite(std::int64_t t) { return {t}; }
    static ChangePoint infinite() { return {kInfinite}; }

    bool is_infinite() const { return value == kInfinite; }
    bool post_change_at(TimeIndex t) const { return static_cast<std::int64_t>(t) > value; }
};

// Full history of active sets (A_t) and detection sets (D_t) for one run.
// Time is a strictly contiguous 1-based clock; gaps are errors.
class ActiveSetLedger {
public:
    explicit ActiveSetLedger(std::size_t cap) : cap_(cap) {}

    std::size_t cap() const { return cap_; }
    TimeIndex last_time() const { return static_cast<TimeIndex>(active_.size()); }

    void append_active_set(TimeIndex t, SensorSet a) {
        if (t != last_time() + 1)
            throw NonContiguousTime("append_active_set: expected t=" +
                                    std::to_string(last_time() + 1) + ", got t=" + std::to_string(t));
        if (a.size() > cap_)
            throw CapExceeded("append_active_set: |A_t|=" + std::to_string(a.size()) +
                              " exceeds cap K=" + std::to_string(cap_));
        active_.push_back(std::move(a));
    }

    // D_t must be a subset of A_{t-1}.
    void record_detection(TimeIndex t, SensorSet d) {
        if (t < 2 || t > last_time() + 1)
            throw NotPreviouslyActive("record_detection: no active set recorded at t-1=" +
                                      std::to_string(t - 1));
        if (!set_subset(d, active_set(t - 1)))
            throw NotPreviouslyActive("record_detection: D_t is not a subset of A_{t-1}");
        detections_.emplace_back(t, std::move(d));
    }

    const SensorSet& active_set(TimeIndex t) const {
        return active_.at(static_cast<std::size_t>(t - 1));
    }

    const std::vector<SensorSet>& active_history() const { return active_; }
    const std::vector<std::pair<TimeIndex, SensorSet>>& detections() const { return detections_; }

    // C_{k,t}: times s <= t at which sensor k was active.
    std::vector<TimeIndex> active_times(SensorId k, TimeIndex t) const {
        std::vector<TimeIndex> out;
        const TimeIndex hi = std::min<TimeIndex>(t, last_time());
        for (TimeIndex s = 1; s <= hi; ++s)
            if (set_contains(active_set(s), k)) out.push_back(s);
        return out;
    }

private:
    std::size_t cap_;
    std::vector<SensorSet> active_;
    std::vector<std::pair<TimeIndex, SensorSet>> detections_;
};

} // namespace sheref

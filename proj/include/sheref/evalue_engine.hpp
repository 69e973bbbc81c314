#pragma once

#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

#include "sheref/core_types.hpp"
#include "sheref/errors.hpp"

namespace sheref {

struct SensorState {
    SensorId sensor = 0;
    double s_value = 0.0;          // S_{k,t}
    TimeIndex last_updated = 0;
    TimeIndex activation_time = 0; // first time the sensor entered the active set
};

// E_{k,t} = S_{k,t} / t for the sensors active at t.
struct EValueVector {
    TimeIndex t = 0;
    std::map<SensorId, double> entries;
};

// Behavior of S during ticks where the sensor is inactive. Hold keeps S
// fixed, so E[S_{k,t}] equals the sum of activation probabilities up to t.
// Count adds 1 per inactive tick (every start time contributes at least an
// empty product), so a sensor first activated at time t starts from
// S_{k,t-1} = t-1 and its first e-value is a full likelihood ratio rather
// than L/t.
enum class InactiveUpdate { Hold, Count };

// Maintains the running statistic S_{k,t} for every sensor seen so far via
// the recursion S_{k,t} = L(1 + S_{k,t-1}) when active, with S_{k,0} = 0 and
// inactive ticks handled per InactiveUpdate.
class EValueEngine {
public:
    explicit EValueEngine(InactiveUpdate inactive = InactiveUpdate::Hold)
        : inactive_(inactive) {}

    TimeIndex time() const { return t_; }
    InactiveUpdate inactive_update() const { return inactive_; }

    const std::unordered_map<SensorId, SensorState>& states() const { return states_; }

    // Current S_{k,t}; under Count, a never-activated sensor has implicitly
    // accrued one unit per elapsed tick.
    double s_value(SensorId k) const {
        auto it = states_.find(k);
        if (it != states_.end()) return it->second.s_value;
        return inactive_ == InactiveUpdate::Count ? static_cast<double>(t_) : 0.0;
    }

    void set_state(SensorId k, SensorState st) { states_[k] = st; }
    void set_time(TimeIndex t) { t_ = t; }

    EValueVector tick(TimeIndex t, const SensorSet& active,
                      const std::map<SensorId, double>& lr) {
        if (t != t_ + 1)
            throw NonContiguousTime("tick: expected t=" + std::to_string(t_ + 1) +
                                    ", got t=" + std::to_string(t));
        EValueVector out;
        out.t = t;
        if (inactive_ == InactiveUpdate::Count)
            for (auto& [k, st] : states_)
                if (!set_contains(active, k)) st.s_value += 1.0;
        for (SensorId k : active) {
            auto it = lr.find(k);
            if (it == lr.end())
                throw MissingLr("tick: no likelihood ratio for active sensor " + std::to_string(k));
            const double l = it->second;
            if (!(l >= 0.0))
                throw NegativeLr("tick: likelihood ratio for sensor " + std::to_string(k) +
                                 " is negative or NaN");
            auto& st = states_[k];
            if (st.sensor == 0) {
                st.sensor = k;
                st.activation_time = t;
                if (inactive_ == InactiveUpdate::Count) st.s_value = static_cast<double>(t - 1);
            }
            st.s_value = l * (1.0 + st.s_value);
            st.last_updated = t;
            out.entries.emplace(k, st.s_value / static_cast<double>(t));
        }
        t_ = t;
        return out;
    }

private:
    InactiveUpdate inactive_;
    TimeIndex t_ = 0;
    std::unordered_map<SensorId, SensorState> states_;
};

// Direct-formula oracle for the e-value: (1/t) * sum over start times s of
// the product of LRs at the active times in [s, t]. Under Hold only active
// start times enter the sum (empty products contribute nothing); under
// Count all s = 1..t enter, so each fully-inactive suffix contributes 1.
// Both match the corresponding recursion exactly.
inline double evalue_direct(const std::map<SensorId, std::map<TimeIndex, double>>& lr_history,
                            const ActiveSetLedger& ledger, SensorId k, TimeIndex t,
                            InactiveUpdate inactive = InactiveUpdate::Hold) {
    const std::vector<TimeIndex> active_times = ledger.active_times(k, t);
    std::vector<TimeIndex> starts;
    if (inactive == InactiveUpdate::Count)
        for (TimeIndex s = 1; s <= t; ++s) starts.push_back(s);
    else
        starts = active_times;
    double s_sum = 0.0;
    for (TimeIndex s : starts) {
        double prod = 1.0;
        for (TimeIndex i : active_times) {
            if (i < s) continue;
            auto kit = lr_history.find(k);
            if (kit == lr_history.end())
                throw MissingHistory("evalue_direct: no LR history for sensor " + std::to_string(k));
            auto tit = kit->second.find(i);
            if (tit == kit->second.end())
                throw MissingHistory("evalue_direct: missing LR for sensor " + std::to_string(k) +
                                     " at t=" + std::to_string(i));
            prod *= tit->second;
        }
        s_sum += prod;
    }
    return s_sum / static_cast<double>(t);
}

} // namespace sheref

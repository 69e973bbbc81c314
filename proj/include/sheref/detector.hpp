#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "sheref/core_types.hpp"
#include "sheref/errors.hpp"

namespace sheref {

struct DetectionReport {
    TimeIndex t = 0;
    std::map<SensorId, double> evalues; // possibly boosted inputs
    std::size_t cap = 0;
    double alpha = 0.0;
    std::size_t r_count = 0;            // R_t
    std::optional<double> threshold;    // u_{alpha,t}
    SensorSet selected;                 // D_{t+1}
};

namespace detail {

inline void check_ebh_inputs(const std::map<SensorId, double>& evalues, std::size_t cap,
                             double alpha) {
    if (cap == 0) throw CapViolation("ebh: cap K must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw NonFiniteInput("ebh: alpha must be in (0,1)");
    if (evalues.size() > cap)
        throw CapViolation("ebh: " + std::to_string(evalues.size()) +
                           " e-values exceed cap K=" + std::to_string(cap));
    for (const auto& [k, e] : evalues)
        if (!std::isfinite(e) || e < 0.0)
            throw NonFiniteInput("ebh: e-value for sensor " + std::to_string(k) +
                                 " is negative or non-finite");
}

} // namespace detail

// Threshold characterization of e-BH: u = inf{u : u * Q(u) >= K/alpha} with
// Q(u) = |{E >= u}| v 1. The infimum is attained on the grid K/(alpha*q),
// q = 1..n, so it reduces to the largest q with |{E >= K/(alpha*q)}| >= q.
// Returns (u, Q(u)); Q floors at 1 when nothing is selectable.
inline std::pair<double, std::size_t> ebh_threshold(const std::map<SensorId, double>& evalues,
                                                    std::size_t cap, double alpha) {
    detail::check_ebh_inputs(evalues, cap, alpha);
    std::vector<double> vals;
    vals.reserve(evalues.size());
    for (const auto& [k, e] : evalues) vals.push_back(e);
    std::sort(vals.begin(), vals.end(), std::greater<double>());

    const double base = static_cast<double>(cap) / alpha; // K / alpha
    std::size_t best_q = 0;
    for (std::size_t q = 1; q <= vals.size(); ++q) {
        const double u = base / static_cast<double>(q);
        // vals is sorted descending: count(E >= u) >= q iff vals[q-1] >= u.
        if (vals[q - 1] >= u) best_q = q;
    }
    if (best_q == 0) return {base, 1};
    return {base / static_cast<double>(best_q), best_q};
}

// e-BH selection over the active set's e-values. The threshold form is the
// canonical implementation; it is tie-insensitive because selection is the
// level set {E >= u}.
inline DetectionReport ebh_select(const std::map<SensorId, double>& evalues, std::size_t cap,
                                  double alpha) {
    detail::check_ebh_inputs(evalues, cap, alpha);
    DetectionReport report;
    report.evalues = evalues;
    report.cap = cap;
    report.alpha = alpha;

    const auto [u, q] = ebh_threshold(evalues, cap, alpha);
    report.threshold = u;
    for (const auto& [k, e] : evalues)
        if (e >= u) report.selected.push_back(k);
    report.r_count = report.selected.size();
    return report;
}

} // namespace sheref

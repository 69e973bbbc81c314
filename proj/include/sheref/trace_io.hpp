#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sheref/network_sim.hpp"

namespace sheref {

// Line-delimited trace format: a meta record (t_bar, ground-truth change
// points), then one record per decision epoch with the active set, detection
// set, observations, and optional e-values.
void write_trace(std::ostream& out, const RunTrace& trace);
RunTrace read_trace(std::istream& in);

void write_trace_file(const std::string& path, const RunTrace& trace);
RunTrace read_trace_file(const std::string& path);

struct MetricsRow {
    std::string method;
    double alpha = 0.0;
    MetricsSummary summary;
    std::uint64_t seed = 0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

} // namespace sheref

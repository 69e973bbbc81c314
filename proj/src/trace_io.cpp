#include "sheref/trace_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sheref/errors.hpp"

namespace sheref {

namespace {

using nlohmann::json;

json sensor_set_json(const SensorSet& s) {
    json a = json::array();
    for (SensorId k : s) a.push_back(k);
    return a;
}

SensorSet sensor_set_from_json(const json& a) {
    std::vector<SensorId> ids;
    for (const auto& v : a) ids.push_back(v.get<SensorId>());
    return make_sensor_set(std::move(ids));
}

json sensor_map_json(const std::map<SensorId, double>& m) {
    json o = json::object();
    for (const auto& [k, v] : m) o[std::to_string(k)] = v;
    return o;
}

std::map<SensorId, double> sensor_map_from_json(const json& o) {
    std::map<SensorId, double> m;
    for (auto it = o.begin(); it != o.end(); ++it)
        m.emplace(static_cast<SensorId>(std::stoul(it.key())), it.value().get<double>());
    return m;
}

} // namespace

void write_trace(std::ostream& out, const RunTrace& trace) {
    json meta;
    meta["type"] = "meta";
    meta["t_bar"] = trace.t_bar;
    json tau = json::object();
    for (const auto& [k, cp] : trace.tau)
        tau[std::to_string(k)] = cp.is_infinite() ? json("inf") : json(cp.value);
    meta["tau"] = tau;
    out << meta.dump() << '\n';

    for (const auto& rec : trace.ticks) {
        json j;
        j["type"] = "tick";
        j["t"] = rec.t;
        j["active"] = sensor_set_json(rec.active);
        j["detected"] = sensor_set_json(rec.detected);
        j["obs"] = sensor_map_json(rec.observations);
        if (!rec.evalues.empty()) j["evalues"] = sensor_map_json(rec.evalues);
        out << j.dump() << '\n';
    }
}

RunTrace read_trace(std::istream& in) {
    RunTrace trace;
    std::string line;
    bool have_meta = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "meta") {
            trace.t_bar = j.at("t_bar").get<TimeIndex>();
            for (auto it = j.at("tau").begin(); it != j.at("tau").end(); ++it) {
                const SensorId k = static_cast<SensorId>(std::stoul(it.key()));
                if (it.value().is_string())
                    trace.tau.emplace(k, ChangePoint::infinite());
                else
                    trace.tau.emplace(k, ChangePoint::finite(it.value().get<std::int64_t>()));
            }
            have_meta = true;
        } else if (type == "tick") {
            TickRecord rec;
            rec.t = j.at("t").get<TimeIndex>();
            rec.active = sensor_set_from_json(j.at("active"));
            rec.detected = sensor_set_from_json(j.at("detected"));
            rec.observations = sensor_map_from_json(j.at("obs"));
            if (j.contains("evalues")) rec.evalues = sensor_map_from_json(j.at("evalues"));
            trace.ticks.push_back(std::move(rec));
        } else {
            throw Error("read_trace: unknown record type '" + type + "'");
        }
    }
    if (!have_meta) throw Error("read_trace: missing meta record");
    return trace;
}

void write_trace_file(const std::string& path, const RunTrace& trace) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open trace file '" + path + "' for writing");
    write_trace(out, trace);
}

RunTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file '" + path + "'");
    return read_trace(in);
}

std::string metrics_csv_header() {
    return "method,alpha,afnr,afnr_se,tadd,tadd_se,max_fdr,max_fdr_se,"
           "rejections,rejections_se,reps,seed";
}

std::string metrics_csv_row(const MetricsRow& row) {
    std::ostringstream os;
    os.precision(10);
    const MetricsSummary& s = row.summary;
    os << row.method << ',' << row.alpha << ',' << s.afnr << ',' << s.afnr_se << ',' << s.tadd
       << ',' << s.tadd_se << ',' << s.max_fdr << ',' << s.max_fdr_se << ',' << s.rejections << ','
       << s.rejections_se << ',' << s.replication_count << ',' << row.seed;
    return os.str();
}

} // namespace sheref

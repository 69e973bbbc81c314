#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sheref/boosting.hpp"
#include "sheref/config.hpp"
#include "sheref/detector.hpp"
#include "sheref/errors.hpp"
#include "sheref/evalue_engine.hpp"
#include "sheref/network_sim.hpp"
#include "sheref/trace_io.hpp"

namespace {

using nlohmann::json;
using namespace sheref;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitMalformedStream = 4;

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StreamFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string safe_name(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == '.' || c == '/' ) c = '_';
    return out;
}

int run_simulate(const std::string& config_path, const CliOverrides& overrides,
                 const std::string& out_path, const std::string& traces_dir) {
    Campaign cam = build_campaign(FlatConfig::parse_file(config_path), overrides);

    std::ofstream out(out_path);
    if (!out) throw IoFailure("cannot open output file '" + out_path + "'");

    out << "# sheref simulate\n# config-begin\n";
    for (const auto& line : echo_config(cam)) out << "# " << line << '\n';
    out << "# config-end\n" << metrics_csv_header() << '\n';

    if (!traces_dir.empty()) std::filesystem::create_directories(traces_dir);

    for (Method m : cam.methods) {
        for (double a : cam.alphas) {
            ScenarioConfig sc = cam.scenario(m, a);
            std::vector<RunTrace> traces;
            MetricsSummary summary = monte_carlo(sc, traces_dir.empty() ? nullptr : &traces);
            MetricsRow row{method_name(m), a, summary, sc.seed};
            out << metrics_csv_row(row) << '\n';
            std::cout << method_name(m) << " alpha=" << a << " afnr=" << summary.afnr
                      << " tadd=" << summary.tadd << " max_fdr=" << summary.max_fdr
                      << " rejections=" << summary.rejections << " reps="
                      << summary.replication_count << '\n';
            for (std::size_t r = 0; r < traces.size(); ++r) {
                std::ostringstream name;
                name << traces_dir << "/trace_" << safe_name(method_name(m)) << "_a"
                     << safe_name(std::to_string(a)) << "_rep" << r << ".jsonl";
                write_trace_file(name.str(), traces[r]);
            }
        }
    }
    return kExitOk;
}

json engine_state_json(const EValueEngine& engine, const History& history) {
    json j;
    j["t"] = engine.time();
    json states = json::object();
    for (const auto& [k, st] : engine.states()) {
        states[std::to_string(k)] = {
            {"s", st.s_value}, {"last", st.last_updated}, {"act", st.activation_time}};
    }
    j["states"] = states;
    json prev = json::object();
    for (const auto& [k, x] : history.prev) prev[std::to_string(k)] = x;
    j["prev"] = prev;
    return j;
}

void load_engine_state(const json& j, EValueEngine& engine, History& history) {
    engine.set_time(j.at("t").get<TimeIndex>());
    for (auto it = j.at("states").begin(); it != j.at("states").end(); ++it) {
        SensorState st;
        st.sensor = static_cast<SensorId>(std::stoul(it.key()));
        st.s_value = it.value().at("s").get<double>();
        st.last_updated = it.value().at("last").get<TimeIndex>();
        st.activation_time = it.value().at("act").get<TimeIndex>();
        engine.set_state(st.sensor, st);
    }
    for (auto it = j.at("prev").begin(); it != j.at("prev").end(); ++it)
        history.prev.emplace(static_cast<SensorId>(std::stoul(it.key())),
                             it.value().get<double>());
}

int run_detect(const std::string& config_path, const std::string& in_path,
               const std::string& out_path, const std::string& state_in,
               const std::string& state_out, const CliOverrides& overrides) {
    Campaign cam = build_campaign(FlatConfig::parse_file(config_path), overrides);
    const ScenarioConfig sc = cam.base;
    LikelihoodModel model(sc.model, sc.pool_size);

    std::istream* in = &std::cin;
    std::ifstream fin;
    if (!in_path.empty() && in_path != "-") {
        fin.open(in_path);
        if (!fin) throw IoFailure("cannot open input stream '" + in_path + "'");
        in = &fin;
    }
    std::ostream* out = &std::cout;
    std::ofstream fout;
    if (!out_path.empty() && out_path != "-") {
        fout.open(out_path);
        if (!fout) throw IoFailure("cannot open output file '" + out_path + "'");
        out = &fout;
    }

    EValueEngine engine(sc.inactive_update);
    History history;
    if (!state_in.empty()) {
        std::ifstream sin(state_in);
        if (!sin) throw IoFailure("cannot open state file '" + state_in + "'");
        json j;
        sin >> j;
        load_engine_state(j, engine, history);
    }

    const BoostMethod bmethod =
        sc.method == Method::SHEREF_TIPD ? BoostMethod::TIPD : BoostMethod::GD;

    std::string line;
    long lineno = 0;
    while (std::getline(*in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        TimeIndex t;
        SensorSet active;
        std::map<SensorId, double> obs;
        try {
            j = json::parse(line);
            t = j.at("t").get<TimeIndex>();
            std::vector<SensorId> ids;
            for (const auto& v : j.at("active")) ids.push_back(v.get<SensorId>());
            active = make_sensor_set(std::move(ids));
            for (auto it = j.at("obs").begin(); it != j.at("obs").end(); ++it)
                obs.emplace(static_cast<SensorId>(std::stoul(it.key())),
                            it.value().get<double>());
        } catch (const std::exception& e) {
            throw StreamFailure("malformed record at line " + std::to_string(lineno) + ": " +
                                e.what());
        }
        if (t != engine.time() + 1)
            throw StreamFailure("out-of-order tick at line " + std::to_string(lineno) +
                                ": expected t=" + std::to_string(engine.time() + 1) + ", got t=" +
                                std::to_string(t));
        if (active.empty()) break;

        std::map<SensorId, double> factor;
        if (sc.method != Method::SHEREF) {
            for (SensorId k : active) {
                BoostQuery q;
                q.law = model.null_lr_law(k, history);
                q.c = (1.0 + engine.s_value(k)) / static_cast<double>(t);
                q.alpha = sc.alpha;
                q.cap = sc.cap;
                factor.emplace(k, boost_factor_auto(q, bmethod, sc.boost_tol).factor);
            }
        }

        std::map<SensorId, double> lr;
        for (SensorId k : active) {
            auto it = obs.find(k);
            if (it == obs.end())
                throw StreamFailure("line " + std::to_string(lineno) +
                                    ": no observation for active sensor " + std::to_string(k));
            lr.emplace(k, model.likelihood_ratio(k, history, it->second));
        }
        const EValueVector ev = engine.tick(t, active, lr);
        std::map<SensorId, double> values = ev.entries;
        if (sc.method != Method::SHEREF)
            for (auto& [k, e] : values) e *= factor.at(k);
        DetectionReport report = ebh_select(values, sc.cap, sc.alpha);

        json rec;
        rec["t"] = t;
        rec["r"] = report.r_count;
        json sel = json::array();
        for (SensorId k : report.selected) sel.push_back(k);
        rec["selected"] = sel;
        rec["threshold"] = *report.threshold;
        *out << rec.dump() << '\n';

        history.prev.clear();
        for (const auto& [k, x] : obs)
            if (set_contains(active, k)) history.prev.emplace(k, x);
    }

    if (!state_out.empty()) {
        std::ofstream sout(state_out);
        if (!sout) throw IoFailure("cannot open state file '" + state_out + "' for writing");
        sout << engine_state_json(engine, history).dump() << '\n';
    }
    return kExitOk;
}

int run_boost(const std::string& grid_path, const std::string& out_path) {
    std::ifstream gin(grid_path);
    if (!gin) throw ConfigError("cannot open grid file '" + grid_path + "'");
    std::stringstream buf;
    buf << gin.rdbuf();

    // Grid format: flat key=value, one law per file.
    //   law = lognormal | pointmass;  v = <log-variance> | value = <mass point>
    //   alphas = 0.1,0.05;  cs = 1,0.5;  cap = 100;  tol = 1e-6
    std::map<std::string, std::string> kv;
    std::string line;
    std::stringstream ss(buf.str());
    while (std::getline(ss, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("grid: expected 'key = value' lines");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto require = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw ConfigError("grid: missing key '" + k + "'");
        return it->second;
    };
    auto parse_list = [](const std::string& s) {
        std::vector<double> out;
        std::stringstream ls(s);
        std::string item;
        while (std::getline(ls, item, ',')) out.push_back(std::stod(item));
        return out;
    };

    const std::string law_kind = require("law");
    NullLrLaw law;
    if (law_kind == "lognormal")
        law = NullLrLaw::log_normal_unit_mean(std::stod(require("v")));
    else if (law_kind == "pointmass")
        law = NullLrLaw::point_mass(std::stod(require("value")));
    else
        throw ConfigError("grid: unknown law '" + law_kind + "'");

    const std::vector<double> alphas = parse_list(require("alphas"));
    const std::vector<double> cs = parse_list(require("cs"));
    const std::size_t cap = kv.count("cap") ? std::stoul(kv["cap"]) : 100;
    const double tol = kv.count("tol") ? std::stod(kv["tol"]) : 1e-6;
    if (alphas.empty() || cs.empty()) throw ConfigError("grid: empty alphas or cs list");

    std::ofstream out(out_path);
    if (!out) throw IoFailure("cannot open output file '" + out_path + "'");
    out << "alpha,c,law,m,v,value,cap,b_gd,certified_gd,b_tipd,certified_tipd\n";
    out.precision(10);
    for (double a : alphas) {
        for (double c : cs) {
            BoostQuery q{law, c, a, cap, nullptr};
            const BoostResult gd = boost_factor_auto(q, BoostMethod::GD, tol);
            const BoostResult tipd = boost_factor_auto(q, BoostMethod::TIPD, tol);
            out << a << ',' << c << ',' << law_kind << ',' << law.m << ',' << law.v << ','
                << law.value << ',' << cap << ',' << gd.factor << ',' << gd.certified << ','
                << tipd.factor << ',' << tipd.certified << '\n';
        }
    }
    return kExitOk;
}

int run_report(const std::vector<std::string>& trace_paths, const std::string& out_path) {
    if (trace_paths.empty()) throw ConfigError("report: no trace files given");
    std::vector<RunTrace> traces;
    for (const auto& p : trace_paths) traces.push_back(read_trace_file(p));
    const TimeIndex t_bar = traces.front().t_bar;
    MetricsSummary summary = compute_metrics(traces, t_bar);

    std::vector<double> det_mean(static_cast<std::size_t>(t_bar - 1), 0.0);
    for (const auto& tr : traces)
        for (const auto& rec : tr.ticks)
            det_mean[static_cast<std::size_t>(rec.t - 1)] +=
                static_cast<double>(rec.detected.size());
    for (double& d : det_mean) d /= static_cast<double>(traces.size());

    std::ofstream out(out_path);
    if (!out) throw IoFailure("cannot open output file '" + out_path + "'");
    out.precision(10);
    out << "t,fdr,fdr_se,detections_mean\n";
    for (std::size_t i = 0; i < summary.fdr_path.size(); ++i)
        out << (i + 1) << ',' << summary.fdr_path[i] << ',' << summary.fdr_path_se[i] << ','
            << det_mean[i] << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"e-value sequential change detection for reconfigurable sensor networks"};
    app.require_subcommand(1);

    std::string config_path, out_path = "metrics.csv", traces_dir;
    CliOverrides overrides;
    double alpha_flag = -1.0;
    std::string method_flag;
    long reps_flag = -1, threads_flag = -1;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "declarative config file")->required();
        cmd->add_option("--alpha", alpha_flag, "override run.alpha");
        cmd->add_option("--method", method_flag, "override run.method");
        cmd->add_option("--reps", reps_flag, "override run.reps");
        cmd->add_option("--threads", threads_flag, "override run.threads");
        cmd->add_option("--seed", seed_flag, "override run.seed")->each([&](const std::string&) {
            seed_given = true;
        });
    };

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo simulation campaign");
    add_common(sim);
    sim->add_option("--out", out_path, "metrics CSV output path");
    sim->add_option("--traces", traces_dir, "directory for per-run trace files");

    std::string in_path, detect_out = "-", state_in, state_out;
    auto* det = app.add_subcommand("detect", "streaming detection on file input");
    add_common(det);
    det->add_option("--in", in_path, "line-delimited input records (default stdin)");
    det->add_option("--out", detect_out, "detection event output (default stdout)");
    det->add_option("--state-in", state_in, "resume from serialized engine state");
    det->add_option("--state-out", state_out, "serialize engine state on exit");

    std::string grid_path, boost_out = "boost.csv";
    auto* boo = app.add_subcommand("boost", "tabulate boosting factors over a grid");
    boo->add_option("--grid", grid_path, "grid spec file")->required();
    boo->add_option("--out", boost_out, "CSV output path");

    std::vector<std::string> trace_paths;
    std::string report_out = "report.csv";
    auto* rep = app.add_subcommand("report", "plot-ready CSV from trace files");
    rep->add_option("traces", trace_paths, "trace files");
    rep->add_option("--out", report_out, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    if (alpha_flag > 0) overrides.alpha = alpha_flag;
    if (!method_flag.empty()) overrides.method = method_flag;
    if (reps_flag > 0) overrides.reps = reps_flag;
    if (threads_flag > 0) overrides.threads = threads_flag;
    if (seed_given) overrides.seed = seed_flag;

    try {
        if (sim->parsed()) return run_simulate(config_path, overrides, out_path, traces_dir);
        if (det->parsed())
            return run_detect(config_path, in_path, detect_out, state_in, state_out, overrides);
        if (boo->parsed()) return run_boost(grid_path, boost_out);
        if (rep->parsed()) return run_report(trace_paths, report_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const StreamFailure& e) {
        std::cerr << "stream error: " << e.what() << '\n';
        return kExitMalformedStream;
    } catch (const IoFailure& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}

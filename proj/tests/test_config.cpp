#include <doctest.h>

#include <sstream>

#include "sheref/config.hpp"
#include "sheref/trace_io.hpp"

using namespace sheref;

namespace {

const char* kMinimal = R"(
# minimal scenario
run.seed = 42
model.variant = iid_mean_shift
)";

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

} // namespace

TEST_CASE("minimal config fills in the documented defaults") {
    const Campaign cam = build_campaign(FlatConfig::parse_string(kMinimal));
    CHECK(cam.base.seed == 42);
    CHECK(cam.base.replications == 500);
    CHECK(cam.base.cap == 100);
    CHECK(cam.base.pool_size == 1000);
    CHECK(cam.base.initial_active == 100);
    CHECK(cam.base.t_bar == 30);
    CHECK(cam.base.p_change == doctest::Approx(0.1));
    CHECK(cam.base.policy == PolicyKind::ReplaceFromPool);
    CHECK(cam.base.model.variant == ModelVariant::IidMeanShift);
    CHECK(cam.methods == std::vector<Method>{Method::SHEREF});
    CHECK(cam.alphas == std::vector<double>{0.1});
    CHECK(cam.base.inactive_update == InactiveUpdate::Count);
}

TEST_CASE("inactive-update key parses, echoes, and rejects other values") {
    const Campaign hold = build_campaign(FlatConfig::parse_string(
        "run.seed = 1\nmodel.variant = iid_mean_shift\nrun.inactive_update = hold\n"));
    CHECK(hold.base.inactive_update == InactiveUpdate::Hold);
    bool found = false;
    for (const auto& line : echo_config(hold))
        if (line == "run.inactive_update = hold") found = true;
    CHECK(found);
    CHECK_THROWS_AS(build_campaign(FlatConfig::parse_string(
                        "run.seed = 1\nmodel.variant = iid_mean_shift\n"
                        "run.inactive_update = freeze")),
                    ConfigError);
}

TEST_CASE("missing required keys name the key") {
    CHECK_THROWS_WITH_AS(build_campaign(FlatConfig::parse_string("model.variant = iid_mean_shift")),
                         "missing required key 'run.seed'", ConfigError);
    CHECK_THROWS_WITH_AS(build_campaign(FlatConfig::parse_string("run.seed = 1")),
                         "missing required key 'model.variant'", ConfigError);
}

TEST_CASE("unknown keys and malformed lines are rejected with line numbers") {
    CHECK_THROWS_WITH_AS(FlatConfig::parse_string("run.sneed = 1"),
                         "config line 1: unknown key 'run.sneed'", ConfigError);
    CHECK_THROWS_AS(FlatConfig::parse_string("run.seed 1"), ConfigError);
    // Values are typed lazily; a non-numeric seed surfaces when the campaign
    // is built.
    CHECK_THROWS_AS(build_campaign(FlatConfig::parse_string(
                        "run.seed = abc\nmodel.variant = iid_mean_shift")),
                    ConfigError);
}

TEST_CASE("value validation points at the offending key") {
    CHECK_THROWS_AS(build_campaign(FlatConfig::parse_string(
                        "run.seed = 1\nmodel.variant = nope")),
                    ConfigError);
    CHECK_THROWS_AS(build_campaign(FlatConfig::parse_string(
                        "run.seed = 1\nmodel.variant = iid_mean_shift\nrun.alpha = 1.5")),
                    ConfigError);
    CHECK_THROWS_AS(build_campaign(FlatConfig::parse_string(
                        "run.seed = 1\nmodel.variant = shared_factor\n"
                        "model.factor_loading_range = 0.5,0.1")),
                    ConfigError);
    CHECK_THROWS_AS(build_campaign(FlatConfig::parse_string(
                        "run.seed = 1\nmodel.variant = iid_mean_shift\nrun.record_evalues = yes")),
                    ConfigError);
}

TEST_CASE("method and alpha grids expand to one scenario per pair") {
    const Campaign cam = build_campaign(FlatConfig::parse_string(
        "run.seed = 7\nmodel.variant = shared_factor\n"
        "run.method = SHEREF,SHEREF-GD,SHEREF-TIPD\nrun.alpha = 0.1,0.05\n"));
    CHECK(cam.methods.size() == 3);
    CHECK(cam.alphas.size() == 2);
    const ScenarioConfig sc = cam.scenario(Method::SHEREF_TIPD, 0.05);
    CHECK(sc.method == Method::SHEREF_TIPD);
    CHECK(sc.alpha == doctest::Approx(0.05));
    CHECK(sc.seed == 7);
}

TEST_CASE("command-line overrides replace the config grid") {
    CliOverrides ov;
    ov.alpha = 0.2;
    ov.method = "SHEREF-GD";
    ov.reps = 12;
    ov.seed = 99;
    ov.threads = 4;
    const Campaign cam = build_campaign(
        FlatConfig::parse_string("run.seed = 7\nmodel.variant = iid_mean_shift\n"
                                 "run.method = SHEREF,SHEREF-TIPD\nrun.alpha = 0.1,0.05\n"),
        ov);
    CHECK(cam.methods == std::vector<Method>{Method::SHEREF_GD});
    CHECK(cam.alphas == std::vector<double>{0.2});
    CHECK(cam.base.replications == 12);
    CHECK(cam.base.seed == 99);
    CHECK(cam.base.threads == 4);
}

TEST_CASE("echoed config re-parses to an identical campaign") {
    const Campaign a = build_campaign(FlatConfig::parse_string(
        "run.seed = 5\nrun.reps = 20\nrun.alpha = 0.1,0.05\nrun.method = SHEREF,SHEREF-GD\n"
        "run.t_bar = 12\nrun.cap = 8\nrun.pool = 30\nrun.initial_active = 8\n"
        "run.p_change = 0.25\nmodel.variant = within_sensor_ar\nmodel.ar_pre = -0.7\n"
        "model.ar_post = 0.7\nmodel.noise_rho = -0.5\npolicy.kind = deactivate_only\n"));
    const std::vector<std::string> echoed = echo_config(a);
    const Campaign b = build_campaign(FlatConfig::parse_string(join_lines(echoed)));
    CHECK(echo_config(b) == echoed);
    CHECK(b.base.model.ar_pre == a.base.model.ar_pre);
    CHECK(b.base.policy == a.base.policy);
    CHECK(b.methods == a.methods);
    CHECK(b.alphas == a.alphas);
}

TEST_CASE("trace serialization round-trips including infinite change points") {
    RunTrace tr;
    tr.t_bar = 4;
    tr.tau = {{1, ChangePoint::infinite()}, {2, ChangePoint::finite(3)}, {5, ChangePoint::zero()}};
    tr.ticks.push_back({1, {1, 2}, {}, {{1, 0.25}, {2, -1.5}}, {{1, 0.5}, {2, 0.125}}});
    tr.ticks.push_back({2, {1, 5}, {1}, {{1, 2.0}, {5, 0.0}}, {}});

    std::ostringstream os;
    write_trace(os, tr);
    std::istringstream is(os.str());
    const RunTrace back = read_trace(is);

    CHECK(back.t_bar == tr.t_bar);
    CHECK(back.tau.at(1).is_infinite());
    CHECK(back.tau.at(2).value == 3);
    CHECK(back.tau.at(5).value == 0);
    REQUIRE(back.ticks.size() == 2);
    CHECK(back.ticks[0].observations == tr.ticks[0].observations);
    CHECK(back.ticks[0].evalues == tr.ticks[0].evalues);
    CHECK(back.ticks[1].detected == tr.ticks[1].detected);
}

TEST_CASE("trace reader rejects streams without a meta record") {
    std::istringstream is(R"({"type":"tick","t":1,"active":[],"detected":[],"obs":{}})"
                          "\n");
    CHECK_THROWS_AS(read_trace(is), Error);
}

TEST_CASE("metrics CSV rows carry every summary column") {
    MetricsSummary s;
    s.afnr = 0.25;
    s.tadd = 12.5;
    s.max_fdr = 0.06;
    s.rejections = 40.0;
    s.replication_count = 16;
    const std::string row = metrics_csv_row({"SHEREF-GD", 0.05, s, 123});
    CHECK(row == "SHEREF-GD,0.05,0.25,0,12.5,0,0.06,0,40,0,16,123");
    CHECK(metrics_csv_header().rfind("method,alpha,", 0) == 0);
}

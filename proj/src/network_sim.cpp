#include "sheref/network_sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "sheref/boosting.hpp"
#include "sheref/detector.hpp"
#include "sheref/errors.hpp"
#include "sheref/evalue_engine.hpp"

namespace sheref {

std::string method_name(Method m) {
    switch (m) {
        case Method::SHEREF: return "SHEREF";
        case Method::SHEREF_GD: return "SHEREF-GD";
        case Method::SHEREF_TIPD: return "SHEREF-TIPD";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "SHEREF") return Method::SHEREF;
    if (name == "SHEREF-GD") return Method::SHEREF_GD;
    if (name == "SHEREF-TIPD") return Method::SHEREF_TIPD;
    throw ConfigError("unknown method '" + name + "'");
}

std::string policy_name(PolicyKind p) {
    switch (p) {
        case PolicyKind::FixedAll: return "fixed_all";
        case PolicyKind::DeactivateOnly: return "deactivate_only";
        case PolicyKind::ReplaceFromPool: return "replace_from_pool";
    }
    return "?";
}

PolicyKind policy_from_name(const std::string& name) {
    if (name == "fixed_all") return PolicyKind::FixedAll;
    if (name == "deactivate_only") return PolicyKind::DeactivateOnly;
    if (name == "replace_from_pool") return PolicyKind::ReplaceFromPool;
    throw ConfigError("unknown policy.kind '" + name + "'");
}

void ScenarioConfig::validate() const {
    if (cap == 0) throw ConfigError("run.cap must be >= 1");
    if (t_bar < 2) throw ConfigError("run.t_bar must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("run.alpha must be in (0,1)");
    if (!(p_change > 0.0 && p_change <= 1.0)) throw ConfigError("run.p_change must be in (0,1]");
    if (pool_size < initial_active)
        throw ConfigError("run.pool must be >= run.initial_active");
    if (initial_active > cap) throw ConfigError("run.initial_active must be <= run.cap");
    if (replications < 1) throw ConfigError("run.reps must be >= 1");
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
}

PoolState PoolState::fresh(std::size_t pool_size, const SensorSet& initial) {
    PoolState pool;
    pool.unused.reserve(pool_size);
    for (std::size_t i = 1; i <= pool_size; ++i) {
        const SensorId k = static_cast<SensorId>(i);
        if (!set_contains(initial, k)) pool.unused.push_back(k);
    }
    return pool;
}

std::vector<ChangePoint> sample_change_points(std::size_t n, double p, Rng& rng) {
    std::vector<ChangePoint> out;
    out.reserve(n);
    const double log1mp = std::log1p(-p);
    for (std::size_t i = 0; i < n; ++i) {
        if (p >= 1.0) {
            out.push_back(ChangePoint::zero());
            continue;
        }
        const double u = draw_uniform(rng);
        out.push_back(ChangePoint::finite(static_cast<std::int64_t>(std::log(u) / log1mp)));
    }
    return out;
}

SensorSet step_policy(PolicyKind policy, const SensorSet& prev_active, const SensorSet& detected,
                      PoolState& pool, Rng& rng) {
    switch (policy) {
        case PolicyKind::FixedAll:
            return prev_active;
        case PolicyKind::DeactivateOnly: {
            SensorSet next;
            std::set_difference(prev_active.begin(), prev_active.end(), detected.begin(),
                                detected.end(), std::back_inserter(next));
            return next;
        }
        case PolicyKind::ReplaceFromPool: {
            SensorSet next;
            std::set_difference(prev_active.begin(), prev_active.end(), detected.begin(),
                                detected.end(), std::back_inserter(next));
            // Uniform without replacement from never-activated pool members;
            // an exhausted pool just shrinks the active set.
            std::size_t draws = std::min(detected.size(), pool.unused.size());
            for (std::size_t i = 0; i < draws; ++i) {
                const std::size_t j =
                    static_cast<std::size_t>(draw_uniform(rng) * static_cast<double>(pool.unused.size()));
                const std::size_t idx = std::min(j, pool.unused.size() - 1);
                next.push_back(pool.unused[idx]);
                pool.unused[idx] = pool.unused.back();
                pool.unused.pop_back();
            }
            std::sort(next.begin(), next.end());
            return next;
        }
    }
    throw Error("unreachable policy kind");
}

namespace {

// Boost factors within one tick are deduplicated by (law, c); newly
// activated sensors under the AR model all share PointMass(1) and c = 1/t.
using BoostKey = std::tuple<int, double, double, double>;

BoostKey boost_key(const NullLrLaw& law, double c) {
    return {static_cast<int>(law.kind), law.m, law.v == 0.0 ? law.value : law.v, c};
}

} // namespace

RunTrace simulate_run(const ScenarioConfig& config, std::uint64_t replication_index) {
    config.validate();
    Rng rng = make_substream(config.seed, replication_index);

    LikelihoodModel model(config.model, config.pool_size);
    model.draw_loadings(rng);
    const std::vector<ChangePoint> tau =
        sample_change_points(config.pool_size, config.p_change, rng);

    SensorSet active;
    for (std::size_t i = 1; i <= config.initial_active; ++i)
        active.push_back(static_cast<SensorId>(i));

    ActiveSetLedger ledger(config.cap);
    ledger.append_active_set(1, active);
    PoolState pool = PoolState::fresh(config.pool_size, active);

    EValueEngine engine(config.inactive_update);
    History history;

    RunTrace trace;
    trace.t_bar = config.t_bar;

    const BoostMethod bmethod =
        config.method == Method::SHEREF_TIPD ? BoostMethod::TIPD : BoostMethod::GD;

    for (TimeIndex t = 1; t <= config.t_bar - 1 && !active.empty(); ++t) {
        model.begin_tick(t, rng);

        std::map<SensorId, double> obs;
        std::map<SensorId, double> lr;
        for (SensorId k : active) {
            const bool post = tau[k - 1].post_change_at(t);
            const double x = model.sample_observation(k, t, post, history, rng);
            obs.emplace(k, x);
            lr.emplace(k, model.likelihood_ratio(k, history, x));
        }

        // Boost factors are F_{t-1}-measurable: they use S_{k,t-1} and the
        // conditional null law, both known before the tick.
        std::map<SensorId, double> factor;
        if (config.method != Method::SHEREF) {
            std::map<BoostKey, double> memo;
            for (SensorId k : active) {
                BoostQuery q;
                q.law = model.null_lr_law(k, history);
                q.c = (1.0 + engine.s_value(k)) / static_cast<double>(t);
                q.alpha = config.alpha;
                q.cap = config.cap;
                const BoostKey key = boost_key(q.law, q.c);
                auto it = memo.find(key);
                if (it == memo.end())
                    it = memo.emplace(key, boost_factor_auto(q, bmethod, config.boost_tol).factor)
                             .first;
                factor.emplace(k, it->second);
            }
        }

        const EValueVector ev = engine.tick(t, active, lr);
        std::map<SensorId, double> values = ev.entries;
        if (config.method != Method::SHEREF)
            for (auto& [k, e] : values) e *= factor.at(k);

        DetectionReport report = ebh_select(values, config.cap, config.alpha);
        ledger.record_detection(t + 1, report.selected);

        TickRecord rec;
        rec.t = t;
        rec.active = active;
        rec.detected = report.selected;
        rec.observations = obs;
        if (config.record_evalues) rec.evalues = values;
        trace.ticks.push_back(std::move(rec));

        history.prev.clear();
        for (const auto& [k, x] : obs) history.prev.emplace(k, x);

        active = step_policy(config.policy, active, report.selected, pool, rng);
        ledger.append_active_set(t + 1, active);
    }

    for (const auto& rec : trace.ticks)
        for (SensorId k : rec.active)
            trace.tau.emplace(k, tau[k - 1]);
    return trace;
}

RepStats trace_stats(const RunTrace& trace) {
    RepStats st;
    st.fdr_ratio.assign(static_cast<std::size_t>(trace.t_bar - 1), 0.0);
    double fn_num = 0.0, fn_den = 0.0;
    for (const auto& rec : trace.ticks) {
        double false_det = 0.0;
        for (SensorId k : rec.detected)
            if (!trace.tau.at(k).post_change_at(rec.t)) false_det += 1.0; // tau_k >= t
        const double det = static_cast<double>(rec.detected.size());
        st.fdr_ratio[static_cast<std::size_t>(rec.t - 1)] = false_det / std::max(det, 1.0);
        st.rejections += det;

        for (SensorId k : rec.active) {
            if (set_contains(rec.detected, k)) continue;
            fn_den += 1.0;
            if (trace.tau.at(k).post_change_at(rec.t)) fn_num += 1.0; // tau_k < t
        }
    }
    st.tadd = fn_num;
    st.afnr = fn_num / std::max(fn_den, 1.0);
    return st;
}

namespace {

struct MeanSe {
    double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace

MetricsSummary aggregate_stats(const std::vector<RepStats>& stats, TimeIndex t_bar) {
    if (stats.empty()) throw EmptyTraceList("aggregate_stats: no replications");
    const std::size_t epochs = static_cast<std::size_t>(t_bar - 1);
    for (const auto& st : stats)
        if (st.fdr_ratio.size() != epochs)
            throw MismatchedHorizons("aggregate_stats: traces disagree on t_bar");

    MetricsSummary out;
    out.replication_count = stats.size();
    out.fdr_path.resize(epochs);
    out.fdr_path_se.resize(epochs);

    std::vector<double> buf(stats.size());
    std::size_t arg_max = 0;
    for (std::size_t i = 0; i < epochs; ++i) {
        for (std::size_t r = 0; r < stats.size(); ++r) buf[r] = stats[r].fdr_ratio[i];
        const MeanSe ms = mean_se(buf);
        out.fdr_path[i] = ms.mean;
        out.fdr_path_se[i] = ms.se;
        if (ms.mean > out.fdr_path[arg_max]) arg_max = i;
    }
    out.max_fdr = out.fdr_path[arg_max];
    out.max_fdr_se = out.fdr_path_se[arg_max];

    for (std::size_t r = 0; r < stats.size(); ++r) buf[r] = stats[r].afnr;
    MeanSe ms = mean_se(buf);
    out.afnr = ms.mean;
    out.afnr_se = ms.se;
    for (std::size_t r = 0; r < stats.size(); ++r) buf[r] = stats[r].tadd;
    ms = mean_se(buf);
    out.tadd = ms.mean;
    out.tadd_se = ms.se;
    for (std::size_t r = 0; r < stats.size(); ++r) buf[r] = stats[r].rejections;
    ms = mean_se(buf);
    out.rejections = ms.mean;
    out.rejections_se = ms.se;
    return out;
}

MetricsSummary compute_metrics(const std::vector<RunTrace>& traces, TimeIndex t_bar) {
    if (traces.empty()) throw EmptyTraceList("compute_metrics: empty trace list");
    std::vector<RepStats> stats;
    stats.reserve(traces.size());
    for (const auto& tr : traces) {
        if (tr.t_bar != t_bar) throw MismatchedHorizons("compute_metrics: trace t_bar mismatch");
        stats.push_back(trace_stats(tr));
    }
    return aggregate_stats(stats, t_bar);
}

MetricsSummary monte_carlo(const ScenarioConfig& config, std::vector<RunTrace>* traces) {
    config.validate();
    const std::size_t reps = static_cast<std::size_t>(config.replications);
    std::vector<RepStats> stats(reps);
    if (traces) traces->resize(reps);

    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), reps);
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(nthreads);
    for (std::size_t w = 0; w < nthreads; ++w) {
        workers.emplace_back([&, w]() {
            try {
                for (std::size_t r = w; r < reps; r += nthreads) {
                    RunTrace tr = simulate_run(config, r);
                    stats[r] = trace_stats(tr);
                    if (traces) (*traces)[r] = std::move(tr);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : workers) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Aggregation runs single-threaded in replication order, so the summary
    // is bit-identical regardless of thread count.
    return aggregate_stats(stats, config.t_bar);
}

} // namespace sheref

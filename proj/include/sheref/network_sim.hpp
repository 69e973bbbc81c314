#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sheref/core_types.hpp"
#include "sheref/evalue_engine.hpp"
#include "sheref/models.hpp"
#include "sheref/rng.hpp"

namespace sheref {

enum class Method { SHEREF, SHEREF_GD, SHEREF_TIPD };

enum class PolicyKind {
    FixedAll,        // A_t = initial set forever
    DeactivateOnly,  // A_t = A_{t-1} \ D_t
    ReplaceFromPool, // deactivate detected, refill from never-used pool members
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::string policy_name(PolicyKind p);
PolicyKind policy_from_name(const std::string& name);

struct ScenarioConfig {
    std::size_t cap = 100;          // K
    TimeIndex t_bar = 30;           // deadline
    double alpha = 0.1;
    Method method = Method::SHEREF;
    ModelParams model;
    PolicyKind policy = PolicyKind::ReplaceFromPool;
    std::size_t pool_size = 1000;
    std::size_t initial_active = 100;
    double p_change = 0.1;          // geometric change-point parameter
    // Count reproduces the direct e-value formula over all start times and
    // is what the reference results use; Hold keeps the strict martingale
    // identity for deactivated sensors.
    InactiveUpdate inactive_update = InactiveUpdate::Count;
    int replications = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    double boost_tol = 1e-6;
    bool record_evalues = false;

    void validate() const;
};

// Pool members never activated so far, for the replacement policy.
struct PoolState {
    std::vector<SensorId> unused;

    static PoolState fresh(std::size_t pool_size, const SensorSet& initial);
};

struct TickRecord {
    TimeIndex t = 0;
    SensorSet active;                        // A_t
    SensorSet detected;                      // D_{t+1}
    std::map<SensorId, double> observations; // X_{k,t} for k in A_t
    std::map<SensorId, double> evalues;      // detection inputs (possibly boosted); optional
};

struct RunTrace {
    TimeIndex t_bar = 0;
    std::map<SensorId, ChangePoint> tau; // ground truth for sensors that appeared
    std::vector<TickRecord> ticks;       // decision epochs t = 1 .. t_bar-1
};

// Per-replication contributions to the aggregated metrics.
struct RepStats {
    std::vector<double> fdr_ratio; // index t-1, length t_bar-1
    double afnr = 0.0;
    double tadd = 0.0;
    double rejections = 0.0;
};

struct MetricsSummary {
    std::vector<double> fdr_path;    // per-t Monte-Carlo mean of the FDR ratio
    std::vector<double> fdr_path_se;
    double max_fdr = 0.0, max_fdr_se = 0.0;
    double afnr = 0.0, afnr_se = 0.0;
    double tadd = 0.0, tadd_se = 0.0;
    double rejections = 0.0, rejections_se = 0.0;
    std::size_t replication_count = 0;
};

// n independent geometric draws on {0,1,2,...} with success probability p:
// P(tau = t) = (1-p)^t p.
std::vector<ChangePoint> sample_change_points(std::size_t n, double p, Rng& rng);

SensorSet step_policy(PolicyKind policy, const SensorSet& prev_active, const SensorSet& detected,
                      PoolState& pool, Rng& rng);

RunTrace simulate_run(const ScenarioConfig& config, std::uint64_t replication_index);

RepStats trace_stats(const RunTrace& trace);
MetricsSummary aggregate_stats(const std::vector<RepStats>& stats, TimeIndex t_bar);
MetricsSummary compute_metrics(const std::vector<RunTrace>& traces, TimeIndex t_bar);

// Runs all replications on config.threads workers with deterministic
// per-replication substreams; the result does not depend on the thread
// count. Traces are retained only when a sink is provided.
MetricsSummary monte_carlo(const ScenarioConfig& config, std::vector<RunTrace>* traces = nullptr);

} // namespace sheref

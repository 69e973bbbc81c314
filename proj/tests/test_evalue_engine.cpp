#include <doctest.h>

#include <cmath>
#include <map>

#include "sheref/evalue_engine.hpp"
#include "sheref/rng.hpp"

using namespace sheref;

TEST_CASE("recursion on always-active LR sequence [2, 0.5, 3]") {
    EValueEngine eng;
    const SensorSet a = {1};
    auto e1 = eng.tick(1, a, {{1, 2.0}});
    CHECK(e1.entries.at(1) == doctest::Approx(2.0));
    auto e2 = eng.tick(2, a, {{1, 0.5}});
    CHECK(eng.s_value(1) == doctest::Approx(1.5));
    CHECK(e2.entries.at(1) == doctest::Approx(0.75));
    auto e3 = eng.tick(3, a, {{1, 3.0}});
    CHECK(eng.s_value(1) == doctest::Approx(7.5));
    CHECK(e3.entries.at(1) == doctest::Approx(2.5));
}

TEST_CASE("inactive sensors freeze their running statistic") {
    EValueEngine eng;
    eng.tick(1, {1}, {{1, 2.0}});
    eng.tick(2, {}, {});
    CHECK(eng.s_value(1) == doctest::Approx(2.0));
    // Re-activation at t=3 resumes from the frozen S: S_3 = 3 * (1 + 2) = 9.
    auto e3 = eng.tick(3, {1}, {{1, 3.0}});
    CHECK(eng.s_value(1) == doctest::Approx(9.0));
    CHECK(e3.entries.at(1) == doctest::Approx(3.0));
}

TEST_CASE("unit likelihood ratios give S_t = t, E_t = 1") {
    EValueEngine eng;
    for (TimeIndex t = 1; t <= 50; ++t) {
        auto ev = eng.tick(t, {7}, {{7, 1.0}});
        CHECK(eng.s_value(7) == doctest::Approx(static_cast<double>(t)));
        CHECK(ev.entries.at(7) == doctest::Approx(1.0));
    }
}

TEST_CASE("tick validates time contiguity and LR inputs") {
    EValueEngine eng;
    CHECK_THROWS_AS(eng.tick(2, {1}, {{1, 1.0}}), NonContiguousTime);
    eng.tick(1, {1}, {{1, 1.0}});
    CHECK_THROWS_AS(eng.tick(2, {1, 2}, {{1, 1.0}}), MissingLr);
    CHECK_THROWS_AS(eng.tick(2, {1}, {{1, -0.5}}), NegativeLr);
    CHECK_THROWS_AS(eng.tick(2, {1}, {{1, std::nan("")}}), NegativeLr);
}

TEST_CASE("direct-sum oracle matches hand examples") {
    // Active at {1, 3} with L_1 = 2, L_3 = 3: S_3 = L_3 + L_1 L_3 = 9, E_3 = 3.
    ActiveSetLedger ledger(4);
    ledger.append_active_set(1, {1});
    ledger.append_active_set(2, {});
    ledger.append_active_set(3, {1});
    std::map<SensorId, std::map<TimeIndex, double>> lr{{1, {{1, 2.0}, {3, 3.0}}}};
    CHECK(evalue_direct(lr, ledger, 1, 3) == doctest::Approx(3.0));
    // A sensor that never activated has e-value 0.
    CHECK(evalue_direct(lr, ledger, 2, 3) == doctest::Approx(0.0));
}

TEST_CASE("direct-sum oracle requires LR history at every active time") {
    ActiveSetLedger ledger(4);
    ledger.append_active_set(1, {1});
    std::map<SensorId, std::map<TimeIndex, double>> lr;
    CHECK_THROWS_AS(evalue_direct(lr, ledger, 1, 1), MissingHistory);
}

TEST_CASE("recursion and direct sum agree on random activation patterns") {
    Rng rng = make_substream(23, 5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t K = 5;
        ActiveSetLedger ledger(K);
        EValueEngine eng;
        std::map<SensorId, std::map<TimeIndex, double>> lr_hist;
        for (TimeIndex t = 1; t <= 25; ++t) {
            SensorSet active;
            for (SensorId k = 1; k <= K; ++k)
                if (draw_uniform(rng) < 0.6) active.push_back(k);
            ledger.append_active_set(t, active);
            std::map<SensorId, double> lr;
            for (SensorId k : active) {
                const double l = std::exp(2.0 * draw_normal(rng));
                lr.emplace(k, l);
                lr_hist[k][t] = l;
            }
            auto ev = eng.tick(t, active, lr);
            for (SensorId k = 1; k <= K; ++k) {
                const double direct = evalue_direct(lr_hist, ledger, k, t);
                const double rec = eng.s_value(k) / static_cast<double>(t);
                CHECK(rec == doctest::Approx(direct).epsilon(1e-12));
                if (set_contains(active, k)) CHECK(ev.entries.at(k) == doctest::Approx(direct));
            }
        }
    }
}

TEST_CASE("state can be exported and resumed exactly") {
    EValueEngine a;
    a.tick(1, {1, 2}, {{1, 2.0}, {2, 0.5}});
    a.tick(2, {1}, {{1, 1.5}});

    EValueEngine b;
    for (const auto& [k, st] : a.states()) b.set_state(k, st);
    b.set_time(a.time());

    auto ea = a.tick(3, {1, 2}, {{1, 0.7}, {2, 3.0}});
    auto eb = b.tick(3, {1, 2}, {{1, 0.7}, {2, 3.0}});
    CHECK(ea.entries == eb.entries);
}

TEST_CASE("count mode adds one per inactive tick and head-starts late activations") {
    EValueEngine eng(InactiveUpdate::Count);
    CHECK(eng.inactive_update() == InactiveUpdate::Count);
    eng.tick(1, {}, {});
    eng.tick(2, {}, {});
    // Never-activated sensors implicitly carry S = t.
    CHECK(eng.s_value(9) == doctest::Approx(2.0));
    // First activation at t=3 starts from S_2 = 2: S_3 = L (1 + 2) = 3 L, E_3 = L.
    auto e3 = eng.tick(3, {9}, {{9, 4.0}});
    CHECK(eng.s_value(9) == doctest::Approx(12.0));
    CHECK(e3.entries.at(9) == doctest::Approx(4.0));
    // A deactivated sensor keeps accruing one per tick.
    eng.tick(4, {}, {});
    CHECK(eng.s_value(9) == doctest::Approx(13.0));
    auto e5 = eng.tick(5, {9}, {{9, 2.0}});
    CHECK(eng.s_value(9) == doctest::Approx(28.0));
    CHECK(e5.entries.at(9) == doctest::Approx(5.6));
}

TEST_CASE("count mode with unit LRs keeps E_t = 1 regardless of activity") {
    EValueEngine eng(InactiveUpdate::Count);
    Rng rng = make_substream(11, 0);
    for (TimeIndex t = 1; t <= 40; ++t) {
        SensorSet active;
        if (draw_uniform(rng) < 0.5) active.push_back(3);
        std::map<SensorId, double> lr;
        if (!active.empty()) lr.emplace(3, 1.0);
        eng.tick(t, active, lr);
        CHECK(eng.s_value(3) == doctest::Approx(static_cast<double>(t)));
    }
}

TEST_CASE("count-mode recursion matches the all-start-times direct sum") {
    Rng rng = make_substream(99, 1);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t K = 5;
        ActiveSetLedger ledger(K);
        EValueEngine eng(InactiveUpdate::Count);
        std::map<SensorId, std::map<TimeIndex, double>> lr_hist;
        for (TimeIndex t = 1; t <= 25; ++t) {
            SensorSet active;
            for (SensorId k = 1; k <= K; ++k)
                if (draw_uniform(rng) < 0.6) active.push_back(k);
            ledger.append_active_set(t, active);
            std::map<SensorId, double> lr;
            for (SensorId k : active) {
                const double l = std::exp(2.0 * draw_normal(rng));
                lr.emplace(k, l);
                lr_hist[k][t] = l;
            }
            eng.tick(t, active, lr);
            for (SensorId k = 1; k <= K; ++k) {
                lr_hist[k]; // sensors with no active ticks have an empty history
                const double direct =
                    evalue_direct(lr_hist, ledger, k, t, InactiveUpdate::Count);
                const double rec = eng.s_value(k) / static_cast<double>(t);
                CHECK(rec == doctest::Approx(direct).epsilon(1e-12));
            }
        }
    }
}

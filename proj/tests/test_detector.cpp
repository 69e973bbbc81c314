#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "sheref/detector.hpp"
#include "sheref/rng.hpp"

using namespace sheref;

namespace {

// Rank characterization: R = max{r : r * E_(r) / K >= 1/alpha}, reject the
// sensors holding the R largest e-values. Independent of the threshold form.
std::size_t ebh_rank_oracle(const std::map<SensorId, double>& evalues, std::size_t cap,
                            double alpha) {
    std::vector<double> vals;
    for (const auto& [k, e] : evalues) vals.push_back(e);
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    std::size_t best = 0;
    for (std::size_t r = 1; r <= vals.size(); ++r)
        if (static_cast<double>(r) * vals[r - 1] / static_cast<double>(cap) >= 1.0 / alpha)
            best = r;
    return best;
}

std::map<SensorId, double> as_map(const std::vector<double>& vals) {
    std::map<SensorId, double> m;
    for (std::size_t i = 0; i < vals.size(); ++i) m.emplace(static_cast<SensorId>(i + 1), vals[i]);
    return m;
}

} // namespace

TEST_CASE("K=4, alpha=0.5, evalues {10,3,2,1} selects exactly the top value") {
    const auto ev = as_map({10.0, 3.0, 2.0, 1.0});
    const auto [u, q] = ebh_threshold(ev, 4, 0.5);
    CHECK(u == doctest::Approx(8.0));
    CHECK(q == 1);
    const auto rep = ebh_select(ev, 4, 0.5);
    CHECK(rep.r_count == 1);
    CHECK(rep.selected == SensorSet{1});
}

TEST_CASE("empty e-value map selects nothing and floors the threshold") {
    const auto rep = ebh_select({}, 4, 0.5);
    CHECK(rep.r_count == 0);
    CHECK(rep.selected.empty());
    CHECK(*rep.threshold == doctest::Approx(8.0));
}

TEST_CASE("ten tied e-values of 2 at K=10, alpha=0.5 all pass") {
    const auto ev = as_map(std::vector<double>(10, 2.0));
    const auto [u, q] = ebh_threshold(ev, 10, 0.5);
    CHECK(u == doctest::Approx(2.0));
    CHECK(q == 10);
    CHECK(ebh_select(ev, 10, 0.5).r_count == 10);
}

TEST_CASE("all-zero e-values floor at (K/alpha, 1)") {
    const auto ev = as_map(std::vector<double>(4, 0.0));
    const auto [u, q] = ebh_threshold(ev, 4, 0.5);
    CHECK(u == doctest::Approx(8.0));
    CHECK(q == 1);
    CHECK(ebh_select(ev, 4, 0.5).r_count == 0);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(ebh_select(as_map({1.0, 2.0}), 1, 0.5), CapViolation);
    CHECK_THROWS_AS(ebh_select(as_map({1.0}), 0, 0.5), CapViolation);
    CHECK_THROWS_AS(ebh_select(as_map({1.0}), 1, 0.0), NonFiniteInput);
    CHECK_THROWS_AS(ebh_select(as_map({1.0}), 1, 1.0), NonFiniteInput);
    CHECK_THROWS_AS(ebh_select(as_map({-1.0}), 1, 0.5), NonFiniteInput);
    CHECK_THROWS_AS(ebh_select(as_map({1.0 / 0.0}), 1, 0.5), NonFiniteInput);
}

TEST_CASE("threshold form matches the rank rule on random inputs") {
    Rng rng = make_substream(101, 0);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 20;
        const std::size_t cap = n + rng() % 10;
        const double alpha = 0.02 + 0.9 * draw_uniform(rng);
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i) {
            double v = std::exp(3.0 * draw_normal(rng));
            // Inject ties often to stress the boundary.
            if (draw_uniform(rng) < 0.3 && !vals.empty()) v = vals.back();
            vals.push_back(v);
        }
        const auto ev = as_map(vals);
        const std::size_t want = ebh_rank_oracle(ev, cap, alpha);
        const auto rep_out = ebh_select(ev, cap, alpha);
        CHECK(rep_out.r_count == want);
        // Every selected e-value beats every unselected one.
        double min_sel = 1e300, max_unsel = -1.0;
        for (const auto& [k, e] : ev) {
            if (set_contains(rep_out.selected, k)) min_sel = std::min(min_sel, e);
            else max_unsel = std::max(max_unsel, e);
        }
        if (rep_out.r_count > 0 && rep_out.r_count < n) CHECK(min_sel >= max_unsel);
        // Threshold consistency: selection is exactly the level set.
        for (const auto& [k, e] : ev)
            CHECK(set_contains(rep_out.selected, k) == (e >= *rep_out.threshold));
    }
}

TEST_CASE("rejections are monotone in each e-value") {
    Rng rng = make_substream(101, 1);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng() % 10;
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i) vals.push_back(std::exp(2.0 * draw_normal(rng)));
        const double alpha = 0.05 + 0.5 * draw_uniform(rng);
        const std::size_t before = ebh_select(as_map(vals), n, alpha).r_count;
        vals[rng() % n] *= 1.0 + 2.0 * draw_uniform(rng);
        const std::size_t after = ebh_select(as_map(vals), n, alpha).r_count;
        CHECK(after >= before);
    }
}

TEST_CASE("scaling all e-values by K/K' commutes with changing the cap") {
    // R depends on e-values only through e * alpha / K, so doubling both the
    // cap and every e-value leaves the rejection count unchanged.
    Rng rng = make_substream(101, 2);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rng() % 8;
        std::vector<double> vals, scaled;
        for (std::size_t i = 0; i < n; ++i) {
            vals.push_back(std::exp(2.0 * draw_normal(rng)));
            scaled.push_back(2.0 * vals.back());
        }
        const double alpha = 0.05 + 0.5 * draw_uniform(rng);
        CHECK(ebh_select(as_map(vals), n, alpha).r_count ==
              ebh_select(as_map(scaled), 2 * n, alpha).r_count);
    }
}

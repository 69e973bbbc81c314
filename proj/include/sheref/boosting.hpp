#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "sheref/core_types.hpp"
#include "sheref/errors.hpp"
#include "sheref/evalue_engine.hpp"
#include "sheref/models.hpp"

namespace sheref {

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double norm_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

enum class BoostMethod { GD, TIPD };

// Conditional one-dimensional description of E_{k,t} under H0 given
// (F_{t-1}, A_t): E = c * L with c = (1 + S_{k,t-1}) / t and L the one-step
// LR law.
struct BoostQuery {
    NullLrLaw law;
    double c = 1.0;
    double alpha = 0.1;
    std::size_t cap = 1;
    // Precomputed sorted LR samples for the empirical path.
    std::shared_ptr<const std::vector<double>> samples;

    double mean_evalue() const { return c * law.mean(); }
};

struct BoostResult {
    double factor = 1.0;
    BoostMethod method = BoostMethod::GD;
    bool certified = false;
};

struct CeilingReached : Error {
    double b_max;
    explicit CeilingReached(double b)
        : Error("boost_factor: search ceiling b_max=" + std::to_string(b) +
                " is still feasible; raise the ceiling"),
          b_max(b) {}
};

namespace detail {

struct EmpiricalStats {
    double lhs = 0.0;
    double se = 0.0;
};

inline const std::vector<double>& require_samples(const BoostQuery& q) {
    if (!q.samples || q.samples->empty())
        throw Error("boosting: empirical law requires a sample vector");
    return *q.samples;
}

// E[b*E * 1(alpha*b*E >= 1)] for empirical samples of L, with E = c*L.
inline EmpiricalStats empirical_b1_lhs(const BoostQuery& q, double b) {
    const auto& xs = require_samples(q);
    const double cutoff = 1.0 / (q.alpha * b * q.c); // L >= cutoff triggers
    // xs is sorted ascending; tail sum from the first sample >= cutoff.
    auto it = std::lower_bound(xs.begin(), xs.end(), cutoff);
    double sum = 0.0, sumsq = 0.0;
    for (auto p = it; p != xs.end(); ++p) {
        const double g = b * q.c * (*p);
        sum += g;
        sumsq += g * g;
    }
    const double n = static_cast<double>(xs.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

inline double empirical_tail_prob(const std::vector<double>& xs, double cutoff) {
    auto it = std::lower_bound(xs.begin(), xs.end(), cutoff);
    return static_cast<double>(xs.end() - it) / static_cast<double>(xs.size());
}

// y * P(b*E >= y/alpha) for the lognormal path.
inline double lognormal_b2_term(const BoostQuery& q, double b, double y) {
    const double z = (std::log(y / (q.alpha * b * q.c)) - q.law.m) / std::sqrt(q.law.v);
    return y * norm_sf(z);
}

} // namespace detail

// Membership in B1: E[b*E * 1(alpha*b*E >= 1) | F_{t-1}, A_t] <= E[E | .].
inline bool in_B1(const BoostQuery& q, double b, double tol = 1e-9) {
    const double rhs = q.mean_evalue();
    switch (q.law.kind) {
        case NullLrLaw::Kind::LogNormal: {
            const double theta = 1.0 / (q.alpha * b * q.c);
            const double z = (q.law.m + q.law.v - std::log(theta)) / std::sqrt(q.law.v);
            const double lhs = b * q.c * std::exp(q.law.m + 0.5 * q.law.v) * norm_cdf(z);
            return lhs <= rhs + tol * std::max(1.0, rhs);
        }
        case NullLrLaw::Kind::PointMass: {
            const double e = q.c * q.law.value;
            const double lhs = (q.alpha * b * e >= 1.0) ? b * e : 0.0;
            return lhs <= rhs + tol * std::max(1.0, rhs);
        }
        case NullLrLaw::Kind::Empirical: {
            const auto st = detail::empirical_b1_lhs(q, b);
            return st.lhs <= rhs + tol * std::max(1.0, rhs) + st.se;
        }
    }
    throw Error("unreachable law kind");
}

// Membership in B2: max over integer y in 1..K of y * P(b*E >= y/alpha | .)
// <= alpha * E[E | .].
inline bool in_B2(const BoostQuery& q, double b, double tol = 1e-9) {
    const double rhs = q.alpha * q.mean_evalue();
    switch (q.law.kind) {
        case NullLrLaw::Kind::LogNormal: {
            // y -> y * survival((log y + const)/sqrt(v)) is unimodal in y,
            // so ternary search over the integer range suffices.
            std::size_t lo = 1, hi = q.cap;
            while (hi - lo > 2) {
                const std::size_t m1 = lo + (hi - lo) / 3;
                const std::size_t m2 = hi - (hi - lo) / 3;
                if (detail::lognormal_b2_term(q, b, static_cast<double>(m1)) <
                    detail::lognormal_b2_term(q, b, static_cast<double>(m2)))
                    lo = m1 + 1;
                else
                    hi = m2;
            }
            double lhs = 0.0;
            for (std::size_t y = lo; y <= hi; ++y)
                lhs = std::max(lhs, detail::lognormal_b2_term(q, b, static_cast<double>(y)));
            return lhs <= rhs + tol * std::max(1.0, rhs);
        }
        case NullLrLaw::Kind::PointMass: {
            const double e = b * q.c * q.law.value;
            double lhs = 0.0;
            const double ymax = std::floor(q.alpha * e);
            if (ymax >= 1.0) lhs = std::min(ymax, static_cast<double>(q.cap));
            return lhs <= rhs + tol * std::max(1.0, rhs);
        }
        case NullLrLaw::Kind::Empirical: {
            const auto& xs = detail::require_samples(q);
            const double n = static_cast<double>(xs.size());
            double worst = -1e300;
            for (std::size_t y = 1; y <= q.cap; ++y) {
                const double cutoff = static_cast<double>(y) / (q.alpha * b * q.c);
                const double p = detail::empirical_tail_prob(xs, cutoff);
                const double se = static_cast<double>(y) * std::sqrt(p * (1.0 - p) / n);
                worst = std::max(worst, static_cast<double>(y) * p - se);
            }
            return worst <= rhs + tol * std::max(1.0, rhs);
        }
    }
    throw Error("unreachable law kind");
}

// Largest certified member of B1 (GD) or B2 (TIPD) in [1, b_max], found by
// bisection with the lower endpoint kept feasible. The returned factor is
// always in the set, realizing the sup B - delta fallback with delta <= tol.
inline BoostResult boost_factor(const BoostQuery& q, BoostMethod method, double b_max = 0.0,
                                double tol = 1e-6) {
    if (b_max <= 0.0) b_max = 10.0 / q.alpha;
    if (b_max < 1.0) throw Error("boost_factor: b_max must be >= 1");
    const auto member = [&](double b) {
        return method == BoostMethod::GD ? in_B1(q, b) : in_B2(q, b);
    };
    if (!member(1.0)) {
        // 1 is always a member in exact arithmetic; treat the floor as certified.
        return {1.0, method, true};
    }
    if (member(b_max)) throw CeilingReached(b_max);
    double lo = 1.0, hi = b_max;
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (member(mid))
            lo = mid;
        else
            hi = mid;
    }
    return {lo, method, member(lo)};
}

// boost_factor with an automatically raised ceiling; concentrated laws can
// push the frontier past the default 10/alpha.
inline BoostResult boost_factor_auto(const BoostQuery& q, BoostMethod method, double tol = 1e-6) {
    double b_max = 10.0 / q.alpha;
    for (int attempt = 0; attempt < 60; ++attempt) {
        try {
            return boost_factor(q, method, b_max, tol);
        } catch (const CeilingReached&) {
            b_max *= 4.0;
        }
    }
    throw Error("boost_factor_auto: frontier not bracketed below 4^60 * 10/alpha");
}

// E^b_{k,t} = b_{k,t} * E_{k,t} for active sensors. Queries must cover every
// entry of the e-value vector.
inline std::map<SensorId, double> boosted_evalues(const EValueVector& evalues,
                                                  const std::map<SensorId, BoostQuery>& queries,
                                                  BoostMethod method) {
    std::map<SensorId, double> out;
    for (const auto& [k, e] : evalues.entries) {
        auto it = queries.find(k);
        if (it == queries.end())
            throw Error("boosted_evalues: no query for active sensor " + std::to_string(k));
        out.emplace(k, boost_factor_auto(it->second, method).factor * e);
    }
    return out;
}

} // namespace sheref

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sheref/core_types.hpp"
#include "sheref/errors.hpp"
#include "sheref/rng.hpp"

namespace sheref {

enum class ModelVariant {
    IidMeanShift,     // x = eps pre, mu + eps post; eps ~ N(0, sigma^2)
    SharedFactor,     // x = a_k z_t + eps (+ mu post); z_t shared per tick
    WithinSensorAR,   // x = ar * 1(k active at t-1) * x_prev + eps; ar flips at change
    FixedNetworkVAR,  // x = sum_l a_l x_{l,t-1} (+ mu post) + eps; fixed active set
};

struct ModelParams {
    ModelVariant variant = ModelVariant::IidMeanShift;
    double mu = 3.0;         // post-change mean shift (all variants except AR)
    double sigma = 1.0;      // iid noise sd
    double sigma_z = 1.0;    // shared factor sd
    double sigma_eps = 1.0;  // shared-factor idiosyncratic noise sd
    double loading_min = 0.0, loading_max = 0.5;  // a_k ~ Unif(min,max)
    double ar_pre = -0.8, ar_post = 0.8;          // within-sensor AR coefficients
    double noise_rho = -0.8; // cross-sensor AR(1) correlation of the noise vector
    std::vector<double> var_coeffs; // fixed-network VAR coefficients a_l (sensor l = index+1)
    double var_sigma = 1.0;         // VAR noise sd
};

// Conditional null law of the one-step likelihood ratio given
// (F_{t-1}, A_t). Gaussian mean-shift conditionals give a lognormal law
// with unit mean (m + v/2 = 0); a vanishing shift degenerates to a point
// mass at 1.
struct NullLrLaw {
    enum class Kind { LogNormal, PointMass, Empirical };

    Kind kind = Kind::PointMass;
    double m = 0.0;      // log-mean (LogNormal)
    double v = 0.0;      // log-variance (LogNormal), > 0
    double value = 1.0;  // PointMass

    static NullLrLaw log_normal_unit_mean(double v) {
        NullLrLaw law;
        law.kind = Kind::LogNormal;
        law.v = v;
        law.m = -0.5 * v; // unit mean by construction
        return law;
    }
    static NullLrLaw point_mass(double value) {
        NullLrLaw law;
        law.kind = Kind::PointMass;
        law.value = value;
        return law;
    }

    double mean() const {
        switch (kind) {
            case Kind::LogNormal: return std::exp(m + 0.5 * v);
            case Kind::PointMass: return value;
            default: return 1.0;
        }
    }
};

// Observations at time t-1 for the sensors that were active at t-1.
// Absence of a sensor means it was not active (or nothing was observed).
struct History {
    std::unordered_map<SensorId, double> prev;

    bool was_active(SensorId k) const { return prev.count(k) != 0; }
    double prev_value(SensorId k) const {
        auto it = prev.find(k);
        if (it == prev.end())
            throw MissingHistory("no observation at t-1 for sensor " + std::to_string(k));
        return it->second;
    }
};

// Pre/post conditional Gaussian moments at (k, t) given the history:
// X | H0 ~ N(mean_pre, var), X | H1 ~ N(mean_post, var).
struct ConditionalMoments {
    double mean_pre = 0.0;
    double mean_post = 0.0;
    double var = 1.0;

    double shift() const { return mean_post - mean_pre; }
};

// A generative model with known pre/post conditional densities. All four
// variants have Gaussian mean-shift conditionals, so likelihood ratios and
// null LR laws are available in closed form. Immutable after construction;
// per-tick shared draws are staged through begin_tick.
class LikelihoodModel {
public:
    LikelihoodModel(ModelParams params, std::size_t pool_size)
        : params_(params), pool_size_(pool_size) {
        validate();
        if (params_.variant == ModelVariant::SharedFactor)
            loadings_.assign(pool_size_, 0.5 * (params_.loading_min + params_.loading_max));
    }

    // Shared-factor loadings a_k are random per scenario; draw them from the
    // replication's stream so each replication gets fresh loadings.
    void draw_loadings(Rng& rng) {
        if (params_.variant != ModelVariant::SharedFactor) return;
        for (std::size_t i = 0; i < pool_size_; ++i)
            loadings_[i] = params_.loading_min +
                           (params_.loading_max - params_.loading_min) * draw_uniform(rng);
    }
    void set_loadings(std::vector<double> a) { loadings_ = std::move(a); }
    double loading(SensorId k) const { return loadings_.at(k - 1); }

    const ModelParams& params() const { return params_; }
    std::size_t pool_size() const { return pool_size_; }

    // Draw the randomness shared across sensors within one tick: the common
    // factor Z_t, or the full-pool correlated noise vector for the AR model.
    void begin_tick(TimeIndex /*t*/, Rng& rng) {
        switch (params_.variant) {
            case ModelVariant::SharedFactor:
                shared_z_ = params_.sigma_z * draw_normal(rng);
                break;
            case ModelVariant::WithinSensorAR: {
                // AR(1) construction over sensor index gives exactly
                // cov(eps_i, eps_j) = rho^{|i-j|} with unit variances.
                const double rho = params_.noise_rho;
                const double s = std::sqrt(1.0 - rho * rho);
                tick_noise_.resize(pool_size_);
                double prev = draw_normal(rng);
                tick_noise_[0] = prev;
                for (std::size_t i = 1; i < pool_size_; ++i) {
                    prev = rho * prev + s * draw_normal(rng);
                    tick_noise_[i] = prev;
                }
                break;
            }
            default:
                break;
        }
    }

    double sample_observation(SensorId k, TimeIndex t, bool post, const History& h, Rng& rng) const {
        const ConditionalMoments cm = conditional_moments(k, h);
        const double mean = post ? cm.mean_post : cm.mean_pre;
        switch (params_.variant) {
            case ModelVariant::IidMeanShift:
            case ModelVariant::FixedNetworkVAR:
                return mean + std::sqrt(cm.var) * draw_normal(rng);
            case ModelVariant::SharedFactor:
                return loading(k) * shared_z_ + (post ? params_.mu : 0.0) +
                       params_.sigma_eps * draw_normal(rng);
            case ModelVariant::WithinSensorAR:
                return mean + tick_noise_.at(k - 1);
        }
        (void)t;
        throw Error("unreachable model variant");
    }

    double log_likelihood_ratio(SensorId k, const History& h, double x) const {
        const ConditionalMoments cm = conditional_moments(k, h);
        if (!std::isfinite(x)) throw SupportViolation("non-finite observation");
        const double d0 = x - cm.mean_pre;
        const double d1 = x - cm.mean_post;
        return (d0 * d0 - d1 * d1) / (2.0 * cm.var);
    }

    double likelihood_ratio(SensorId k, const History& h, double x) const {
        return std::exp(log_likelihood_ratio(k, h, x));
    }

    // Law of the one-step LR under H0 given the history. Gaussian shift
    // delta with conditional variance s^2 gives log LR ~ N(-d^2/2s^2, d^2/s^2).
    NullLrLaw null_lr_law(SensorId k, const History& h) const {
        const ConditionalMoments cm = conditional_moments(k, h);
        const double delta = cm.shift();
        if (delta == 0.0) return NullLrLaw::point_mass(1.0);
        return NullLrLaw::log_normal_unit_mean(delta * delta / cm.var);
    }

    ConditionalMoments conditional_moments(SensorId k, const History& h) const {
        ConditionalMoments cm;
        switch (params_.variant) {
            case ModelVariant::IidMeanShift:
                cm.mean_pre = 0.0;
                cm.mean_post = params_.mu;
                cm.var = params_.sigma * params_.sigma;
                break;
            case ModelVariant::SharedFactor: {
                // Z_t is never revealed; the conditional density marginalizes it.
                const double a = loading(k);
                cm.mean_pre = 0.0;
                cm.mean_post = params_.mu;
                cm.var = a * a * params_.sigma_z * params_.sigma_z +
                         params_.sigma_eps * params_.sigma_eps;
                break;
            }
            case ModelVariant::WithinSensorAR: {
                // A sensor inactive at t-1 has both conditional means 0 (LR = 1).
                const double xp = h.was_active(k) ? h.prev_value(k) : 0.0;
                cm.mean_pre = params_.ar_pre * xp;
                cm.mean_post = params_.ar_post * xp;
                cm.var = 1.0;
                break;
            }
            case ModelVariant::FixedNetworkVAR: {
                double common = 0.0;
                for (std::size_t l = 0; l < params_.var_coeffs.size(); ++l) {
                    const SensorId lid = static_cast<SensorId>(l + 1);
                    if (h.was_active(lid))
                        common += params_.var_coeffs[l] * h.prev_value(lid);
                }
                cm.mean_pre = common;
                cm.mean_post = common + params_.mu;
                cm.var = params_.var_sigma * params_.var_sigma;
                break;
            }
        }
        return cm;
    }

private:
    void validate() const {
        switch (params_.variant) {
            case ModelVariant::IidMeanShift:
                if (params_.sigma <= 0) throw ConfigError("model.sigma must be > 0");
                break;
            case ModelVariant::SharedFactor:
                if (params_.sigma_z <= 0 || params_.sigma_eps <= 0)
                    throw ConfigError("model.sigma_z and model.sigma_eps must be > 0");
                break;
            case ModelVariant::WithinSensorAR:
                if (std::abs(params_.ar_pre) >= 1 || std::abs(params_.ar_post) >= 1)
                    throw ConfigError("model.ar_pre and model.ar_post must have |a| < 1");
                if (std::abs(params_.noise_rho) >= 1)
                    throw ConfigError("model.noise_rho must have |rho| < 1");
                break;
            case ModelVariant::FixedNetworkVAR:
                for (double a : params_.var_coeffs)
                    if (std::abs(a) >= 1) throw ConfigError("model.var_coeffs must have |a_l| < 1");
                if (params_.var_sigma <= 0) throw ConfigError("model.var_sigma must be > 0");
                break;
        }
    }

    ModelParams params_;
    std::size_t pool_size_;
    std::vector<double> loadings_;
    double shared_z_ = 0.0;
    std::vector<double> tick_noise_;
};

} // namespace sheref

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sheref/network_sim.hpp"

namespace sheref {

// Flat key = value configuration with dotted section keys (run.*, model.*,
// policy.*). Lines starting with '#' and blank lines are ignored.
class FlatConfig {
public:
    static FlatConfig parse_file(const std::string& path);
    static FlatConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);

    std::string get(const std::string& key) const;                       // required
    std::string get_or(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    std::uint64_t get_u64(const std::string& key) const;                  // required
    long get_long(const std::string& key, long def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<std::string> get_list(const std::string& key, const std::string& def) const;
    std::vector<double> get_double_list(const std::string& key, const std::string& def) const;

    const std::vector<std::pair<std::string, std::string>>& ordered() const { return order_; }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::pair<std::string, std::string>> order_;
};

struct CliOverrides {
    std::optional<double> alpha;
    std::optional<std::string> method;
    std::optional<long> reps;
    std::optional<std::uint64_t> seed;
    std::optional<long> threads;
};

// One simulation campaign: the base scenario plus the method/alpha grid the
// config requests (one metrics row per pair).
struct Campaign {
    ScenarioConfig base;
    std::vector<Method> methods;
    std::vector<double> alphas;

    ScenarioConfig scenario(Method m, double a) const {
        ScenarioConfig c = base;
        c.method = m;
        c.alpha = a;
        return c;
    }
};

Campaign build_campaign(const FlatConfig& cfg, const CliOverrides& overrides = {});

// Fully resolved configuration as config-file lines; parsing them back
// reproduces the campaign.
std::vector<std::string> echo_config(const Campaign& campaign);

} // namespace sheref

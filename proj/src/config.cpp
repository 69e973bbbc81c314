#include "sheref/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sheref/errors.hpp"

namespace sheref {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::set<std::string> kKnownKeys = {
    "run.seed", "run.reps", "run.alpha", "run.method", "run.t_bar", "run.cap",
    "run.pool", "run.initial_active", "run.p_change", "run.threads",
    "run.boost_tol", "run.record_evalues", "run.inactive_update",
    "model.variant", "model.mu", "model.sigma", "model.sigma_z", "model.sigma_eps",
    "model.factor_loading_range", "model.ar_pre", "model.ar_post", "model.noise_rho",
    "model.var_coeffs", "model.var_sigma",
    "policy.kind",
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + s + "' as a number");
    }
}

} // namespace

FlatConfig FlatConfig::parse_string(const std::string& text) {
    FlatConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (kKnownKeys.count(key) == 0)
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        cfg.set(key, value);
    }
    return cfg;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

void FlatConfig::set(const std::string& key, const std::string& value) {
    if (values_.count(key) == 0) order_.emplace_back(key, value);
    else
        for (auto& kv : order_)
            if (kv.first == key) kv.second = value;
    values_[key] = value;
}

std::string FlatConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

std::string FlatConfig::get_or(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

double FlatConfig::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : parse_double(key, it->second);
}

std::uint64_t FlatConfig::get_u64(const std::string& key) const {
    const std::string s = get(key);
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + s + "' as an unsigned integer");
    }
}

long FlatConfig::get_long(const std::string& key, long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + it->second + "' as an integer");
    }
}

bool FlatConfig::get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + it->second + "'");
}

std::vector<std::string> FlatConfig::get_list(const std::string& key, const std::string& def) const {
    return split_list(get_or(key, def));
}

std::vector<double> FlatConfig::get_double_list(const std::string& key,
                                                const std::string& def) const {
    std::vector<double> out;
    for (const auto& s : get_list(key, def)) out.push_back(parse_double(key, s));
    return out;
}

Campaign build_campaign(const FlatConfig& cfg, const CliOverrides& overrides) {
    Campaign cam;
    ScenarioConfig& sc = cam.base;

    // All randomness flows from run.seed; a missing seed is an error rather
    // than a silent time-based default.
    sc.seed = overrides.seed ? *overrides.seed : cfg.get_u64("run.seed");
    sc.replications =
        static_cast<int>(overrides.reps ? *overrides.reps : cfg.get_long("run.reps", 500));
    sc.t_bar = static_cast<TimeIndex>(cfg.get_long("run.t_bar", 30));
    sc.cap = static_cast<std::size_t>(cfg.get_long("run.cap", 100));
    sc.pool_size = static_cast<std::size_t>(cfg.get_long("run.pool", 1000));
    sc.initial_active = static_cast<std::size_t>(cfg.get_long("run.initial_active", 100));
    sc.p_change = cfg.get_double("run.p_change", 0.1);
    sc.threads =
        static_cast<int>(overrides.threads ? *overrides.threads : cfg.get_long("run.threads", 1));
    sc.boost_tol = cfg.get_double("run.boost_tol", 1e-6);
    sc.record_evalues = cfg.get_bool("run.record_evalues", false);
    const std::string inactive = cfg.get_or("run.inactive_update", "count");
    if (inactive == "count") sc.inactive_update = InactiveUpdate::Count;
    else if (inactive == "hold") sc.inactive_update = InactiveUpdate::Hold;
    else throw ConfigError("key 'run.inactive_update': expected count or hold, got '" +
                           inactive + "'");
    sc.policy = policy_from_name(cfg.get_or("policy.kind", "replace_from_pool"));

    const std::string variant = cfg.get("model.variant");
    ModelParams& m = sc.model;
    if (variant == "iid_mean_shift") m.variant = ModelVariant::IidMeanShift;
    else if (variant == "shared_factor") m.variant = ModelVariant::SharedFactor;
    else if (variant == "within_sensor_ar") m.variant = ModelVariant::WithinSensorAR;
    else if (variant == "fixed_network_var") m.variant = ModelVariant::FixedNetworkVAR;
    else throw ConfigError("key 'model.variant': unknown variant '" + variant + "'");

    m.mu = cfg.get_double("model.mu", 3.0);
    m.sigma = cfg.get_double("model.sigma", 1.0);
    m.sigma_z = cfg.get_double("model.sigma_z", 1.0);
    m.sigma_eps = cfg.get_double("model.sigma_eps", 1.0);
    const auto range = cfg.get_double_list("model.factor_loading_range", "0,0.5");
    if (range.size() != 2 || range[0] > range[1])
        throw ConfigError("key 'model.factor_loading_range': expected 'lo,hi' with lo <= hi");
    m.loading_min = range[0];
    m.loading_max = range[1];
    m.ar_pre = cfg.get_double("model.ar_pre", -0.8);
    m.ar_post = cfg.get_double("model.ar_post", 0.8);
    m.noise_rho = cfg.get_double("model.noise_rho", -0.8);
    m.var_coeffs = cfg.get_double_list("model.var_coeffs", "");
    m.var_sigma = cfg.get_double("model.var_sigma", 1.0);

    if (overrides.method) {
        cam.methods = {method_from_name(*overrides.method)};
    } else {
        for (const auto& s : cfg.get_list("run.method", "SHEREF"))
            cam.methods.push_back(method_from_name(s));
    }
    if (overrides.alpha) {
        cam.alphas = {*overrides.alpha};
    } else {
        cam.alphas = cfg.get_double_list("run.alpha", "0.1");
    }
    if (cam.methods.empty()) throw ConfigError("key 'run.method': empty method list");
    if (cam.alphas.empty()) throw ConfigError("key 'run.alpha': empty alpha list");

    sc.method = cam.methods.front();
    sc.alpha = cam.alphas.front();
    cam.base.validate();
    for (double a : cam.alphas)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("key 'run.alpha': alpha must be in (0,1)");
    return cam;
}

std::vector<std::string> echo_config(const Campaign& cam) {
    const ScenarioConfig& sc = cam.base;
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    std::string methods, alphas;
    for (std::size_t i = 0; i < cam.methods.size(); ++i)
        methods += (i ? "," : "") + method_name(cam.methods[i]);
    for (std::size_t i = 0; i < cam.alphas.size(); ++i)
        alphas += (i ? "," : "") + fmt(cam.alphas[i]);

    std::vector<std::string> lines;
    lines.push_back("run.seed = " + std::to_string(sc.seed));
    lines.push_back("run.reps = " + std::to_string(sc.replications));
    lines.push_back("run.alpha = " + alphas);
    lines.push_back("run.method = " + methods);
    lines.push_back("run.t_bar = " + std::to_string(sc.t_bar));
    lines.push_back("run.cap = " + std::to_string(sc.cap));
    lines.push_back("run.pool = " + std::to_string(sc.pool_size));
    lines.push_back("run.initial_active = " + std::to_string(sc.initial_active));
    lines.push_back("run.p_change = " + fmt(sc.p_change));
    lines.push_back("run.threads = " + std::to_string(sc.threads));
    lines.push_back("run.boost_tol = " + fmt(sc.boost_tol));
    lines.push_back(std::string("run.record_evalues = ") + (sc.record_evalues ? "true" : "false"));
    lines.push_back(std::string("run.inactive_update = ") +
                    (sc.inactive_update == InactiveUpdate::Count ? "count" : "hold"));

    const ModelParams& m = sc.model;
    std::string variant;
    switch (m.variant) {
        case ModelVariant::IidMeanShift: variant = "iid_mean_shift"; break;
        case ModelVariant::SharedFactor: variant = "shared_factor"; break;
        case ModelVariant::WithinSensorAR: variant = "within_sensor_ar"; break;
        case ModelVariant::FixedNetworkVAR: variant = "fixed_network_var"; break;
    }
    lines.push_back("model.variant = " + variant);
    lines.push_back("model.mu = " + fmt(m.mu));
    lines.push_back("model.sigma = " + fmt(m.sigma));
    lines.push_back("model.sigma_z = " + fmt(m.sigma_z));
    lines.push_back("model.sigma_eps = " + fmt(m.sigma_eps));
    lines.push_back("model.factor_loading_range = " + fmt(m.loading_min) + "," + fmt(m.loading_max));
    lines.push_back("model.ar_pre = " + fmt(m.ar_pre));
    lines.push_back("model.ar_post = " + fmt(m.ar_post));
    lines.push_back("model.noise_rho = " + fmt(m.noise_rho));
    if (!m.var_coeffs.empty()) {
        std::string coeffs;
        for (std::size_t i = 0; i < m.var_coeffs.size(); ++i)
            coeffs += (i ? "," : "") + fmt(m.var_coeffs[i]);
        lines.push_back("model.var_coeffs = " + coeffs);
    }
    lines.push_back("model.var_sigma = " + fmt(m.var_sigma));
    lines.push_back("policy.kind = " + policy_name(sc.policy));
    return lines;
}

} // namespace sheref

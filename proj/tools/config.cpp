#include "config.hpp"

#include "vsense/error.hpp"
#include "vsense/format.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <charconv>
#include <sstream>

namespace vsense::cli {

namespace pt = boost::property_tree;

namespace {

Error config_error(const std::string& key, const std::string& detail) {
    return Error(Errc::ConfigError, key + ": " + detail);
}

pt::ptree::path_type path_of(const std::string& key) { return pt::ptree::path_type(key, '.'); }

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "model.source",          "model.matrices",         "model.n_masses",
        "model.mass",            "model.stiffness",        "model.fixed_right",
        "beam.length",           "beam.width",             "beam.thickness",
        "beam.youngs_modulus",   "beam.density",           "beam.n_elements",
        "partition.masters",     "partition.measured",     "reduction.n_modes",
        "reduction.damping_a",   "reduction.damping_b",    "reduction.check_modes",
        "integrator.beta",       "integrator.delta",       "integrator.dt",
        "integrator.input_kind", "regularization.alpha",   "regularization.grid_count",
        "regularization.grid_lo", "regularization.grid_hi", "regularization.calibration_samples",
        "excitation.type",       "excitation.profiles",    "excitation.scale",
        "excitation.duration",   "excitation.substeps",    "excitation.f_lo",
        "excitation.f_hi",       "noise.fraction",         "noise.seed",
        "identify.input",        "identify.full_field",    "akf.input",
        "akf.process_noise_state", "akf.process_noise_force", "akf.measurement_noise",
        "akf.initial_covariance", "akf.initial_state_covariance", "metrics.candidate",
        "metrics.case_id",       "metrics.f0",             "metrics.fmax",
        "bench.cases",           "bench.threads",          "paths.out",
    };
    return keys;
}

Config Config::from_file(const std::filesystem::path& path) {
    Config c;
    try {
        pt::read_ini(path.string(), c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    return c;
}

Config Config::from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    try {
        pt::read_ini(in, c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    return c;
}

void Config::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw config_error(assignment, "expected section.key=value");
    put(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

void Config::put(const std::string& key, const std::string& value) {
    if (std::count(key.begin(), key.end(), '.') != 1) throw config_error(key, "expected section.key");
    tree_.put(path_of(key), value);
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(path_of(key)).has_value(); }

std::string Config::get_string(const std::string& key, const std::optional<std::string>& fallback) const {
    if (auto v = tree_.get_optional<std::string>(path_of(key))) return std::string(trim(*v));
    if (fallback) return *fallback;
    throw config_error(key, "required key is missing");
}

double Config::get_double(const std::string& key, const std::optional<double>& fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw config_error(key, "required key is missing");
    }
    const std::string text = get_string(key);
    try {
        return parse_double(text);
    } catch (const Error&) {
        throw config_error(key, "not a number: '" + text + "'");
    }
}

int Config::get_int(const std::string& key, const std::optional<int>& fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw config_error(key, "required key is missing");
    }
    const std::string text = get_string(key);
    int v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw config_error(key, "not an integer: '" + text + "'");
    }
    return v;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string text = get_string(key);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw config_error(key, "not an unsigned integer: '" + text + "'");
    }
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string text = get_string(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw config_error(key, "not a boolean: '" + text + "'");
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::optional<std::vector<std::string>>& fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw config_error(key, "required key is missing");
    }
    std::vector<std::string> out;
    std::istringstream in(get_string(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto t = trim(item);
        if (t.empty()) throw config_error(key, "empty list entry");
        out.emplace_back(t);
    }
    return out;
}

void Config::check_known_keys() const {
    const auto& keys = known_keys();
    for (const auto& [section, body] : tree_) {
        if (body.empty() && !body.data().empty()) throw config_error(section, "key outside of any section");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw config_error(key, "unknown key");
            }
        }
    }
}

}  // namespace vsense::cli

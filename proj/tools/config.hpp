#pragma once

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vsense::cli {

// INI-style run configuration ([section] key = value). Keys are addressed as
// "section.key"; unknown keys and unparsable values raise ConfigError naming
// the key.
class Config {
public:
    Config() = default;

    static Config from_file(const std::filesystem::path& path);
    static Config from_string(const std::string& text);

    // `assignment` is "section.key=value".
    void set(const std::string& assignment);
    void put(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) const;
    double get_double(const std::string& key, const std::optional<double>& fallback = std::nullopt) const;
    int get_int(const std::string& key, const std::optional<int>& fallback = std::nullopt) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated list; an empty value gives an empty list.
    std::vector<std::string> get_list(const std::string& key,
                                      const std::optional<std::vector<std::string>>& fallback = std::nullopt) const;

    // Throws ConfigError for the first key that is not recognized.
    void check_known_keys() const;

private:
    boost::property_tree::ptree tree_;
};

const std::vector<std::string>& known_keys();

}  // namespace vsense::cli

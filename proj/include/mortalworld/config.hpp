#pragma once
// Minimal TOML-style config reader: [section] tables, dotted keys,
// strings, numbers, booleans, and (nested) arrays. Only what the
// experiment files need.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mortalworld {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigValue {
    std::variant<double, bool, std::string, std::vector<ConfigValue>> data;

    double as_number() const;
    long long as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;
    const std::vector<ConfigValue>& as_array() const;
};

// Flat map keyed "section.key" (dotted keys concatenate).
class ConfigTable {
public:
    static ConfigTable parse(const std::string& text);
    static ConfigTable parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const ConfigValue& at(const std::string& key) const;

    double number(const std::string& key, std::optional<double> fallback = {}) const;
    long long integer(const std::string& key, std::optional<long long> fallback = {}) const;
    bool boolean(const std::string& key, std::optional<bool> fallback = {}) const;
    std::string string(const std::string& key,
                       std::optional<std::string> fallback = {}) const;

    void set(const std::string& key, ConfigValue value) {
        values_[key] = std::move(value);
    }
    const std::map<std::string, ConfigValue>& values() const { return values_; }

    // Canonical serialization (sorted keys) used for reproducibility
    // stamps in output summaries.
    std::string canonical() const;

private:
    std::map<std::string, ConfigValue> values_;
};

}  // namespace mortalworld

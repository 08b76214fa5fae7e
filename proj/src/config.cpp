#include "mortalworld/config.hpp"

#include <cctype>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace mortalworld {

double ConfigValue::as_number() const {
    if (const double* d = std::get_if<double>(&data)) return *d;
    throw ConfigError("expected a number");
}

long long ConfigValue::as_int() const {
    double d = as_number();
    auto i = static_cast<long long>(d);
    if (static_cast<double>(i) != d) throw ConfigError("expected an integer");
    return i;
}

bool ConfigValue::as_bool() const {
    if (const bool* b = std::get_if<bool>(&data)) return *b;
    throw ConfigError("expected a boolean");
}

const std::string& ConfigValue::as_string() const {
    if (const std::string* s = std::get_if<std::string>(&data)) return *s;
    throw ConfigError("expected a string");
}

const std::vector<ConfigValue>& ConfigValue::as_array() const {
    if (const auto* a = std::get_if<std::vector<ConfigValue>>(&data)) return *a;
    throw ConfigError("expected an array");
}

namespace {

void skip_ws(const std::string& s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

ConfigValue parse_value(const std::string& s, std::size_t& i);

ConfigValue parse_array(const std::string& s, std::size_t& i) {
    ++i;  // '['
    std::vector<ConfigValue> items;
    for (;;) {
        skip_ws(s, i);
        if (i >= s.size()) throw ConfigError("unterminated array");
        if (s[i] == ']') {
            ++i;
            break;
        }
        items.push_back(parse_value(s, i));
        skip_ws(s, i);
        if (i < s.size() && s[i] == ',') ++i;
    }
    return ConfigValue{std::move(items)};
}

ConfigValue parse_value(const std::string& s, std::size_t& i) {
    skip_ws(s, i);
    if (i >= s.size()) throw ConfigError("missing value");
    char c = s[i];
    if (c == '[') return parse_array(s, i);
    if (c == '"') {
        std::size_t end = s.find('"', i + 1);
        if (end == std::string::npos) throw ConfigError("unterminated string");
        std::string v = s.substr(i + 1, end - i - 1);
        i = end + 1;
        return ConfigValue{std::move(v)};
    }
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != '#') ++i;
    std::string token = s.substr(start, i - start);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) {
        token.pop_back();
    }
    if (token == "true") return ConfigValue{true};
    if (token == "false") return ConfigValue{false};
    try {
        std::size_t used = 0;
        double d = std::stod(token, &used);
        if (used != token.size()) throw ConfigError("trailing junk");
        return ConfigValue{d};
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("cannot parse value '{}'", token));
    }
}

std::string format_value(const ConfigValue& v) {
    if (const double* d = std::get_if<double>(&v.data)) {
        return fmt::format("{:.17g}", *d);
    }
    if (const bool* b = std::get_if<bool>(&v.data)) return *b ? "true" : "false";
    if (const std::string* s = std::get_if<std::string>(&v.data)) {
        return '"' + *s + '"';
    }
    std::string out = "[";
    const auto& items = std::get<std::vector<ConfigValue>>(v.data);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += format_value(items[i]);
    }
    return out + "]";
}

}  // namespace

ConfigTable ConfigTable::parse(const std::string& text) {
    ConfigTable table;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = 0;
        skip_ws(line, i);
        if (i >= line.size() || line[i] == '#') continue;
        if (line[i] == '[') {
            std::size_t end = line.find(']', i);
            if (end == std::string::npos) {
                throw ConfigError(fmt::format("line {}: unterminated [section]", lineno));
            }
            section = line.substr(i + 1, end - i - 1);
            continue;
        }
        std::size_t eq = line.find('=', i);
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("line {}: expected key = value", lineno));
        }
        std::string key = line.substr(i, eq - i);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", lineno));
        std::size_t vi = eq + 1;
        ConfigValue value;
        try {
            value = parse_value(line, vi);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("line {}: {}", lineno, e.what()));
        }
        std::string full = section.empty() ? key : section + "." + key;
        table.values_[full] = std::move(value);
    }
    return table;
}

ConfigTable ConfigTable::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const ConfigValue& ConfigTable::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

double ConfigTable::number(const std::string& key,
                           std::optional<double> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing config key: " + key);
    }
    return at(key).as_number();
}

long long ConfigTable::integer(const std::string& key,
                               std::optional<long long> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing config key: " + key);
    }
    return at(key).as_int();
}

bool ConfigTable::boolean(const std::string& key,
                          std::optional<bool> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing config key: " + key);
    }
    return at(key).as_bool();
}

std::string ConfigTable::string(const std::string& key,
                                std::optional<std::string> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing config key: " + key);
    }
    return at(key).as_string();
}

std::string ConfigTable::canonical() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key + " = " + format_value(value) + "\n";
    }
    return out;
}

}  // namespace mortalworld

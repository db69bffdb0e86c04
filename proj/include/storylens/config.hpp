#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace storylens {

// Minimal TOML-style key/value configuration: [section] headers, `key = value`
// lines, '#' comments. Values are quoted strings, integers, floats, or
// booleans; keys flatten to "section.key".
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(std::string_view text);

    bool has(std::string_view key) const;

    std::string get_string(std::string_view key, std::string_view fallback = "") const;
    std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
    double get_double(std::string_view key, double fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;

    void set(std::string key, std::string value);  // command-line overrides

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace storylens

#include "storylens/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace storylens {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string unquote(const std::string& v, std::size_t line_no) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
        if (v.back() != v.front())
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": unterminated quote");
        return v.substr(1, v.size() - 2);
    }
    return v;
}

}  // namespace

Config Config::parse_string(std::string_view text) {
    Config config;
    std::istringstream in{std::string(text)};
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // strip comments outside quotes
        bool in_quote = false;
        char quote_char = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (in_quote) {
                if (c == quote_char) in_quote = false;
            } else if (c == '"' || c == '\'') {
                in_quote = true;
                quote_char = c;
            } else if (c == '#') {
                line.resize(i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = unquote(trim(t.substr(eq + 1)), line_no);
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        config.values_[key] = value;
    }
    return config;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

bool Config::has(std::string_view key) const { return values_.count(std::string(key)) > 0; }

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
    auto it = values_.find(std::string(key));
    return it == values_.end() ? std::string(fallback) : it->second;
}

std::int64_t Config::get_int(std::string_view key, std::int64_t fallback) const {
    auto it = values_.find(std::string(key));
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const auto v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + std::string(key) + ": not an integer: " +
                                 it->second);
    }
}

double Config::get_double(std::string_view key, double fallback) const {
    auto it = values_.find(std::string(key));
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const auto v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + std::string(key) + ": not a number: " +
                                 it->second);
    }
}

bool Config::get_bool(std::string_view key, bool fallback) const {
    auto it = values_.find(std::string(key));
    if (it == values_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw std::runtime_error("config key " + std::string(key) + ": not a boolean: " + it->second);
}

void Config::set(std::string key, std::string value) {
    values_[std::move(key)] = std::move(value);
}

}  // namespace storylens

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ballbot/errors.hpp"

namespace ballbot {

// Flat "key = value" text config. '#' starts a comment, blank lines ignored.
// Keys are kept in insertion order so a saved file diffs cleanly.
class KeyedConfig {
  public:
    KeyedConfig() = default;

    static KeyedConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        KeyedConfig cfg;
        cfg.parse(in, path);
        return cfg;
    }

    static KeyedConfig from_string(const std::string& text) {
        std::istringstream in(text);
        KeyedConfig cfg;
        cfg.parse(in, "<string>");
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key: " + key);
        return it->second;
    }

    std::string get_str(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_str(key)); }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    long get_int(const std::string& key) const { return to_int(key, get_str(key)); }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_int(key, it->second);
    }

    void set(const std::string& key, const std::string& value) {
        if (!values_.count(key)) order_.push_back(key);
        values_[key] = value;
    }

    void set_double(const std::string& key, double value) {
        std::ostringstream os;
        os.precision(17);
        os << value;
        set(key, os.str());
    }

    const std::vector<std::string>& keys() const { return order_; }

    std::string to_text() const {
        std::ostringstream os;
        for (const auto& k : order_) os << k << " = " << values_.at(k) << "\n";
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write config file: " + path);
        out << to_text();
    }

    // Overlay: values in `other` replace or extend this config.
    void merge(const KeyedConfig& other) {
        for (const auto& k : other.order_) set(k, other.values_.at(k));
    }

  private:
    void parse(std::istream& in, const std::string& origin) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            set(key, value);
        }
    }

    static std::string trim(const std::string& s) {
        auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
        auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
        return b < e ? std::string(b, e) : std::string();
    }

    static double to_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' is not a number: " + v);
        }
    }

    static long to_int(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const long i = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return i;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' is not an integer: " + v);
        }
    }

    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

}  // namespace ballbot

#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "elink/text.hpp"

namespace elink {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One parsed config value: scalar or flat array of scalars.
struct ConfigValue {
    enum class Kind { string, number, boolean, array };
    Kind kind = Kind::string;
    std::string str;
    double num = 0.0;
    bool flag = false;
    std::vector<ConfigValue> items;
};

namespace detail {

inline ConfigValue parse_scalar(const std::string& key, std::string_view raw) {
    ConfigValue v;
    std::string text{trim(raw)};
    if (text.empty()) throw ConfigError(key + ": empty value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ConfigError(key + ": unterminated string");
        v.kind = ConfigValue::Kind::string;
        std::string out;
        for (std::size_t i = 1; i + 1 < text.size(); ++i) {
            if (text[i] == '\\' && i + 2 < text.size() &&
                (text[i + 1] == '"' || text[i + 1] == '\\')) {
                out += text[++i];
            } else {
                out += text[i];
            }
        }
        v.str = out;
        return v;
    }
    if (text == "true" || text == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.flag = text == "true";
        return v;
    }
    try {
        std::size_t used = 0;
        v.num = std::stod(text, &used);
        if (used == text.size()) {
            v.kind = ConfigValue::Kind::number;
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": cannot parse value: " + text);
}

}  // namespace detail

// Typed accessors shared by the config file and the flag-override path; every
// failure names the offending key.
inline std::string value_as_string(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::string) throw ConfigError(key + ": expected a string");
    return v.str;
}

inline double value_as_double(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::number) throw ConfigError(key + ": expected a number");
    return v.num;
}

inline int value_as_int(const std::string& key, const ConfigValue& v) {
    double d = value_as_double(key, v);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw ConfigError(key + ": expected an integer");
    return i;
}

inline bool value_as_bool(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::boolean) throw ConfigError(key + ": expected true or false");
    return v.flag;
}

inline std::vector<std::string> value_as_string_list(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::array) throw ConfigError(key + ": expected an array");
    std::vector<std::string> out;
    for (const auto& item : v.items) out.push_back(value_as_string(key, item));
    return out;
}

inline std::vector<int> value_as_int_list(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::array) throw ConfigError(key + ": expected an array");
    std::vector<int> out;
    for (const auto& item : v.items) out.push_back(value_as_int(key, item));
    return out;
}

// Flat declarative config: `key = value` per line, full-line # comments,
// values are quoted strings, numbers, true/false, or [a, b, c] arrays of
// those. No sections, no nesting.
class ConfigFile {
  public:
    static ConfigFile parse(std::istream& in) {
        ConfigFile cfg;
        std::string line;
        std::uint64_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view sv = trim(line);
            if (sv.empty() || sv.front() == '#') continue;
            auto eq = sv.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            std::string key{trim(sv.substr(0, eq))};
            std::string_view raw = trim(sv.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            for (char c : key)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                    throw ConfigError(key + ": invalid key character");
            ConfigValue value;
            if (!raw.empty() && raw.front() == '[') {
                if (raw.back() != ']') throw ConfigError(key + ": unterminated array");
                value.kind = ConfigValue::Kind::array;
                std::string_view body = raw.substr(1, raw.size() - 2);
                std::size_t start = 0;
                bool in_string = false;
                for (std::size_t i = 0; i <= body.size(); ++i) {
                    if (i < body.size() && body[i] == '"') in_string = !in_string;
                    if (i == body.size() || (body[i] == ',' && !in_string)) {
                        std::string_view piece = trim(body.substr(start, i - start));
                        if (!piece.empty()) value.items.push_back(detail::parse_scalar(key, piece));
                        start = i + 1;
                    }
                }
            } else {
                value = detail::parse_scalar(key, raw);
            }
            cfg.values_[key] = std::move(value);
        }
        return cfg;
    }

    static ConfigFile load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config: " + path.string());
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const std::map<std::string, ConfigValue>& values() const { return values_; }

    std::string get_string(const std::string& key) const { return value_as_string(key, at(key)); }
    double get_double(const std::string& key) const { return value_as_double(key, at(key)); }
    int get_int(const std::string& key) const { return value_as_int(key, at(key)); }
    bool get_bool(const std::string& key) const { return value_as_bool(key, at(key)); }
    std::vector<std::string> get_string_list(const std::string& key) const {
        return value_as_string_list(key, at(key));
    }
    std::vector<int> get_int_list(const std::string& key) const {
        return value_as_int_list(key, at(key));
    }

  private:
    const ConfigValue& at(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(key + ": missing");
        return it->second;
    }

    std::map<std::string, ConfigValue> values_;
};

}  // namespace elink

#include "settings.hpp"

#include <cstdlib>
#include <filesystem>

#include "commands.hpp"
#include "pls/error.hpp"

namespace pls::cli {

namespace {

std::string absolute_path(const std::string& p, const std::string& base) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = std::filesystem::path(base) / path;
    return std::filesystem::absolute(path).lexically_normal().string();
}

std::string resolve(const KeySpec& key, const std::string& value, const std::string& base) {
    if (key.kind == KeyKind::path) return absolute_path(value, base);
    if (key.kind == KeyKind::spec) {
        auto [kind, arg] = split_spec(value);
        if ((kind == "discrete" || kind == "provided") && !arg.empty()) return kind + ":" + absolute_path(arg, base);
    }
    return value;
}

}  // namespace

bool Settings::has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

const std::string& Settings::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown setting '" + key + "'");
    return it->second;
}

double Settings::real(const std::string& key) const {
    const std::string& s = str(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
}

std::size_t Settings::count(const std::string& key) const {
    const std::string& s = str(key);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!s.empty() && s[0] != '-') v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(v);
}

bool Settings::flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::uint64_t Settings::seed() const { return count("seed"); }

std::vector<double> Settings::reals(const std::string& key) const {
    std::vector<double> out;
    const std::string& s = str(key);
    std::size_t start = 0;
    while (start < s.size()) {
        std::size_t end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        Settings one(std::map<std::string, std::string>{{key, s.substr(start, end - start)}});
        out.push_back(one.real(key));
        start = end + 1;
    }
    return out;
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, {}};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

bool is_known_key(const std::string& key) {
    for (const auto& c : commands()) {
        for (const auto& k : c.keys) {
            if (k.name == key) return true;
        }
    }
    return key == "config";
}

Settings resolve_settings(const std::vector<KeySpec>& keys, const std::map<std::string, std::string>& config,
                          const std::map<std::string, std::string>& flags, const std::string& config_dir) {
    for (const auto& [name, value] : config) {
        if (!is_known_key(name)) throw ConfigError("unknown config key '" + name + "'");
    }
    Settings s;
    for (const auto& key : keys) {
        std::string v = key.fallback;
        std::string base;
        if (auto it = config.find(key.name); it != config.end()) v = it->second, base = config_dir;
        if (auto it = flags.find(key.name); it != flags.end()) v = it->second, base.clear();
        if (key.name == "seed" && v.empty()) {
            const char* env = std::getenv("CVL_SEED");
            v = env && *env ? env : "0";
        }
        if (key.required && v.empty()) throw ConfigError("missing required setting '" + key.name + "'");
        s.set(key.name, resolve(key, v, base));
    }
    if (s.has("seed")) s.seed();  // validates
    return s;
}

}  // namespace pls::cli

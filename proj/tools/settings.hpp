#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pls::cli {

enum class KeyKind {
    value,
    path,  // resolved to an absolute path when recorded
    spec   // "kind:argument"; the argument of discrete: and provided: is a path
};

struct KeySpec {
    std::string name;
    std::string fallback;  // default value; empty means unset
    std::string help;
    KeyKind kind = KeyKind::value;
    bool required = false;
};

/// Flat key -> value configuration of one command. Every key of the command
/// is present after resolution, so the map doubles as the manifest record.
class Settings {
public:
    Settings() = default;
    explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const;
    const std::string& str(const std::string& key) const;
    double real(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::uint64_t seed() const;
    /// Comma-separated list of reals; empty string gives an empty list.
    std::vector<double> reals(const std::string& key) const;

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Splits "kind:argument"; a spec without ':' has an empty argument.
std::pair<std::string, std::string> split_spec(const std::string& spec);

/// Every key any command knows, so a shared config file can carry keys for
/// several commands.
bool is_known_key(const std::string& key);

/// Fills defaults, applies the config file layer and then the flag layer,
/// resolves the seed (flag, config, CVL_SEED, 0) and absolutizes paths.
/// Relative paths from the config layer are taken relative to `config_dir`,
/// the others relative to the working directory. Unknown config keys raise
/// ConfigError; keys of other commands are skipped.
Settings resolve_settings(const std::vector<KeySpec>& keys, const std::map<std::string, std::string>& config,
                          const std::map<std::string, std::string>& flags, const std::string& config_dir = {});

}  // namespace pls::cli

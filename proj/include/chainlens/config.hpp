#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace chainlens {

// Plain "key = value" file. '#' starts a comment; blank lines are ignored.
// Typed getters throw ConfigError on malformed values; take_* marks keys as
// consumed so unknown keys can be reported.
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    explicit KeyValueConfig(std::map<std::string, std::string> values) : values_(std::move(values)) {}

    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.contains(key); }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::optional<std::string> take_string(const std::string& key) const;
    std::optional<std::int64_t> take_int(const std::string& key) const;
    std::optional<std::uint64_t> take_uint(const std::string& key) const;
    std::optional<double> take_double(const std::string& key) const;

    // Throws ConfigError listing keys never taken.
    void reject_unused() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace chainlens

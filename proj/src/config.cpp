#include "chainlens/config.hpp"

#include <charconv>
#include <fstream>

#include "chainlens/error.hpp"
#include "text_util.hpp"

namespace chainlens {

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("expected key = value", line_no);
        auto key = detail::trim(view.substr(0, eq));
        auto value = detail::trim(view.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        values[std::string(key)] = std::string(value);
    }
    return KeyValueConfig(std::move(values));
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in);
}

std::optional<std::string> KeyValueConfig::take_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
    return value;
}

}  // namespace

std::optional<std::int64_t> KeyValueConfig::take_int(const std::string& key) const {
    auto s = take_string(key);
    if (!s) return std::nullopt;
    return parse_number<std::int64_t>(key, *s);
}

std::optional<std::uint64_t> KeyValueConfig::take_uint(const std::string& key) const {
    auto s = take_string(key);
    if (!s) return std::nullopt;
    return parse_number<std::uint64_t>(key, *s);
}

std::optional<double> KeyValueConfig::take_double(const std::string& key) const {
    auto s = take_string(key);
    if (!s) return std::nullopt;
    return parse_number<double>(key, *s);
}

void KeyValueConfig::reject_unused() const {
    std::string unknown;
    for (const auto& [key, _] : values_) {
        if (used_.contains(key)) continue;
        if (!unknown.empty()) unknown += ", ";
        unknown += key;
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace chainlens

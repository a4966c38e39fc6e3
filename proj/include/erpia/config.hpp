#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "erpia/model.hpp"

namespace erpia {

/// Flat INI-style document: `[section]` headers, `key = value` lines, `#` or
/// `;` comments. Keys may repeat (schedule stages). Keys are section-qualified
/// as "section.key".
class ConfigDocument {
public:
    struct Entry {
        std::string value;
        std::size_t line;
    };

    static ConfigDocument parse(std::istream& in);
    static ConfigDocument parse_string(const std::string& text);
    static ConfigDocument load(const std::string& path);

    [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) > 0; }
    [[nodiscard]] const std::vector<Entry>& all(const std::string& key) const;
    [[nodiscard]] const Entry* find(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] std::size_t get_size(const std::string& key, std::size_t fallback) const;
    [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::vector<double> get_doubles(const std::string& key,
                                                  std::vector<double> fallback) const;

    /// Keys that no reader asked for; reported as errors to catch typos.
    [[nodiscard]] std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

private:
    std::map<std::string, std::vector<Entry>> entries_;
};

/// Builds a RunConfig from sections [model], [payoff], [grid], [run] and
/// [schedule]. Missing keys take the defaults of RunConfig; errors carry the
/// offending line number.
[[nodiscard]] RunConfig run_config_from(const ConfigDocument& doc);
[[nodiscard]] RunConfig load_run_config(const std::string& path);

/// Keys understood by run_config_from.
[[nodiscard]] const std::vector<std::string>& run_config_keys();

} // namespace erpia

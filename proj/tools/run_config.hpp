#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace courtaudit::cli {

// Every pipeline parameter as resolved "section.key" -> text. Values come
// from built-in defaults, then the config file, then command-line flags,
// in that order; unknown keys are rejected at both override layers.
struct RunConfig {
    std::map<std::string, std::string> values;

    // one entry per parameter: {key, default value, description}
    struct Spec {
        std::string key;
        std::string fallback;
        std::string help;
    };
    static const std::vector<Spec>& specs();
    static const std::map<std::string, std::string>& defaults();

    static RunConfig resolve(const std::filesystem::path& config_file,
                             const std::map<std::string, std::string>& flag_overrides);

    bool has(const std::string& key) const;
    std::string text(const std::string& key) const;  // throws on unknown key
    int integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool flag(const std::string& key) const;  // true/false, 1/0, yes/no, on/off
    std::uint64_t seed(const std::string& key) const;
    std::vector<int> int_list(const std::string& key) const;      // comma separated
    std::vector<double> real_list(const std::string& key) const;  // comma separated

    // parameters of the given sections, e.g. {"train", "embed"}
    std::map<std::string, std::string> section(
        const std::vector<std::string>& prefixes) const;

    // canonical "[section]\nkey = value" text, sections and keys sorted
    std::string to_ini() const;
};

// "section.key = value" file parser; returns the flattened map and throws
// std::invalid_argument with the line number on malformed input.
std::map<std::string, std::string> parse_ini(const std::string& text);

}  // namespace courtaudit::cli

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace deconv {

// Flat key = value configuration. One pair per line, '#' starts a comment,
// blank lines are skipped, and a later assignment to the same key wins.
class ConfigMap {
public:
    static ConfigMap from_file(const std::string& path);
    static ConfigMap from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    // "key=value" as passed on a command line
    void apply_override(const std::string& spec);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::optional<double> maybe_double(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return map_; }

    // sorted "key = value" lines; the report hash is FNV-1a over this text,
    // so it changes exactly when some entry changes
    std::string canonical_text() const;
    std::uint64_t hash() const;

private:
    std::map<std::string, std::string> map_;
};

}  // namespace deconv

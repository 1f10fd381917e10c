#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace evlf {

/// Flat key-value configuration: "key = value" lines, '#' comments. The same
/// format backs config files and dataset manifests.
class KeyValueConfig {
  public:
    KeyValueConfig() = default;

    static KeyValueConfig load(const std::filesystem::path& path);
    static KeyValueConfig parse(std::istream& in);

    void save(const std::filesystem::path& path) const;

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, std::int64_t value);
    void set_u64(const std::string& key, std::uint64_t value);

    // Getters throw ConfigError on missing key (no-default forms) or on a
    // value that does not parse as the requested type.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::vector<std::string> keys() const;

    /// Overlays every entry of `other` on top of this config.
    void merge(const KeyValueConfig& other);

  private:
    std::map<std::string, std::string> entries_;
};

}  // namespace evlf

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iaei/errors.hpp"

namespace iaei {

// Line-oriented `key = value` configuration with [section] headers.
// '#' and ';' start comments; later keys override earlier ones.
class ConfigFile {
  public:
    static ConfigFile parse_string(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    int get_int(const std::string& section, const std::string& key,
                int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    std::vector<std::string> get_list(const std::string& section,
                                      const std::string& key) const;
    std::vector<double> get_double_list(const std::string& section,
                                        const std::string& key) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace iaei

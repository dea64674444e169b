#ifndef TSC_CONFIG_HPP_
#define TSC_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsc {

// Flat `key = value` configuration.
//
// Syntax: one assignment per line, `#` starts a comment, blank lines are
// ignored, keys are dotted paths (`plan.g_min`, `flow.N0`). A repeated key
// overrides the earlier value, which is how command-line flags layer on top
// of a file.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text,
                              std::string_view origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma- or whitespace-separated list of integers.
  std::vector<long long> get_int_list(const std::string& key,
                                      std::vector<long long> fallback) const;

  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace tsc

#endif  // TSC_CONFIG_HPP_

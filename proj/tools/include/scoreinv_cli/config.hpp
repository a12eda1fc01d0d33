#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scoreinv::cli {

/// Flat `section.key = value` run configuration with a fixed key set.
///
/// Every key has a default; unknown keys are rejected with the closest
/// known key as a suggestion. Seeds set to `auto` are derived from
/// run.seed when the configuration is resolved.
class RunConfig {
 public:
  struct KeyInfo {
    std::string name;
    std::string default_value;
    std::string help;
  };

  RunConfig();

  static const std::vector<KeyInfo>& known_keys();

  /// Parses `key = value` lines; `origin` names the source in error messages.
  void merge_text(std::string_view text, const std::string& origin);
  void merge_file(const std::filesystem::path& path);
  /// One `key=value` override.
  void set_override(std::string_view assignment);
  void set(const std::string& key, const std::string& value);

  /// Replaces `auto` seeds with values derived from run.seed and makes
  /// path entries absolute.
  void resolve();

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key) const;

  /// Sorted `key = value` lines; feeding them back reproduces the run.
  std::string resolved_text() const;
  void write_resolved(const std::filesystem::path& dir) const;

 private:
  std::map<std::string, std::string> values_;
};

inline constexpr const char* kResolvedConfigName = "config.resolved";

/// Levenshtein distance, used for key suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace scoreinv::cli

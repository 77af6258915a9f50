#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace towscan::cli {

/// Flat `key = value` settings. Lines starting with '#' are comments; values
/// may be wrapped in double quotes. Keys are unique.
class FlatConfig {
 public:
  static FlatConfig parse(const std::string& text, const std::string& origin = "config");
  static FlatConfig load(const std::filesystem::path& path);

  /// Later sources win; used to lay command-line flags over a file.
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) const;
  std::optional<long> integer(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<std::vector<double>> numbers(const std::string& key) const;

  /// Fails on any key outside `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace towscan::cli

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "towscan/error.hpp"
#include "towscan/serialize.hpp"

namespace towscan::cli {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) fail(ErrorCode::Config, key + ": cannot parse '" + text + "'");
  return value;
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text, const std::string& origin) {
  FlatConfig config;
  std::istringstream in(text);
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) fail(ErrorCode::Config, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorCode::Config, where + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (config.has(key)) fail(ErrorCode::Config, where + ": duplicate key '" + key + "'");
    config.values_[key] = value;
  }
  return config;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) { return parse(read_text_file(path), path.string()); }

std::optional<std::string> FlatConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<long> FlatConfig::integer(const std::string& key) const {
  const auto t = text(key);
  if (!t) return std::nullopt;
  return parse_value<long>(key, *t);
}

std::optional<double> FlatConfig::number(const std::string& key) const {
  const auto t = text(key);
  if (!t) return std::nullopt;
  return parse_value<double>(key, *t);
}

std::optional<std::vector<double>> FlatConfig::numbers(const std::string& key) const {
  const auto t = text(key);
  if (!t) return std::nullopt;
  std::vector<double> out;
  std::stringstream items(*t);
  std::string item;
  while (std::getline(items, item, ',')) out.push_back(parse_value<double>(key, trim(item)));
  if (out.empty()) fail(ErrorCode::Config, key + ": empty list");
  return out;
}

void FlatConfig::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(ErrorCode::Config, "unknown config key '" + key + "'");
    }
  }
}

}  // namespace towscan::cli

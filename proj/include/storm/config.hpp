#pragma once

#include <map>
#include <set>
#include <string>

#include "storm/common.hpp"

namespace storm {

/// Plain-text key=value configuration. '#' starts a comment; blank lines are
/// ignored. Every key present in the file must be consumed by a getter;
/// check_all_consumed() rejects unknown keys so typos never silently fall
/// back to defaults.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig load(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Throws DataError naming any keys never consumed.
  void check_all_consumed() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

}  // namespace storm

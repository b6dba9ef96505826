#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace artsim {

/// Ordered key=value text ('#' comments and blank lines allowed).
class KvFile {
 public:
  static KvFile parse(std::istream& in);
  static KvFile parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

}  // namespace artsim

#include "artsim/kv.hpp"

#include <fstream>
#include <stdexcept>

namespace artsim {

KvFile KvFile::parse(std::istream& in) {
  KvFile kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    auto strip = [](std::string s) {
      auto x = s.find_first_not_of(" \t");
      if (x == std::string::npos) return std::string();
      auto y = s.find_last_not_of(" \t");
      return s.substr(x, y - x + 1);
    };
    kv.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return kv;
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  return parse(f);
}

void KvFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items_)
    if (k == key) {
      v = value;
      return;
    }
  items_.emplace_back(key, value);
}

bool KvFile::has(const std::string& key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return true;
  return false;
}

const std::string& KvFile::get(const std::string& key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return v;
  throw std::runtime_error("missing config key '" + key + "'");
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

void KvFile::write(std::ostream& out) const {
  for (const auto& [k, v] : items_) out << k << '=' << v << '\n';
  if (!out) throw std::runtime_error("config write failed");
}

void KvFile::write_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(f);
}

}  // namespace artsim

#include "diffnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "diffnet/signals.hpp"

namespace diffnet {

namespace {
std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: bad section header at line " +
                                 std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " +
                               std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key at line " +
                               std::to_string(line_no));
    if (!section.empty() && key.find('.') == std::string::npos)
      key = section + "." + key;
    cfg.kv_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end())
    throw std::runtime_error("config: missing key " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config: key " + key + " is not a number: " + v);
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double x = get_double(key);
  const long v = static_cast<long>(x);
  if (static_cast<double>(v) != x)
    throw std::runtime_error("config: key " + key + " must be an integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: key " + key + " is not a boolean");
}

std::uint64_t Config::get_seed(const std::string& key,
                               std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return static_cast<std::uint64_t>(std::stoull(get_string(key)));
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string v = get_string(key);
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty())
    throw std::runtime_error("config: key " + key + " has no values");
  return out;
}

std::vector<double> Config::get_profile(const std::string& key, int count,
                                        double fallback, std::uint64_t seed,
                                        std::uint64_t tag) const {
  if (!has(key))
    return std::vector<double>(static_cast<std::size_t>(count), fallback);
  const std::string v = get_string(key);
  if (v.rfind("uniform(", 0) == 0 && v.back() == ')') {
    const std::string args = v.substr(8, v.size() - 9);
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("config: " + key + ": uniform(lo,hi) expected");
    const double lo = std::stod(trim(args.substr(0, comma)));
    const double hi = std::stod(trim(args.substr(comma + 1)));
    return uniform_profile(count, lo, hi, seed, tag);
  }
  std::vector<double> values = get_list(key);
  if (values.size() == 1)
    return std::vector<double>(static_cast<std::size_t>(count), values[0]);
  if (static_cast<int>(values.size()) != count)
    throw std::runtime_error("config: " + key + " must have " +
                             std::to_string(count) + " entries");
  return values;
}

}  // namespace diffnet

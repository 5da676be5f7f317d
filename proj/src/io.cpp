#include "flagsim/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flagsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for '" + key +
                                "': " + s);
  }
}

}  // namespace

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& def) const {
  const auto it = kv.find(key);
  return it == kv.end() ? def : it->second;
}

long ExperimentConfig::get_long(const std::string& key, long def) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return def;
  const double v = parse_double(key, it->second);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v)
    throw std::invalid_argument("config: '" + key + "' must be an integer");
  return l;
}

double ExperimentConfig::get_double(const std::string& key, double def) const {
  const auto it = kv.find(key);
  return it == kv.end() ? def : parse_double(key, it->second);
}

std::uint64_t ExperimentConfig::get_seed(std::uint64_t def) const {
  const auto it = kv.find("seed");
  if (it == kv.end()) return def;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad seed: " + it->second);
  }
}

Eigen::VectorXd ExperimentConfig::get_vector(const std::string& key,
                                             const Eigen::VectorXd& def) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return def;
  const auto parts = split(it->second, ',');
  Eigen::VectorXd v(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    v(i) = parse_double(key, parts[i]);
  return v;
}

std::vector<Eigen::VectorXd> ExperimentConfig::get_grid(
    const std::string& key, int n, const std::string& def) const {
  return parse_grid(get_string(key, def), n);
}

std::string ExperimentConfig::out_dir() const {
  std::string dir = get_string("out", "");
  if (dir.empty()) {
    const char* env = std::getenv("FLAGSIM_OUT");
    dir = (env != nullptr && env[0] != '\0') ? env : ".";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key on line " +
                               std::to_string(lineno));
    kv[key] = value;
  }
  return kv;
}

std::vector<Eigen::VectorXd> parse_grid(const std::string& spec, int n) {
  std::vector<Eigen::VectorXd> grid;
  if (spec.rfind("pm:", 0) == 0) {
    const auto parts = split(spec.substr(3), ',');
    std::vector<double> levels;
    for (const auto& p : parts) {
      const double v = parse_double("u_grid", p);
      if (v <= 0.0)
        throw std::invalid_argument("u_grid: pm values must be positive");
      levels.push_back(v);
      levels.push_back(-v);
    }
    // full product: every coordinate ranges over all signed levels
    const std::size_t m = levels.size();
    std::vector<std::size_t> odo(n, 0);
    while (true) {
      Eigen::VectorXd u(n);
      for (int j = 0; j < n; ++j) u(j) = levels[odo[j]];
      grid.push_back(u);
      int j = 0;
      while (j < n && ++odo[j] == m) odo[j++] = 0;
      if (j == n) break;
    }
    return grid;
  }
  for (const auto& vec : split(spec, ';')) {
    if (vec.empty()) continue;
    const auto parts = split(vec, ',');
    if (static_cast<int>(parts.size()) != n)
      throw std::invalid_argument("u_grid: vector '" + vec + "' is not length " +
                                  std::to_string(n));
    Eigen::VectorXd u(n);
    for (int j = 0; j < n; ++j) u(j) = parse_double("u_grid", parts[j]);
    grid.push_back(u);
  }
  if (grid.empty()) throw std::invalid_argument("u_grid: empty grid spec");
  return grid;
}

void write_report(const std::string& path,
                  const std::vector<TestVerdict>& verdicts) {
  std::ofstream out(path, std::ios::binary);  // binary: LF on every platform
  if (!out) throw std::runtime_error("cannot write report: " + path);
  for (const auto& v : verdicts) out << v.line() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_plot_data(const std::string& path,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write data file: " + path);
  out << "#";
  for (const auto& c : columns) out << " " << c;
  out << "\n";
  char buf[32];
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("emit_plot_data: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      if (i > 0) out << " ";
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

PlotData read_plot_data(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  PlotData data;
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw std::runtime_error("data file missing '#' header: " + path);
  data.columns = split(line.substr(1), ' ');
  data.columns.erase(
      std::remove(data.columns.begin(), data.columns.end(), std::string()),
      data.columns.end());
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) row.push_back(parse_double("data", tok));
    if (row.size() != data.columns.size())
      throw std::runtime_error("data row width mismatch in " + path);
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace flagsim

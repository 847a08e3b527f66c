#pragma once

// Run configuration: flat key = value text, one experiment per file. Command
// line flags use the same keys and are applied after the file, so they win.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ensembles.hpp"
#include "errors.hpp"

namespace htrm {

struct RunConfig {
  std::string experiment;
  EnsembleSpec ensemble;
  std::uint64_t trials = 10000;
  std::uint64_t master_seed = 20211;
  int workers = 0;  // 0: one per hardware thread
  std::string output_dir = "out";
  bool cache = true;
  std::string cache_dir;  // empty: <output_dir>/cache

  // bin widths per spectral variable
  double bin_macro = 0.1;
  double bin_micro = 0.2;
  double bin_spacing = 0.1;
  double bin_unfolded = 0.02;

  double macro_lo = 0.25;
  double macro_hi = 6.0;
  double min_expected_macro = 500.0;
  double min_expected_tail = 300.0;
  int edge_count = 5;      // smallest eigenvalues used at the soft edge
  int tail_count = 8;      // largest eigenvalues used in the tail
  int spacing_count = 3;   // spacings counted from the largest eigenvalue
  int probe_window = 16;   // tail eigenvalues used by the Poisson probe
  int scan_window = 8;     // eigenvalues per base point in the transition scan

  std::vector<int> l_list = {1, 2, 3, 4};
  std::vector<int> m_list = {1, 2};
  std::vector<int> n_list = {50, 100, 200, 500};
  std::vector<int> k_list = {1, 2, 5};
  std::vector<double> alpha_list = {0.5, 1.0, 1.5, 1.8};
  std::vector<double> gamma_list;  // empty: 11 points on [1 - M - 0.5, 1]

  int y_points = 10;
  double min_im_z = 0.1;

  // reference curves
  std::string density;
  double grid_lo = 0.0;
  double grid_hi = 5.0;
  int grid_points = 501;
  double cauchy_c = 0.0;  // 0: matched to the averaged semicircle at the origin

  std::string resolved_cache_dir() const { return cache_dir.empty() ? output_dir + "/cache" : cache_dir; }

  void set(const std::string& key, const std::string& value);
  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !(in >> std::ws).eof()) throw InvalidConfig("config: bad value '" + value + "' for " + key);
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<T>(key, item));
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw InvalidConfig("config: bad boolean '" + value + "' for " + key);
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  using detail::parse_list;
  using detail::parse_number;
  if (key == "experiment") experiment = value;
  else if (key == "kind") ensemble.kind = parse_ensemble_kind(value);
  else if (key == "n") ensemble.n = parse_number<int>(key, value);
  else if (key == "m") ensemble.m = parse_number<int>(key, value);
  else if (key == "l") ensemble.l = parse_number<int>(key, value);
  else if (key == "alpha") ensemble.alpha = parse_number<double>(key, value);
  else if (key == "sigma") ensemble.sigma = parse_number<double>(key, value);
  else if (key == "trials") trials = parse_number<std::uint64_t>(key, value);
  else if (key == "seed") master_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "workers") workers = parse_number<int>(key, value);
  else if (key == "out") output_dir = value;
  else if (key == "cache") cache = detail::parse_bool(key, value);
  else if (key == "cache_dir") cache_dir = value;
  else if (key == "bin_macro") bin_macro = parse_number<double>(key, value);
  else if (key == "bin_micro") bin_micro = parse_number<double>(key, value);
  else if (key == "bin_spacing") bin_spacing = parse_number<double>(key, value);
  else if (key == "bin_unfolded") bin_unfolded = parse_number<double>(key, value);
  else if (key == "macro_lo") macro_lo = parse_number<double>(key, value);
  else if (key == "macro_hi") macro_hi = parse_number<double>(key, value);
  else if (key == "min_expected_macro") min_expected_macro = parse_number<double>(key, value);
  else if (key == "min_expected_tail") min_expected_tail = parse_number<double>(key, value);
  else if (key == "edge_count") edge_count = parse_number<int>(key, value);
  else if (key == "tail_count") tail_count = parse_number<int>(key, value);
  else if (key == "spacing_count") spacing_count = parse_number<int>(key, value);
  else if (key == "probe_window") probe_window = parse_number<int>(key, value);
  else if (key == "scan_window") scan_window = parse_number<int>(key, value);
  else if (key == "l_list") l_list = parse_list<int>(key, value);
  else if (key == "m_list") m_list = parse_list<int>(key, value);
  else if (key == "n_list") n_list = parse_list<int>(key, value);
  else if (key == "k_list") k_list = parse_list<int>(key, value);
  else if (key == "alpha_list") alpha_list = parse_list<double>(key, value);
  else if (key == "gamma_list") gamma_list = parse_list<double>(key, value);
  else if (key == "y_points") y_points = parse_number<int>(key, value);
  else if (key == "min_im_z") min_im_z = parse_number<double>(key, value);
  else if (key == "density") density = value;
  else if (key == "grid_lo") grid_lo = parse_number<double>(key, value);
  else if (key == "grid_hi") grid_hi = parse_number<double>(key, value);
  else if (key == "grid_points") grid_points = parse_number<int>(key, value);
  else if (key == "cauchy_c") cauchy_c = parse_number<double>(key, value);
  else throw InvalidConfig("config: unknown key '" + key + "'");
}

inline void RunConfig::validate() const {
  ensemble.validate();
  if (trials < 1) throw InvalidConfig("config: trials must be >= 1");
  if (workers < 0) throw InvalidConfig("config: workers must be >= 0");
  for (double w : {bin_macro, bin_micro, bin_spacing, bin_unfolded}) {
    if (!(w > 0.0)) throw InvalidConfig("config: bin widths must be > 0");
  }
  if (!(macro_hi > macro_lo)) throw InvalidConfig("config: macro_hi must exceed macro_lo");
  if (edge_count < 1 || tail_count < 1 || spacing_count < 1 || probe_window < 2 || scan_window < 2) {
    throw InvalidConfig("config: window sizes must be positive");
  }
  for (int l : l_list) {
    if (l < 1) throw InvalidConfig("config: l_list entries must be >= 1");
  }
  for (int m : m_list) {
    if (m < 1 || m > 4) throw InvalidConfig("config: m_list entries must be in 1..4");
  }
  for (int n : n_list) {
    if (n < 1) throw InvalidConfig("config: n_list entries must be >= 1");
  }
  for (int k : k_list) {
    if (k < 1) throw InvalidConfig("config: k_list entries must be >= 1");
  }
  for (double a : alpha_list) {
    if (!(a > 0.0 && a < 2.0)) throw InvalidConfig("config: alpha_list entries must be in (0, 2)");
  }
  if (y_points < 1 || !(min_im_z > 0.0)) throw InvalidConfig("config: y_points >= 1 and min_im_z > 0");
  if (grid_points < 2 || !(grid_hi > grid_lo)) throw InvalidConfig("config: reference grid needs 2+ points on lo < hi");
}

/// Applies a key = value file; '#' starts a comment.
inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("config: cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

}  // namespace htrm

#pragma once

// CSV tables and JSON summaries. Numbers are printed with a fixed format so
// identical results give identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace htrm {

using Json = nlohmann::ordered_json;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

/// Column layout for histogram tables; bins are labelled by their left edge.
inline CsvTable density_table(const std::string& name) {
  return {name,
          {"series", "variable_tag", "normalization", "bin_left", "bin_width", "count", "normalized_height",
           "analytic_value"},
          {}};
}

inline CsvTable spacing_table(const std::string& name) {
  return {name, {"series", "k", "s_bin_left", "bin_width", "normalized_height", "poisson_ref", "wigner_ref"}, {}};
}

struct ExperimentResult {
  Json summary;
  std::vector<CsvTable> tables;
};

/// Writes <dir>/<table>.csv for every table and <dir>/<stem>.json.
inline std::vector<std::filesystem::path> write_result(const std::filesystem::path& dir, const std::string& stem,
                                                       const ExperimentResult& r) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : r.tables) {
    const auto path = dir / (t.name + ".csv");
    std::ofstream(path, std::ios::binary) << t.str();
    written.push_back(path);
  }
  const auto path = dir / (stem + ".json");
  std::ofstream(path, std::ios::binary) << r.summary.dump(2) << '\n';
  written.push_back(path);
  return written;
}

}  // namespace htrm

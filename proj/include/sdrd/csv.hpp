#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sdrd/errors.hpp"
#include "sdrd/estimates.hpp"
#include "sdrd/solver.hpp"

namespace sdrd {

// Trajectory CSV: header `t, tau, l2, lq, h1, v2, linf`, optionally followed
// by one modal column per mode. UTF-8, '.' decimal separator, 17 significant
// digits so every double round-trips exactly.

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const NormSeries& series,
                                 const Trajectory* traj = nullptr, bool dump_modes = false) {
  os << "t, tau, l2, lq, h1, v2, linf";
  if (dump_modes && traj != nullptr)
    for (int j = 1; j <= traj->modes && j <= static_cast<int>(traj->states.front().size()); ++j)
      os << ", a" << j;
  os << "\n";
  const std::vector<double>& lq = series.lq.at(series.primary_q);
  for (std::size_t i = 0; i < series.rows(); ++i) {
    os << detail::fmt17(series.times[i]) << ", " << detail::fmt17(series.taus[i]) << ", "
       << detail::fmt17(series.l2[i]) << ", " << detail::fmt17(lq[i]) << ", "
       << detail::fmt17(series.v1[i]) << ", " << detail::fmt17(series.v2[i]) << ", "
       << detail::fmt17(series.linf[i]);
    if (dump_modes && traj != nullptr)
      for (Eigen::Index j = 0; j < traj->states[i].size(); ++j)
        os << ", " << detail::fmt17(traj->states[i][j]);
    os << "\n";
  }
}

inline void write_trajectory_csv(const std::string& path, const NormSeries& series,
                                 const Trajectory* traj = nullptr, bool dump_modes = false) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory_csv(os, series, traj, dump_modes);
  if (!os) throw std::runtime_error("write failed for " + path);
}

// Reads the norm columns back; modal columns, if present, are ignored.
// The requested exponent is not stored in the file and must be supplied.
inline NormSeries read_norm_series_csv(std::istream& is, double q) {
  NormSeries s;
  s.primary_q = q;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
  s.lq[q] = {};
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(std::strtod(cell.c_str(), nullptr));
    if (fields.size() < 7) throw std::runtime_error("malformed CSV row: " + line);
    s.times.push_back(fields[0]);
    s.taus.push_back(fields[1]);
    s.l2.push_back(fields[2]);
    s.lq[q].push_back(fields[3]);
    s.v1.push_back(fields[4]);
    s.v2.push_back(fields[5]);
    s.linf.push_back(fields[6]);
  }
  if (s.times.empty()) throw std::runtime_error("CSV contains no samples");
  s.first_step_row = 0;
  while (s.first_step_row + 1 < s.rows() && s.times[s.first_step_row] < 0.0)
    ++s.first_step_row;
  return s;
}

inline NormSeries read_norm_series_csv(const std::string& path, double q) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_norm_series_csv(is, q);
}

}  // namespace sdrd

#pragma once

// Small helpers for the CSV outputs. //

#include "dyncopy/integrate.hpp"

#include <filesystem>
#include <string>

namespace dyncopy {

/// Shortest round-trippable decimal form ("%.17g").
std::string fmt_real(double v);

/// Trajectory CSV: header `t,x0,...,x{d-1}`, 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const trajectory& traj);

/// Read back a trajectory CSV written by write_trajectory_csv.
trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Series as `t,x0` rows.
void write_series_csv(const std::filesystem::path& path, const series& s);

}  // namespace dyncopy

#pragma once

// Input formats: IDX image/label files, light-curve CSV, pattern text files. //

#include "dyncopy/blackbox.hpp"
#include "dyncopy/integrate.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dyncopy {

/// Raw IDX content: unsigned bytes as stored.
///
/// Image file: magic 0x00000803, count, rows, cols (big-endian uint32), then
/// count*rows*cols pixel bytes. Label file: magic 0x00000801, count, then
/// count label bytes.
struct idx_data {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels;
    std::vector<std::uint8_t> labels;

    std::size_t count() const { return labels.size(); }
};

idx_data read_idx_raw(const std::filesystem::path& images, const std::filesystem::path& labels);
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const idx_data& data);

/// Pixels rescaled from [0, 255] to [-1, 1] (plus_minus) or [0, 1] (zero_one).
labeled_patterns to_patterns(const idx_data& data, probe_encoding encoding);

/// read_idx_raw followed by to_patterns.
labeled_patterns read_idx(const std::filesystem::path& images,
                          const std::filesystem::path& labels,
                          probe_encoding encoding = probe_encoding::plus_minus);

/// Pattern text file: one pattern per line, whitespace-separated +-1 integers
/// followed by the integer label; `#` lines are comments.
labeled_patterns read_pattern_file(const std::filesystem::path& path);
void write_pattern_file(const std::filesystem::path& path, const labeled_patterns& patterns);

struct light_curve {
    std::vector<double> times;       ///< days, non-decreasing
    std::vector<double> magnitudes;

    std::size_t size() const { return times.size(); }
};

/// CSV `time_days,magnitude`; `#` comments and a literal header line are skipped.
/// Unsorted times or unparseable rows raise format_error naming the line.
light_curve read_lightcurve(const std::filesystem::path& path);
void write_lightcurve(const std::filesystem::path& path, const light_curve& curve);

/// Mean magnitude per consecutive `bin_days` window starting at the first time;
/// empty bins are filled by linear interpolation between the nearest non-empty ones.
series smooth_bin(const light_curve& curve, double bin_days);

}  // namespace dyncopy

#include "dyncopy/ingest.hpp"

#include "dyncopy/csv.hpp"
#include "dyncopy/error.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace dyncopy {

namespace {

constexpr std::uint32_t idx_image_magic = 0x00000803;
constexpr std::uint32_t idx_label_magic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& file, const char* field)
{
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4))
        throw format_error{file + ": truncated while reading " + field};
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v)
{
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

std::vector<std::uint8_t> read_payload(std::istream& in, std::size_t count, const std::string& file)
{
    std::vector<std::uint8_t> bytes(count);
    if (count > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count)))
        throw format_error{file + ": truncated payload (expected " + std::to_string(count) + " bytes)"};
    return bytes;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

idx_data read_idx_raw(const std::filesystem::path& images, const std::filesystem::path& labels)
{
    std::ifstream img{images, std::ios::binary};
    if (!img) throw format_error{"cannot open " + images.string()};
    std::ifstream lab{labels, std::ios::binary};
    if (!lab) throw format_error{"cannot open " + labels.string()};
    const std::string img_name = images.string();
    const std::string lab_name = labels.string();

    if (read_be32(img, img_name, "magic") != idx_image_magic)
        throw format_error{img_name + ": bad magic (expected 0x00000803)"};
    const std::uint32_t count = read_be32(img, img_name, "image count");
    idx_data data;
    data.rows = read_be32(img, img_name, "rows");
    data.cols = read_be32(img, img_name, "cols");

    if (read_be32(lab, lab_name, "magic") != idx_label_magic)
        throw format_error{lab_name + ": bad magic (expected 0x00000801)"};
    const std::uint32_t label_count = read_be32(lab, lab_name, "label count");
    if (label_count != count)
        throw format_error{"image count " + std::to_string(count) + " does not match label count "
                           + std::to_string(label_count)};

    data.pixels = read_payload(img, std::size_t{count} * data.rows * data.cols, img_name);
    data.labels = read_payload(lab, count, lab_name);
    return data;
}

void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const idx_data& data)
{
    if (data.pixels.size() != data.count() * data.rows * data.cols) throw shape_error{"write_idx: pixel count mismatch"};
    std::ofstream img{images, std::ios::binary};
    std::ofstream lab{labels, std::ios::binary};
    if (!img || !lab) throw error{"write_idx: cannot open output files"};
    write_be32(img, idx_image_magic);
    write_be32(img, static_cast<std::uint32_t>(data.count()));
    write_be32(img, data.rows);
    write_be32(img, data.cols);
    img.write(reinterpret_cast<const char*>(data.pixels.data()), static_cast<std::streamsize>(data.pixels.size()));
    write_be32(lab, idx_label_magic);
    write_be32(lab, static_cast<std::uint32_t>(data.count()));
    lab.write(reinterpret_cast<const char*>(data.labels.data()), static_cast<std::streamsize>(data.labels.size()));
}

labeled_patterns to_patterns(const idx_data& data, probe_encoding encoding)
{
    labeled_patterns out;
    out.width = std::size_t{data.rows} * data.cols;
    out.pixels.reserve(data.pixels.size());
    for (std::uint8_t p : data.pixels) {
        const double unit = static_cast<double>(p) / 255.0;
        out.pixels.push_back(encoding == probe_encoding::plus_minus ? 2.0 * unit - 1.0 : unit);
    }
    out.labels.assign(data.labels.begin(), data.labels.end());
    return out;
}

labeled_patterns read_idx(const std::filesystem::path& images, const std::filesystem::path& labels, probe_encoding encoding)
{
    return to_patterns(read_idx_raw(images, labels), encoding);
}

labeled_patterns read_pattern_file(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in) throw format_error{"cannot open " + path.string()};
    labeled_patterns out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row{line};
        std::vector<int> ints;
        int v = 0;
        while (row >> v) ints.push_back(v);
        if (!row.eof() || ints.size() < 2)
            throw format_error{path.string() + ":" + std::to_string(lineno) + ": malformed pattern line"};
        const std::size_t width = ints.size() - 1;
        if (out.width == 0) out.width = width;
        if (width != out.width)
            throw format_error{path.string() + ":" + std::to_string(lineno) + ": pattern width "
                               + std::to_string(width) + " differs from " + std::to_string(out.width)};
        for (std::size_t i = 0; i < width; ++i) {
            if (ints[i] != 1 && ints[i] != -1)
                throw format_error{path.string() + ":" + std::to_string(lineno) + ": pixel values must be +-1"};
            out.pixels.push_back(ints[i]);
        }
        out.labels.push_back(ints.back());
    }
    if (out.size() == 0) throw format_error{path.string() + ": no patterns"};
    return out;
}

void write_pattern_file(const std::filesystem::path& path, const labeled_patterns& patterns)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        for (double v : patterns.pattern(i)) out << (v > 0 ? "1 " : "-1 ");
        out << patterns.labels[i] << '\n';
    }
}

light_curve read_lightcurve(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in) throw format_error{"cannot open " + path.string()};
    light_curve curve;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (curve.size() == 0 && line == "time_days,magnitude") continue;
        const auto comma = line.find(',');
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw format_error{where + ": expected two comma-separated columns"};
        double t = 0.0, mag = 0.0;
        try {
            std::size_t used = 0;
            const std::string a = trim(line.substr(0, comma));
            const std::string b = trim(line.substr(comma + 1));
            t = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument{"time"};
            mag = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument{"magnitude"};
        }
        catch (const std::exception&) {
            throw format_error{where + ": unparseable row '" + line + "'"};
        }
        if (!std::isfinite(t) || !std::isfinite(mag)) throw format_error{where + ": non-finite value"};
        if (curve.size() > 0 && t < curve.times.back()) throw format_error{where + ": times are not sorted"};
        curve.times.push_back(t);
        curve.magnitudes.push_back(mag);
    }
    return curve;
}

void write_lightcurve(const std::filesystem::path& path, const light_curve& curve)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << "time_days,magnitude\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out << fmt_real(curve.times[i]) << ',' << fmt_real(curve.magnitudes[i]) << '\n';
}

series smooth_bin(const light_curve& curve, double bin_days)
{
    if (!(bin_days > 0.0)) throw domain_error{"smooth_bin: bin width must be positive"};
    if (curve.size() == 0) throw shape_error{"smooth_bin: empty light curve"};
    const double start = curve.times.front();
    const auto bins = static_cast<std::size_t>(std::floor((curve.times.back() - start) / bin_days)) + 1;
    std::vector<double> sum(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        auto b = static_cast<std::size_t>(std::floor((curve.times[i] - start) / bin_days));
        b = std::min(b, bins - 1);
        sum[b] += curve.magnitudes[i];
        ++count[b];
    }
    series s{start, bin_days, std::vector<double>(bins)};
    std::size_t prev = 0;  // last non-empty bin; bin 0 always holds the first point
    for (std::size_t b = 0; b < bins; ++b) {
        if (count[b] == 0) continue;
        s.values[b] = sum[b] / static_cast<double>(count[b]);
        for (std::size_t e = prev + 1; e < b; ++e) {
            const double frac = static_cast<double>(e - prev) / static_cast<double>(b - prev);
            s.values[e] = (1.0 - frac) * s.values[prev] + frac * s.values[b];
        }
        prev = b;
    }
    return s;
}

}  // namespace dyncopy

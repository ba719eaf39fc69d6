#include "dyncopy/csv.hpp"

#include "dyncopy/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dyncopy {

std::string fmt_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::filesystem::path& path, const trajectory& traj)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << 't';
    for (std::size_t c = 0; c < traj.dim; ++c) out << ",x" << c;
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << fmt_real(traj.times[i]);
        for (std::size_t c = 0; c < traj.dim; ++c) out << ',' << fmt_real(traj.at(i, c));
        out << '\n';
    }
}

trajectory read_trajectory_csv(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in) throw error{"cannot open " + path.string()};
    std::string line;
    if (!std::getline(in, line) || line.rfind("t", 0) != 0) throw format_error{path.string() + ": missing header"};
    std::size_t dim = 0;
    for (char c : line) dim += c == ',';
    trajectory traj{dim};
    std::vector<double> x(dim);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream row{line};
        std::string cell;
        double t = 0.0;
        for (std::size_t c = 0; c <= dim; ++c) {
            if (!std::getline(row, cell, ',')) throw format_error{path.string() + ":" + std::to_string(lineno) + ": short row"};
            double v = std::stod(cell);
            if (c == 0) t = v;
            else x[c - 1] = v;
        }
        traj.push(t, x);
    }
    return traj;
}

void write_series_csv(const std::filesystem::path& path, const series& s)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << "t,x0\n";
    for (std::size_t i = 0; i < s.size(); ++i) out << fmt_real(s.time(i)) << ',' << fmt_real(s.values[i]) << '\n';
}

}  // namespace dyncopy

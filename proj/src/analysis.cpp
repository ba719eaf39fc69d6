#include "dyncopy/analysis.hpp"

#include "dyncopy/csv.hpp"
#include "dyncopy/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace dyncopy {

namespace {

/// Linear interpolation of one coordinate at time t (t inside the trajectory span).
double interpolate(const trajectory& traj, std::size_t coord, double t)
{
    const double t0 = traj.times.front();
    const double h = traj.times[1] - traj.times[0];
    const double pos = (t - t0) / h;
    const double last = static_cast<double>(traj.size() - 1);
    if (pos < -1e-9 || pos > last + 1e-9) throw history_error{"trajectory lookup outside its span"};
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9) return traj.at(static_cast<std::size_t>(nearest), coord);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * traj.at(i, coord) + frac * traj.at(i + 1, coord);
}

}  // namespace

std::vector<section_point> poincare_section(
  const trajectory& traj, std::size_t coord, double level, double lag, crossing direction)
{
    std::vector<section_point> points;
    if (traj.size() < 2) return points;
    if (coord >= traj.dim) throw shape_error{"poincare_section: coordinate out of range"};
    const double t_first = traj.times.front();
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double a = traj.at(i, coord);
        const double b = traj.at(i + 1, coord);
        const bool up = a <= level && level < b;
        const bool down = a >= level && level > b;
        const bool hit = direction == crossing::up ? up : direction == crossing::down ? down : (up || down);
        if (!hit) continue;
        const double frac = (level - a) / (b - a);
        const double t_c = traj.times[i] + frac * (traj.times[i + 1] - traj.times[i]);
        if (t_c - lag < t_first - 1e-12) continue;
        points.push_back({t_c, interpolate(traj, coord, std::max(t_c - lag, t_first))});
    }
    return points;
}

std::vector<double> section_values(const std::vector<section_point>& points)
{
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.value);
    return v;
}

std::string period_class::label() const
{
    switch (kind) {
    case periodic: return "period-" + std::to_string(period);
    case quasiperiodic: return "quasiperiodic";
    case chaotic: return "chaotic";
    case diverged: return "diverged";
    case insufficient: return "insufficient";
    }
    return "?";
}

double default_period_tolerance(std::span<const double> values)
{
    if (values.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double scale = std::max({std::abs(*lo), std::abs(*hi), 1.0});
    return std::max(0.05 * (*hi - *lo), 1e-6 * scale);
}

namespace {

/// Quasiperiodic heuristic: even filling of the value range, and no growth of
/// separation between nearby points of the (v[i], v[i+1]) embedding.
bool looks_quasiperiodic(std::span<const double> v)
{
    const std::size_t n = v.size();
    constexpr std::size_t ahead = 5;
    if (n < 4 * ahead) return false;
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    const double range = sorted.back() - sorted.front();
    if (!(range > 0.0)) return false;
    double max_gap = 0.0;
    for (std::size_t i = 1; i < n; ++i) max_gap = std::max(max_gap, sorted[i] - sorted[i - 1]);
    const double mean_gap = range / static_cast<double>(n - 1);
    if (max_gap > 4.0 * mean_gap) return false;

    const std::size_t usable = n - ahead - 1;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < usable; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = i;
        for (std::size_t j = 0; j < usable; ++j) {
            if (j + 1 >= i && j <= i + 1) continue;
            const double d = std::hypot(v[i] - v[j], v[i + 1] - v[j + 1]);
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j == i || !(best > 0.0)) continue;
        const double later = std::hypot(v[i + ahead] - v[best_j + ahead], v[i + ahead + 1] - v[best_j + ahead + 1]);
        ratios.push_back(later / best);
    }
    if (ratios.empty()) return false;
    std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
    return ratios[ratios.size() / 2] < 3.0;
}

}  // namespace

period_class detect_period(std::span<const double> values, const period_options& opts)
{
    if (values.size() < opts.k_max * opts.min_cycles) return {period_class::insufficient, 0};
    for (std::size_t k = 1; k <= opts.k_max; ++k) {
        bool repeats = true;
        for (std::size_t i = 0; i + k < values.size() && repeats; ++i)
            repeats = std::abs(values[i + k] - values[i]) <= opts.tol;
        if (repeats) return {period_class::periodic, static_cast<int>(k)};
    }
    if (looks_quasiperiodic(values)) return {period_class::quasiperiodic, 0};
    return {period_class::chaotic, 0};
}

period_class classify_section(std::span<const double> values, const section_spec& spec)
{
    double tol = spec.tol_floor;
    if (!values.empty()) {
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        tol = std::max(spec.tol_fraction * (*hi - *lo), spec.tol_floor);
    }
    return detect_period(values, {tol, spec.min_cycles, spec.k_max});
}

std::vector<bifurcation_row> bifurcation_over_training(const train_trace& trace,
                                                       const machine_spec& spec,
                                                       const initial_condition& init,
                                                       const evolve_settings& settings,
                                                       const section_spec& section,
                                                       double transient_fraction,
                                                       const unit_mapper& to_physical)
{
    std::vector<bifurcation_row> rows;
    for (auto& replay : replay_snapshots(trace, spec, init, settings, transient_fraction)) {
        bifurcation_row row{static_cast<double>(replay.step), {}, {period_class::diverged, 0}};
        if (!replay.diverged) {
            const trajectory traj = to_physical ? to_physical(replay.traj) : replay.traj;
            row.values = section_values(poincare_section(traj, section.coord, section.level, section.lag, section.direction));
            row.cls = classify_section(row.values, section);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<bifurcation_row> bifurcation_sweep(const lorenz_params& base,
                                               lorenz_axis axis,
                                               std::span<const double> values,
                                               const section_spec& section,
                                               const sweep_settings& settings)
{
    std::vector<bifurcation_row> rows;
    for (double value : values) {
        lorenz_params p = base;
        (axis == lorenz_axis::sigma ? p.sigma : axis == lorenz_axis::r ? p.r : p.b) = value;
        bifurcation_row row{value, {}, {period_class::diverged, 0}};
        try {
            auto traj = drop_transient(integrate_ode(lorenz_field(p), settings.x0, 0.0, settings.duration, settings.step),
                                       settings.transient_fraction);
            row.values = section_values(poincare_section(traj, section.coord, section.level, section.lag, section.direction));
            row.cls = classify_section(row.values, section);
        }
        catch (const divergence_error&) {
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_bifurcation_csv(const std::filesystem::path& path, const std::vector<bifurcation_row>& rows)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << "key,value\n";
    for (const auto& row : rows)
        for (double v : row.values) out << fmt_real(row.key) << ',' << fmt_real(v) << '\n';
}

void write_bifurcation_classes(const std::filesystem::path& path, const std::vector<bifurcation_row>& rows)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << "key,class,points\n";
    for (const auto& row : rows) out << fmt_real(row.key) << ',' << row.cls.label() << ',' << row.values.size() << '\n';
}

void write_section_csv(const std::filesystem::path& path, const std::vector<section_point>& points)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << "t_c,delayed_value\n";
    for (const auto& p : points) out << fmt_real(p.t_c) << ',' << fmt_real(p.value) << '\n';
}

double prediction_horizon(const trajectory& a, const trajectory& b, double eps, std::size_t coord)
{
    const std::size_t n = std::min(a.size(), b.size());
    if (n == 0) throw shape_error{"prediction_horizon: empty overlap"};
    if (coord >= a.dim || coord >= b.dim) throw shape_error{"prediction_horizon: coordinate out of range"};
    if (std::abs(a.times[0] - b.times[0]) > 1e-9) throw shape_error{"prediction_horizon: start times differ"};
    if (n > 1 && std::abs((a.times[1] - a.times[0]) - (b.times[1] - b.times[0])) > 1e-12)
        throw shape_error{"prediction_horizon: spacings differ"};
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(a.at(i, coord) - b.at(i, coord)) > eps) return a.times[i];
    return a.times[n - 1];
}

std::vector<std::pair<double, double>> attractor_projection(const trajectory& traj, const projection_mode& mode)
{
    std::vector<std::pair<double, double>> points;
    if (mode.i >= traj.dim || mode.j >= traj.dim) throw shape_error{"attractor_projection: coordinate out of range"};
    if (mode.kind == projection_mode::coords) {
        points.reserve(traj.size());
        for (std::size_t k = 0; k < traj.size(); ++k) points.emplace_back(traj.at(k, mode.i), traj.at(k, mode.j));
        return points;
    }
    if (traj.size() < 2 || mode.lag > traj.times.back() - traj.times.front() + 1e-12)
        throw history_error{"attractor_projection: lag exceeds the trajectory span"};
    const double t_first = traj.times.front();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t - mode.lag < t_first - 1e-9) continue;
        points.emplace_back(interpolate(traj, mode.i, std::max(t - mode.lag, t_first)), traj.at(k, mode.i));
    }
    return points;
}

void write_projection_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& points)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << "a,b\n";
    for (const auto& [a, b] : points) out << fmt_real(a) << ',' << fmt_real(b) << '\n';
}

box2 bounding_box(const std::vector<std::pair<double, double>>& points)
{
    box2 box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& [a, b] : points) {
        box.x_lo = std::min(box.x_lo, a);
        box.x_hi = std::max(box.x_hi, a);
        box.y_lo = std::min(box.y_lo, b);
        box.y_hi = std::max(box.y_hi, b);
    }
    return box;
}

}  // namespace dyncopy

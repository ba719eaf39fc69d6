#pragma once

// Poincare sections, period classification, bifurcation diagrams and prediction horizons. //

#include "dyncopy/blackbox.hpp"
#include "dyncopy/integrate.hpp"
#include "dyncopy/trainer.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace dyncopy {

struct section_point {
    double t_c;    ///< crossing time
    double value;  ///< delayed coordinate x(t_c - lag)
};

enum class crossing { up, down, both };

/// Crossings of `coord` through `level`, each reported with the delayed value x(t_c - lag).
///
/// Crossing times and delayed values are both read by linear interpolation of
/// the trajectory. An up-crossing is a sample pair with x[i] <= level < x[i+1];
/// crossings closer than `lag` to the start are dropped.
std::vector<section_point> poincare_section(
  const trajectory& traj, std::size_t coord, double level, double lag, crossing direction = crossing::up);

struct period_class {
    enum kind_t { periodic, quasiperiodic, chaotic, diverged, insufficient };
    kind_t kind = insufficient;
    int period = 0;  ///< k for periodic, 0 otherwise

    std::string label() const;
    friend bool operator==(const period_class&, const period_class&) = default;
};

struct period_options {
    double tol = 0.05;
    std::size_t min_cycles = 2;
    std::size_t k_max = 8;
};

/// Smallest k <= k_max with |v[i+k] - v[i]| <= tol along the whole sequence.
///
/// Needs at least k_max * min_cycles values (else insufficient). Non-periodic
/// sequences are called quasiperiodic when they fill their range evenly and
/// nearby points do not separate under iteration, chaotic otherwise.
period_class detect_period(std::span<const double> values, const period_options& opts);

/// Default tolerance: 5% of the value range, floored at 1e-6 of the value scale.
double default_period_tolerance(std::span<const double> values);

std::vector<double> section_values(const std::vector<section_point>& points);

struct section_spec {
    std::size_t coord = 0;
    double level = 5.0;
    double lag = 0.1;
    crossing direction = crossing::up;
    /// Relative tolerance used for period detection (fraction of the value range).
    double tol_fraction = 0.05;
    /// Absolute floor on the tolerance.
    double tol_floor = 1e-3;
    std::size_t min_cycles = 2;
    std::size_t k_max = 8;
};

/// Classify a section with tolerance max(tol_fraction * range, tol_floor).
period_class classify_section(std::span<const double> values, const section_spec& spec);

struct bifurcation_row {
    double key;  ///< mc_step or parameter value
    std::vector<double> values;
    period_class cls;
};

/// Physical-unit view of a machine trajectory (identity when unset).
using unit_mapper = std::function<trajectory(const trajectory&)>;

/// Replay every snapshot, drop the transient, section, classify.
/// Diverged snapshots yield an empty row classified diverged.
std::vector<bifurcation_row> bifurcation_over_training(const train_trace& trace,
                                                       const machine_spec& spec,
                                                       const initial_condition& init,
                                                       const evolve_settings& settings,
                                                       const section_spec& section,
                                                       double transient_fraction,
                                                       const unit_mapper& to_physical = {});

enum class lorenz_axis { sigma, r, b };

struct sweep_settings {
    std::vector<double> x0{1.0, 1.0, 1.0};
    double duration = 200.0;
    double transient_fraction = 0.5;
    double step = 1e-3;
};

/// Ground-truth Lorenz bifurcation rows along one parameter axis.
std::vector<bifurcation_row> bifurcation_sweep(const lorenz_params& base,
                                               lorenz_axis axis,
                                               std::span<const double> values,
                                               const section_spec& section,
                                               const sweep_settings& settings);

/// Bifurcation CSV in long format `key,value`; rows without section points
/// emit nothing.
void write_bifurcation_csv(const std::filesystem::path& path, const std::vector<bifurcation_row>& rows);

/// Per-row class summary `key,class,points`.
void write_bifurcation_classes(const std::filesystem::path& path, const std::vector<bifurcation_row>& rows);

void write_section_csv(const std::filesystem::path& path, const std::vector<section_point>& points);

/// First time |a - b| on `coord` exceeds eps over the common overlap; the
/// overlap end if never. Throws shape_error on an empty overlap or mismatched spacing.
double prediction_horizon(const trajectory& a, const trajectory& b, double eps, std::size_t coord = 0);

struct projection_mode {
    enum kind_t { coords, delayed };
    kind_t kind = coords;
    std::size_t i = 0;
    std::size_t j = 1;
    double lag = 0.1;  ///< delayed mode, on coordinate i

    static projection_mode pair(std::size_t i, std::size_t j) { return {coords, i, j, 0.0}; }
    static projection_mode delay(double lag, std::size_t coord = 0) { return {delayed, coord, coord, lag}; }
};

/// (x_i, x_j) pairs, or (x(t - lag), x(t)) pairs starting once t - lag is inside the trajectory.
/// Throws history_error when lag exceeds the trajectory span.
std::vector<std::pair<double, double>> attractor_projection(const trajectory& traj, const projection_mode& mode);

void write_projection_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& points);

/// Axis-aligned bounding box of a point set.
struct box2 {
    double x_lo, x_hi, y_lo, y_hi;
    bool contains(const std::pair<double, double>& p) const
    {
        return p.first >= x_lo && p.first <= x_hi && p.second >= y_lo && p.second <= y_hi;
    }
};
box2 bounding_box(const std::vector<std::pair<double, double>>& points);

}  // namespace dyncopy

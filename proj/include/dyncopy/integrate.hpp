#pragma once

// Fixed-step RK4 for ODEs and delay-DEs, plus discrete map iteration. //

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace dyncopy {

/// A uniformly sampled scalar record x(t0), x(t0 + gap), ...
struct series {
    double t0 = 0.0;
    double gap = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * gap; }
    double t_end() const { return time(size() - 1); }
};

/// Time-stamped sequence of d-dimensional states, stored flat.
struct trajectory {
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> values;

    trajectory() = default;
    explicit trajectory(std::size_t dim) : dim{dim} {}

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    std::span<const double> state(std::size_t i) const { return {values.data() + i * dim, dim}; }
    double at(std::size_t i, std::size_t coord) const { return values[i * dim + coord]; }
    void push(double t, std::span<const double> x);
    /// One coordinate as a series (assumes uniform spacing).
    series component(std::size_t coord) const;
};

/// Delay coordinate layout: window (x(t), x(t - gap), ..., x(t - taps*gap)).
struct delay_spec {
    std::size_t taps = 1;
    double gap = 1.0;

    std::size_t window_size() const { return taps + 1; }
    double horizon() const { return static_cast<double>(taps) * gap; }
};

/// dx/dt = field(t, x), written into `dxdt`.
using vector_field = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

/// Scalar delay field dz/dt = rhs(t, window), window newest-first.
using window_field = std::function<double(double t, std::span<const double> window)>;

/// x_{k+1} = step(x_k), written into `next`.
using state_map = std::function<void(std::span<const double> x, std::span<double> next)>;

/// x(t + gap) = step(window), window newest-first.
using window_map = std::function<double(std::span<const double> window)>;

/// No divergence bound; only non-finite values abort.
inline constexpr double unbounded = std::numeric_limits<double>::infinity();

/// One classical RK4 step. Throws divergence_error on a non-finite stage.
std::vector<double> rk4_step(const vector_field& field, double t, std::span<const double> x, double h);

/// Integrate from t0 to t1 with fixed step h; includes both endpoints.
///
/// (t1 - t0) / h must be an integer up to rounding. Throws divergence_error,
/// carrying the last valid time, if any state is non-finite or exceeds
/// `max_abs` in magnitude.
trajectory integrate_ode(
  const vector_field& field, std::span<const double> x0, double t0, double t1, double h, double max_abs = unbounded);

/// Sampled past of a scalar variable on a uniform grid.
class history_buffer {
public:
    history_buffer(double t_start, double spacing, std::vector<double> values);

    struct lookup_result {
        double value;
        bool interpolated;
    };

    /// Value at time t: the stored sample on grid points, linear interpolation between them.
    /// Throws history_error outside [t_start, t_end].
    lookup_result lookup(double t) const;
    double value_at(double t) const { return lookup(t).value; }

    double sample(std::size_t i) const { return values_[i]; }
    /// Value halfway between samples i and i + 1 (same rule as lookup()).
    double midpoint(std::size_t i) const { return 0.5 * (values_[i] + values_[i + 1]); }
    void push(double value) { values_.push_back(value); }

    double t_start() const { return t_start_; }
    double spacing() const { return spacing_; }
    double t_end() const { return t_start_ + static_cast<double>(values_.size() - 1) * spacing_; }
    std::size_t size() const { return values_.size(); }

private:
    double t_start_;
    double spacing_;
    std::vector<double> values_;
};

/// Resample `history` onto a grid of spacing h ending at its last sample.
///
/// history.gap must be a positive integer multiple of h; intermediate points
/// are filled by linear interpolation. Only the trailing `span` time units are kept
/// (all of them when span is negative).
history_buffer make_history(const series& history, double h, double span = -1.0);

/// Integrate a scalar delay-DE by the method of steps.
///
/// Starts at the last history sample and runs to t1. h must divide delay.gap
/// and be no larger than it; the history must cover delay.horizon().
/// Full-step stages read delayed values straight from the grid, half-step
/// stages use the linear midpoint rule.
trajectory integrate_dde(const window_field& rhs,
                         const series& history,
                         double t1,
                         double h,
                         const delay_spec& delay,
                         double max_abs = unbounded);

/// n applications of a vector map; n + 1 states, times 0, 1, ..., n (shifted by t0).
trajectory iterate_map(
  const state_map& step, std::span<const double> x0, std::size_t n, double t0 = 0.0, double max_abs = unbounded);

/// n applications of a delay map. `history` holds at least taps + 1 records at
/// spacing delay.gap; the trajectory starts at its last record.
trajectory iterate_delay_map(const window_map& step,
                             const series& history,
                             std::size_t n,
                             const delay_spec& delay,
                             double max_abs = unbounded);

/// Number of steps of size h in [t0, t1]; throws if not an integer up to rounding.
std::size_t step_count(double t0, double t1, double h);

}  // namespace dyncopy

#include "dyncopy/integrate.hpp"

#include "dyncopy/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dyncopy {

namespace {

bool state_ok(std::span<const double> x, double max_abs)
{
    return std::all_of(x.begin(), x.end(), [max_abs](double v) { return std::isfinite(v) && std::abs(v) <= max_abs; });
}

bool all_finite(std::span<const double> x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// Integer ratio a / b, or throws with `what`.
std::size_t integer_ratio(double a, double b, const char* what)
{
    double r = a / b;
    double n = std::round(r);
    if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, n)) throw domain_error{what};
    return static_cast<std::size_t>(n);
}

/// Shared RK4 stepper with caller-owned stage buffers.
struct rk4_workspace {
    std::vector<double> k1, k2, k3, k4, tmp;
    explicit rk4_workspace(std::size_t d) : k1(d), k2(d), k3(d), k4(d), tmp(d) {}

    void step(const vector_field& field, double t, std::span<const double> x, double h, std::span<double> out)
    {
        const std::size_t d = x.size();
        const double half = 0.5 * h;
        field(t, x, k1);
        if (!all_finite(k1)) throw divergence_error{"rk4: non-finite stage", t};
        for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + half * k1[i];
        field(t + half, tmp, k2);
        if (!all_finite(k2)) throw divergence_error{"rk4: non-finite stage", t};
        for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + half * k2[i];
        field(t + half, tmp, k3);
        if (!all_finite(k3)) throw divergence_error{"rk4: non-finite stage", t};
        for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + h * k3[i];
        field(t + h, tmp, k4);
        if (!all_finite(k4)) throw divergence_error{"rk4: non-finite stage", t};
        for (std::size_t i = 0; i < d; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
};

}  // namespace

void trajectory::push(double t, std::span<const double> x)
{
    if (x.size() != dim) throw shape_error{"trajectory: state has wrong dimension"};
    times.push_back(t);
    values.insert(values.end(), x.begin(), x.end());
}

series trajectory::component(std::size_t coord) const
{
    if (coord >= dim) throw shape_error{"trajectory: coordinate out of range"};
    series s;
    s.t0 = times.empty() ? 0.0 : times.front();
    s.gap = times.size() > 1 ? times[1] - times[0] : 1.0;
    s.values.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) s.values.push_back(at(i, coord));
    return s;
}

std::size_t step_count(double t0, double t1, double h)
{
    if (!(h > 0.0)) throw domain_error{"step must be positive"};
    if (!(t1 > t0)) throw domain_error{"integration interval must satisfy t1 > t0"};
    double r = (t1 - t0) / h;
    double n = std::round(r);
    if (std::abs(r - n) > 1e-6) throw domain_error{"interval is not an integer number of steps"};
    return static_cast<std::size_t>(n);
}

std::vector<double> rk4_step(const vector_field& field, double t, std::span<const double> x, double h)
{
    if (!(h > 0.0)) throw domain_error{"rk4_step: step must be positive"};
    rk4_workspace ws{x.size()};
    std::vector<double> out(x.size());
    ws.step(field, t, x, h, out);
    return out;
}

trajectory integrate_ode(
  const vector_field& field, std::span<const double> x0, double t0, double t1, double h, double max_abs)
{
    const std::size_t steps = step_count(t0, t1, h);
    const std::size_t d = x0.size();
    if (!state_ok(x0, max_abs)) throw divergence_error{"integrate_ode: invalid initial state", t0};
    trajectory traj{d};
    traj.times.reserve(steps + 1);
    traj.values.reserve((steps + 1) * d);
    traj.push(t0, x0);
    rk4_workspace ws{d};
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> next(d);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * h;
        ws.step(field, t, x, h, next);
        if (!state_ok(next, max_abs)) throw divergence_error{"integrate_ode: state diverged", t};
        x.swap(next);
        traj.push(t0 + static_cast<double>(k + 1) * h, x);
    }
    return traj;
}

history_buffer::history_buffer(double t_start, double spacing, std::vector<double> values)
  : t_start_{t_start}, spacing_{spacing}, values_{std::move(values)}
{
    if (!(spacing > 0.0)) throw domain_error{"history_buffer: spacing must be positive"};
    if (values_.empty()) throw history_error{"history_buffer: empty history"};
}

history_buffer::lookup_result history_buffer::lookup(double t) const
{
    const double pos = (t - t_start_) / spacing_;
    const double last = static_cast<double>(values_.size() - 1);
    constexpr double grid_tol = 1e-9;
    if (pos < -grid_tol || pos > last + grid_tol)
        throw history_error{"history lookup at t = " + std::to_string(t) + " outside ["
                            + std::to_string(t_start_) + ", " + std::to_string(t_end()) + "]"};
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= grid_tol) return {values_[static_cast<std::size_t>(nearest)], false};
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return {(1.0 - frac) * values_[i] + frac * values_[i + 1], true};
}

history_buffer make_history(const series& history, double h, double span)
{
    if (history.values.empty()) throw history_error{"make_history: empty history"};
    const std::size_t ratio = integer_ratio(history.gap, h, "history spacing must be an integer multiple of the step");
    const std::size_t full = (history.size() - 1) * ratio + 1;
    std::size_t keep = full;
    if (span >= 0.0) {
        const auto need = static_cast<std::size_t>(std::llround(span / h)) + 1;
        if (need > full) throw history_error{"history segment shorter than the required span"};
        keep = need;
    }
    std::vector<double> values;
    values.reserve(keep);
    for (std::size_t j = full - keep; j < full; ++j) {
        const std::size_t q = j / ratio;
        const std::size_t r = j % ratio;
        if (r == 0) {
            values.push_back(history.values[q]);
        }
        else {
            const double frac = static_cast<double>(r) / static_cast<double>(ratio);
            values.push_back((1.0 - frac) * history.values[q] + frac * history.values[q + 1]);
        }
    }
    const double t_start = history.t_end() - static_cast<double>(keep - 1) * h;
    return history_buffer{t_start, h, std::move(values)};
}

trajectory integrate_dde(
  const window_field& rhs, const series& history, double t1, double h, const delay_spec& delay, double max_abs)
{
    if (delay.taps < 1 || !(delay.gap > 0.0)) throw domain_error{"integrate_dde: invalid delay spec"};
    const std::size_t lag = integer_ratio(delay.gap, h, "integrate_dde: step must divide the delay gap");
    const double t_start = history.t_end();
    const std::size_t steps = step_count(t_start, t1, h);
    history_buffer buf = make_history(history, h);
    if (buf.size() - 1 < delay.taps * lag)
        throw history_error{"integrate_dde: history covers less than taps * gap"};

    const std::size_t w = delay.window_size();
    std::vector<double> window(w);
    trajectory traj{1};
    traj.times.reserve(steps + 1);
    traj.values.reserve(steps + 1);
    double z = buf.sample(buf.size() - 1);
    if (!std::isfinite(z) || std::abs(z) > max_abs) throw divergence_error{"integrate_dde: invalid initial state", t_start};
    traj.push(t_start, std::span<const double>{&z, 1});

    auto stage = [&](double t, double value) {
        window[0] = value;
        double k = rhs(t, window);
        if (!std::isfinite(k)) throw divergence_error{"integrate_dde: non-finite stage", t};
        return k;
    };

    const double half = 0.5 * h;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t_start + static_cast<double>(s) * h;
        const std::size_t now = buf.size() - 1;
        for (std::size_t j = 1; j < w; ++j) window[j] = buf.sample(now - j * lag);
        const double k1 = stage(t, z);
        for (std::size_t j = 1; j < w; ++j) window[j] = buf.midpoint(now - j * lag);
        const double k2 = stage(t + half, z + half * k1);
        const double k3 = stage(t + half, z + half * k2);
        for (std::size_t j = 1; j < w; ++j) window[j] = buf.sample(now + 1 - j * lag);
        const double k4 = stage(t + h, z + h * k3);
        const double next = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(next) || std::abs(next) > max_abs) throw divergence_error{"integrate_dde: state diverged", t};
        z = next;
        buf.push(z);
        traj.push(t_start + static_cast<double>(s + 1) * h, std::span<const double>{&z, 1});
    }
    return traj;
}

trajectory iterate_map(const state_map& step, std::span<const double> x0, std::size_t n, double t0, double max_abs)
{
    const std::size_t d = x0.size();
    if (!state_ok(x0, max_abs)) throw divergence_error{"iterate_map: invalid initial state", t0};
    trajectory traj{d};
    traj.push(t0, x0);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> next(d);
    for (std::size_t k = 0; k < n; ++k) {
        step(x, next);
        if (!state_ok(next, max_abs))
            throw divergence_error{"iterate_map: state diverged", t0 + static_cast<double>(k)};
        x.swap(next);
        traj.push(t0 + static_cast<double>(k + 1), x);
    }
    return traj;
}

trajectory iterate_delay_map(
  const window_map& step, const series& history, std::size_t n, const delay_spec& delay, double max_abs)
{
    const std::size_t w = delay.window_size();
    if (history.size() < w)
        throw history_error{"iterate_delay_map: need " + std::to_string(w) + " records, got "
                            + std::to_string(history.size())};
    if (std::abs(history.gap - delay.gap) > 1e-9 * delay.gap)
        throw history_error{"iterate_delay_map: history spacing differs from the delay gap"};
    std::vector<double> record(history.values.end() - static_cast<std::ptrdiff_t>(w), history.values.end());
    const double t_start = history.t_end();
    if (!state_ok(std::span<const double>{&record.back(), 1}, max_abs))
        throw divergence_error{"iterate_delay_map: invalid initial state", t_start};
    trajectory traj{1};
    traj.push(t_start, std::span<const double>{&record.back(), 1});
    std::vector<double> window(w);
    for (std::size_t k = 0; k < n; ++k) {
        // newest-first view of the last w records
        for (std::size_t j = 0; j < w; ++j) window[j] = record[record.size() - 1 - j];
        const double next = step(window);
        const double t = t_start + static_cast<double>(k) * delay.gap;
        if (!std::isfinite(next) || std::abs(next) > max_abs)
            throw divergence_error{"iterate_delay_map: state diverged", t};
        record.erase(record.begin());
        record.push_back(next);
        traj.push(t_start + static_cast<double>(k + 1) * delay.gap, std::span<const double>{&next, 1});
    }
    return traj;
}

}  // namespace dyncopy

#include "dyncopy/blackbox.hpp"

#include "dyncopy/error.hpp"
#include "dyncopy/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dyncopy {

std::array<double, 3> lorenz_rhs(const lorenz_params& p, std::span<const double> s)
{
    if (s.size() != 3) throw shape_error{"lorenz_rhs: state must have 3 components"};
    const double x = s[0], y = s[1], z = s[2];
    return {-p.sigma * (x - y), -x * z + p.r * x - y, x * y - p.b * z};
}

vector_field lorenz_field(const lorenz_params& p)
{
    return [p](double, std::span<const double> s, std::span<double> out) {
        auto d = lorenz_rhs(p, s);
        std::copy(d.begin(), d.end(), out.begin());
    };
}

training_set sample_flow_pairs(const lorenz_params& p,
                               std::size_t count,
                               double interval,
                               const sampling_box& box,
                               std::uint64_t seed,
                               flow_target target,
                               double step)
{
    if (count == 0) throw shape_error{"sample_flow_pairs: P must be positive"};
    if (!(interval > 0.0)) throw domain_error{"sample_flow_pairs: interval must be positive"};
    const auto steps = std::max<long long>(1, std::llround(interval / step));
    const double h = interval / static_cast<double>(steps);
    auto field = lorenz_field(p);
    prng_t prng{seed};
    training_set set{3, 3};
    std::vector<double> in(3), out(3);
    for (std::size_t n = 0; n < count; ++n) {
        std::array<double, 3> x0{};
        for (std::size_t c = 0; c < 3; ++c) {
            // open interval: redraw the (probability ~2^-53) endpoint
            do x0[c] = uniform(prng, box.lo[c], box.hi[c]);
            while (x0[c] == box.lo[c]);
        }
        auto traj = integrate_ode(field, x0, 0.0, interval, h);
        auto x1 = traj.state(traj.size() - 1);
        for (std::size_t c = 0; c < 3; ++c) {
            if (target == flow_target::flow_map) {
                in[c] = x0[c];
                out[c] = x1[c];
            }
            else {
                in[c] = 0.5 * (x0[c] + x1[c]);
                out[c] = (x1[c] - x0[c]) / interval;
            }
        }
        set.add(in, out);
    }
    return set;
}

std::vector<double> settle(const lorenz_params& p, std::span<const double> x0, double duration, double step)
{
    if (duration <= 0.0) return {x0.begin(), x0.end()};
    auto traj = integrate_ode(lorenz_field(p), x0, 0.0, duration, step);
    auto last = traj.state(traj.size() - 1);
    return {last.begin(), last.end()};
}

series record_series(
  const lorenz_params& p, std::span<const double> x0, double duration, double gap, std::size_t component, double step)
{
    if (component >= 3) throw shape_error{"record_series: component out of range"};
    const double ratio = gap / step;
    const auto every = static_cast<std::size_t>(std::llround(ratio));
    if (every < 1 || std::abs(ratio - static_cast<double>(every)) > 1e-9 * ratio)
        throw domain_error{"record_series: gap must be an integer multiple of the step"};
    const auto records = static_cast<std::size_t>(std::llround(duration / gap));
    auto traj = integrate_ode(lorenz_field(p), x0, 0.0, static_cast<double>(records * every) * step, step);
    series s{0.0, gap, {}};
    s.values.reserve(records + 1);
    for (std::size_t i = 0; i <= records; ++i) s.values.push_back(traj.at(i * every, component));
    return s;
}

embedding delay_embed(const series& s, std::size_t taps, embed_target target)
{
    if (taps < 1) throw shape_error{"delay_embed: taps must be >= 1"};
    const std::size_t extra = target == embed_target::next_value ? 1 : 2;
    if (s.size() <= taps + extra)
        throw shape_error{"delay_embed: series of length " + std::to_string(s.size()) + " too short for "
                          + std::to_string(taps) + " taps"};
    embedding emb{training_set{taps + 1, 1}, delay_spec{taps, s.gap}};
    std::vector<double> window(taps + 1);
    // derivative samples start one record later so the count is len - taps - 2
    const std::size_t first = target == embed_target::next_value ? taps : taps + 1;
    for (std::size_t i = first; i + 1 < s.size(); ++i) {
        for (std::size_t j = 0; j <= taps; ++j) window[j] = s.values[i - j];
        const double y = target == embed_target::next_value ? s.values[i + 1]
                                                            : (s.values[i + 1] - s.values[i - 1]) / (2.0 * s.gap);
        emb.set.add(window, std::span<const double>{&y, 1});
    }
    return emb;
}

training_set one_hot_set(const labeled_patterns& patterns, std::size_t classes)
{
    training_set set{patterns.width, classes};
    std::vector<double> y(classes);
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const int label = patterns.labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw shape_error{"one_hot_set: label " + std::to_string(label) + " out of range"};
        std::fill(y.begin(), y.end(), -1.0);
        y[static_cast<std::size_t>(label)] = 1.0;
        set.add(patterns.pattern(i), y);
    }
    return set;
}

std::size_t argmax(std::span<const double> v)
{
    if (v.empty()) throw shape_error{"argmax of an empty vector"};
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double recognition_rate(const network& net, const labeled_patterns& patterns)
{
    if (patterns.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < patterns.size(); ++i)
        hits += argmax(net.forward(patterns.pattern(i))) == static_cast<std::size_t>(patterns.labels[i]);
    return static_cast<double>(hits) / static_cast<double>(patterns.size());
}

teacher_result make_teacher(std::size_t m,
                            std::size_t n,
                            std::size_t l,
                            const labeled_patterns& memories,
                            const train_config& cfg,
                            double init_bound)
{
    if (memories.width != m) throw shape_error{"make_teacher: pattern width differs from m"};
    auto set = one_hot_set(memories, l);
    teacher_result result{init_random(m, n, l, transfer_kind::tanh, init_bound, derive_seed(cfg.seed, 0)), false, 0};
    std::size_t round = 0;
    while (result.steps < cfg.max_steps) {
        if (recognition_rate(result.net, memories) == 1.0 &&
            (cfg.target_loss <= 0.0 || loss(result.net, set).mse <= cfg.target_loss)) {
            result.converged = true;
            break;
        }
        train_config chunk = cfg;
        chunk.max_steps = std::min(cfg.snapshot_every, cfg.max_steps - result.steps);
        chunk.seed = derive_seed(cfg.seed, ++round);
        auto tr = train(result.net, set, chunk);
        result.net = std::move(tr.net);
        result.steps += tr.trace.steps_run;
    }
    if (!result.converged) result.converged = recognition_rate(result.net, memories) == 1.0;
    return result;
}

training_set probe_random(const network& teacher, std::size_t count, std::uint64_t seed, probe_encoding encoding)
{
    const double low = encoding == probe_encoding::plus_minus ? -1.0 : 0.0;
    prng_t prng{seed};
    training_set set{teacher.inputs(), teacher.outputs()};
    std::vector<double> x(teacher.inputs());
    for (std::size_t n = 0; n < count; ++n) {
        for (double& v : x) v = (prng() >> 63) ? 1.0 : low;
        set.add(x, teacher.forward(x));
    }
    return set;
}

double recovery_rate(const network& student, const network& teacher, const labeled_patterns& memories)
{
    if (student.outputs() != teacher.outputs()) throw shape_error{"recovery_rate: output widths differ"};
    if (memories.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < memories.size(); ++i) {
        auto x = memories.pattern(i);
        hits += argmax(student.forward(x)) == argmax(teacher.forward(x));
    }
    return static_cast<double>(hits) / static_cast<double>(memories.size());
}

series scaling::to_unit(const series& s) const
{
    series out{s.t0 / time_scale, s.gap / time_scale, {}};
    out.values.reserve(s.size());
    for (double v : s.values) out.values.push_back(to_unit(v));
    return out;
}

series scaling::from_unit(const series& s) const
{
    series out{s.t0 * time_scale, s.gap * time_scale, {}};
    out.values.reserve(s.size());
    for (double v : s.values) out.values.push_back(from_unit(v));
    return out;
}

trajectory scaling::from_unit(const trajectory& traj) const
{
    trajectory out{traj.dim};
    out.times.reserve(traj.size());
    out.values.reserve(traj.values.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out.times.push_back(traj.times[i] * time_scale);
        for (std::size_t c = 0; c < traj.dim; ++c) out.values.push_back(from_unit(traj.at(i, c), c));
    }
    return out;
}

std::vector<double> scaling::to_unit(std::span<const double> x) const
{
    std::vector<double> u(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) u[c] = to_unit(x[c], c);
    return u;
}

}  // namespace dyncopy

#pragma once

// Reference black systems and the data extracted from them. //

#include "dyncopy/integrate.hpp"
#include "dyncopy/net.hpp"
#include "dyncopy/trainer.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dyncopy {

// --- Lorenz flow ---

struct lorenz_params {
    double sigma = 10.0;
    double r = 28.0;
    double b = 8.0 / 3.0;
};

/// dx/dt = -sigma (x - y), dy/dt = -x z + r x - y, dz/dt = x y - b z.
std::array<double, 3> lorenz_rhs(const lorenz_params& p, std::span<const double> state);
vector_field lorenz_field(const lorenz_params& p);

/// Axis-aligned box of initial points (open intervals).
struct sampling_box {
    std::array<double, 3> lo{-20.0, -20.0, 0.0};
    std::array<double, 3> hi{20.0, 20.0, 40.0};
};

/// What a flow pair records.
enum class flow_target {
    /// x(0) -> x(interval)
    flow_map,
    /// (x(0) + x(interval)) / 2 -> (x(interval) - x(0)) / interval, the chord
    /// velocity assigned to the chord midpoint (a field sample for DLM training)
    chord_velocity
};

/// P random initial points in `box`, each evolved over `interval` with RK4.
/// Deterministic in `seed`. Throws shape_error for count == 0.
training_set sample_flow_pairs(const lorenz_params& p,
                               std::size_t count,
                               double interval,
                               const sampling_box& box,
                               std::uint64_t seed,
                               flow_target target = flow_target::chord_velocity,
                               double step = 1e-3);

/// State after integrating for `duration` (to land on the attractor).
std::vector<double> settle(const lorenz_params& p, std::span<const double> x0, double duration, double step = 1e-3);

/// Scalar record of one coordinate at spacing `gap`, starting at t = 0 from x0.
/// gap must be an integer multiple of `step`; length round(duration / gap) + 1.
series record_series(const lorenz_params& p,
                     std::span<const double> x0,
                     double duration,
                     double gap,
                     std::size_t component,
                     double step = 1e-3);

// --- delay embedding ---

enum class embed_target {
    next_value,  ///< x(t + gap), for DILM
    derivative   ///< (x(t + gap) - x(t - gap)) / (2 gap), for DDLM
};

struct embedding {
    training_set set;
    delay_spec delay;
};

/// Windows (x(t), x(t - gap), ..., x(t - taps gap)) advancing one record at a time.
/// len - taps - 1 samples for next_value, len - taps - 2 for derivative.
embedding delay_embed(const series& s, std::size_t taps, embed_target target);

// --- teacher classifier ---

/// Labeled binary patterns, pixels stored flat.
struct labeled_patterns {
    std::size_t width = 0;
    std::vector<double> pixels;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> pattern(std::size_t i) const { return {pixels.data() + i * width, width}; }
};

/// Targets +1 for the label's class, -1 elsewhere.
training_set one_hot_set(const labeled_patterns& patterns, std::size_t classes);

/// Index of the largest component; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Fraction of patterns whose argmax output equals the label.
double recognition_rate(const network& net, const labeled_patterns& patterns);

struct teacher_result {
    network net;
    bool converged = false;
    std::size_t steps = 0;
};

/// Train a tanh m-n-l classifier on one-hot targets until it recognizes
/// every memory (checked every cfg.snapshot_every steps) or cfg.max_steps runs out.
/// A positive cfg.target_loss also requires the one-hot mse to reach it, which
/// widens the decision margins the student has to reproduce.
teacher_result make_teacher(std::size_t m,
                            std::size_t n,
                            std::size_t l,
                            const labeled_patterns& memories,
                            const train_config& cfg,
                            double init_bound);

enum class probe_encoding {
    plus_minus,  ///< {-1, +1}
    zero_one     ///< {0, 1}
};

/// P random binary inputs paired with the teacher's raw outputs.
training_set probe_random(const network& teacher,
                          std::size_t count,
                          std::uint64_t seed,
                          probe_encoding encoding = probe_encoding::plus_minus);

/// Fraction of memories on which argmax(student) == argmax(teacher).
double recovery_rate(const network& student, const network& teacher, const labeled_patterns& memories);

// --- normalization ---

/// Affine change of units u = (x - offset) / value_scale, t' = t / time_scale.
///
/// Lorenz-scale states (|x| ~ 20, |dx/dt| ~ 100) are mapped to O(1) values
/// before training so one design bound suits every layer.
struct scaling {
    std::vector<double> offset;  ///< per component; a single entry applies to all
    double value_scale = 1.0;
    double time_scale = 1.0;

    double off(std::size_t c) const { return offset.empty() ? 0.0 : offset[offset.size() == 1 ? 0 : c]; }
    double to_unit(double x, std::size_t c = 0) const { return (x - off(c)) / value_scale; }
    double from_unit(double u, std::size_t c = 0) const { return off(c) + u * value_scale; }
    /// dx/dt in physical units -> du/dt' in scaled units.
    double rate_to_unit(double v) const { return v * time_scale / value_scale; }

    series to_unit(const series& s) const;
    series from_unit(const series& s) const;
    trajectory from_unit(const trajectory& traj) const;
    std::vector<double> to_unit(std::span<const double> x) const;
};

}  // namespace dyncopy

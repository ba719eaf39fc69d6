#pragma once

// Monte-Carlo training of a network under a hard weight bound. //

#include "dyncopy/machines.hpp"
#include "dyncopy/net.hpp"
#include "dyncopy/random.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dyncopy {

/// Paired input and target vectors (x^mu, z^mu), mu = 1..P, stored flat.
struct training_set {
    std::size_t input_width = 0;
    std::size_t target_width = 0;
    std::vector<double> inputs;
    std::vector<double> targets;

    training_set() = default;
    training_set(std::size_t input_width, std::size_t target_width) : input_width{input_width}, target_width{target_width} {}

    std::size_t size() const { return input_width == 0 ? 0 : inputs.size() / input_width; }
    bool empty() const { return size() == 0; }
    std::span<const double> input(std::size_t i) const { return {inputs.data() + i * input_width, input_width}; }
    std::span<const double> target(std::size_t i) const { return {targets.data() + i * target_width, target_width}; }
    void add(std::span<const double> x, std::span<const double> y);

    /// Throws shape_error when empty or inconsistent, domain_error on non-finite values.
    void validate() const;
};

struct loss_value {
    double mse = 0.0;      ///< mean over samples and components of the squared error
    double max_err = 0.0;  ///< largest absolute componentwise error
};

loss_value loss(const network& net, const training_set& set);

struct train_config {
    /// Hard bound on every |parameter|; proposals are clamped into it.
    double design_bound = 1.0;
    /// Half-width of the uniform perturbation.
    double proposal_scale = 0.02;
    /// When positive, the proposal scale shrinks geometrically from
    /// proposal_scale at the first step to this value at max_steps.
    double proposal_final = 0.0;
    std::size_t max_steps = 100000;
    /// Stop once the accepted mse is at or below this value.
    double target_loss = 0.0;
    std::size_t snapshot_every = 1000;
    /// Parameters perturbed per proposal (drawn with replacement).
    std::size_t batch = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One proposed coordinate change: params[index] += delta, then clamp.
struct perturbation {
    std::size_t index;
    double delta;
};

/// Draw the coordinates and perturbations of one MC proposal.
std::vector<perturbation> draw_proposal(const network& net, const train_config& cfg, prng_t& prng);

/// Apply a proposal in order, clamping each touched parameter to +-design_bound.
void apply_proposal(network& net, std::span<const perturbation> proposal, double design_bound);

struct mc_outcome {
    network net;
    bool accepted;
    double mse;
};

/// One greedy MC step evaluated from scratch: accept iff the new mse is not worse.
mc_outcome mc_step(const network& net, const training_set& set, const train_config& cfg, prng_t& prng);

struct trace_record {
    std::size_t step;
    double mse;
    double max_err;
};

struct snapshot {
    std::size_t step;
    double mse;
    double max_err;
    network net;
};

struct train_trace {
    /// One record per accepted proposal; mse is non-increasing along it.
    std::vector<trace_record> accepted;
    /// Full network copies every snapshot_every steps and at termination.
    std::vector<snapshot> snapshots;
    std::size_t steps_run = 0;
    bool converged = false;
};

struct train_result {
    network net;
    train_trace trace;
};

/// Run greedy MC until the accepted mse reaches cfg.target_loss or cfg.max_steps
/// proposals have been made. Deterministic in cfg.seed.
train_result train(const network& net, const training_set& set, const train_config& cfg);

/// Write `trace.csv` (mc_step,mse,max_err,snapshot_path) and one model file per snapshot
/// under `dir`. Accepted-step records carry an empty snapshot_path.
void write_trace(const std::filesystem::path& dir, const train_trace& trace);

/// Variant and delay layout used to rebuild a machine from a snapshot network.
struct machine_spec {
    machine_kind kind;
    std::optional<delay_spec> delay;
};

struct replay_row {
    std::size_t step;
    trajectory traj;       ///< post-transient part; empty when diverged
    bool diverged = false;
    std::string message;   ///< divergence message, if any
};

/// Rebuild a machine from every snapshot, self-evolve it from `init` and drop
/// the leading `transient_fraction` of each trajectory. Divergence of one
/// snapshot is recorded in its row and does not stop the sequence.
std::vector<replay_row> replay_snapshots(const train_trace& trace,
                                         const machine_spec& spec,
                                         const initial_condition& init,
                                         const evolve_settings& settings,
                                         double transient_fraction);

/// Drop the leading fraction of samples of a trajectory.
trajectory drop_transient(const trajectory& traj, double fraction);

}  // namespace dyncopy

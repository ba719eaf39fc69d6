#pragma once

// Learning-machine variants built on a network and their self-evolution. //

#include "dyncopy/integrate.hpp"
#include "dyncopy/net.hpp"

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace dyncopy {

/// How the network output is read as a dynamical rule.
enum class machine_kind {
    ilm,   ///< z(t+1) = phi(x(t)), full state
    dlm,   ///< dz/dt = phi(x(t)), full state
    ddlm,  ///< dz/dt = phi(x(t), x(t-gap), ..., x(t-taps*gap)), scalar
    dilm   ///< x(t+gap) = phi(x(t), x(t-gap), ..., x(t-taps*gap)), scalar
};

std::string_view to_string(machine_kind kind);
machine_kind parse_machine_kind(std::string_view name);
inline bool is_delay_machine(machine_kind kind) { return kind == machine_kind::ddlm || kind == machine_kind::dilm; }

/// A network tagged with its variant. Shape constraints are checked on construction:
/// ILM/DLM need l == m; DDLM/DILM need l == 1, m == taps + 1 and a delay spec.
class machine {
public:
    machine(machine_kind kind, network net, std::optional<delay_spec> delay = std::nullopt);

    machine_kind kind() const { return kind_; }
    const network& net() const { return net_; }
    const std::optional<delay_spec>& delay() const { return delay_; }

private:
    machine_kind kind_;
    network net_;
    std::optional<delay_spec> delay_;
};

std::vector<double> ilm_step(const machine& mach, std::span<const double> x);
std::vector<double> dlm_rhs(const machine& mach, std::span<const double> x);
double ddlm_rhs(const machine& mach, std::span<const double> window);
double dilm_step(const machine& mach, std::span<const double> window);

/// A state vector (ILM/DLM) or a history segment (DDLM/DILM).
using initial_condition = std::variant<std::vector<double>, series>;

struct evolve_settings {
    /// Integration step for DLM/DDLM; ignored by the iterative machines.
    double step = 1e-3;
    /// Evolution length in time units (DLM/DDLM).
    double duration = 0.0;
    /// Number of iterations (ILM/DILM).
    std::size_t iterations = 0;
    /// |state| above this aborts with divergence_error.
    double divergence_bound = 1e6;
};

/// Close the loop z = x and run the machine as an autonomous system.
///
/// ILM/DLM start at time 0 from the given state. Delay machines start at the
/// last history sample, so their trajectories are stamped in the history's
/// time frame. The returned trajectory includes the initial point.
trajectory self_evolve(const machine& mach, const initial_condition& init, const evolve_settings& settings);

}  // namespace dyncopy

#include "dyncopy/machines.hpp"

#include "dyncopy/error.hpp"

#include <cmath>
#include <string>

namespace dyncopy {

std::string_view to_string(machine_kind kind)
{
    switch (kind) {
    case machine_kind::ilm: return "ilm";
    case machine_kind::dlm: return "dlm";
    case machine_kind::ddlm: return "ddlm";
    case machine_kind::dilm: return "dilm";
    }
    return "?";
}

machine_kind parse_machine_kind(std::string_view name)
{
    if (name == "ilm") return machine_kind::ilm;
    if (name == "dlm") return machine_kind::dlm;
    if (name == "ddlm") return machine_kind::ddlm;
    if (name == "dilm") return machine_kind::dilm;
    throw format_error{"unknown machine kind '" + std::string{name} + "'"};
}

machine::machine(machine_kind kind, network net, std::optional<delay_spec> delay)
  : kind_{kind}, net_{std::move(net)}, delay_{delay}
{
    if (is_delay_machine(kind_)) {
        if (!delay_) throw usage_error{"delay machine requires a delay spec"};
        if (delay_->taps < 1 || !(delay_->gap > 0.0)) throw domain_error{"delay spec needs taps >= 1 and gap > 0"};
        if (net_.outputs() != 1 || net_.inputs() != delay_->window_size())
            throw shape_error{"delay machine needs an (taps+1)-N-1 network"};
    }
    else {
        if (delay_) throw usage_error{"ILM/DLM take no delay spec"};
        if (net_.outputs() != net_.inputs()) throw shape_error{"ILM/DLM need l == m for self-evolution"};
    }
}

namespace {

void require(const machine& mach, machine_kind kind)
{
    if (mach.kind() != kind)
        throw usage_error{std::string{"operation needs a "} + std::string{to_string(kind)} + ", got "
                          + std::string{to_string(mach.kind())}};
}

}  // namespace

std::vector<double> ilm_step(const machine& mach, std::span<const double> x)
{
    require(mach, machine_kind::ilm);
    return mach.net().forward(x);
}

std::vector<double> dlm_rhs(const machine& mach, std::span<const double> x)
{
    require(mach, machine_kind::dlm);
    return mach.net().forward(x);
}

double ddlm_rhs(const machine& mach, std::span<const double> window)
{
    require(mach, machine_kind::ddlm);
    return mach.net().forward(window)[0];
}

double dilm_step(const machine& mach, std::span<const double> window)
{
    require(mach, machine_kind::dilm);
    return mach.net().forward(window)[0];
}

trajectory self_evolve(const machine& mach, const initial_condition& init, const evolve_settings& settings)
{
    const network& net = mach.net();
    std::vector<double> hidden(net.hidden());
    const double bound = settings.divergence_bound;

    if (!is_delay_machine(mach.kind())) {
        const auto* x0 = std::get_if<std::vector<double>>(&init);
        if (!x0) throw usage_error{"ILM/DLM self-evolution needs a state vector"};
        if (x0->size() != net.inputs()) throw shape_error{"initial state has wrong dimension"};
        if (mach.kind() == machine_kind::ilm) {
            state_map step = [&](std::span<const double> x, std::span<double> next) { net.forward(x, next, hidden); };
            return iterate_map(step, *x0, settings.iterations, 0.0, bound);
        }
        vector_field field = [&](double, std::span<const double> x, std::span<double> dxdt) {
            net.forward(x, dxdt, hidden);
        };
        return integrate_ode(field, *x0, 0.0, settings.duration, settings.step, bound);
    }

    const auto* history = std::get_if<series>(&init);
    if (!history) throw usage_error{"delay-machine self-evolution needs a history segment"};
    const delay_spec& delay = *mach.delay();
    if (history->size() < 2 && delay.taps > 0)
        throw history_error{"history segment too short for the delay window"};
    double out = 0.0;
    if (mach.kind() == machine_kind::dilm) {
        window_map step = [&](std::span<const double> window) {
            net.forward(window, std::span<double>{&out, 1}, hidden);
            return out;
        };
        return iterate_delay_map(step, *history, settings.iterations, delay, bound);
    }
    window_field rhs = [&](double, std::span<const double> window) {
        net.forward(window, std::span<double>{&out, 1}, hidden);
        return out;
    };
    return integrate_dde(rhs, *history, history->t_end() + settings.duration, settings.step, delay, bound);
}

}  // namespace dyncopy

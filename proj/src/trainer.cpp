#include "dyncopy/trainer.hpp"

#include "dyncopy/csv.hpp"
#include "dyncopy/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace dyncopy {

void training_set::add(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != input_width || y.size() != target_width) throw shape_error{"training_set: sample has wrong width"};
    inputs.insert(inputs.end(), x.begin(), x.end());
    targets.insert(targets.end(), y.begin(), y.end());
}

void training_set::validate() const
{
    if (input_width == 0 || target_width == 0) throw shape_error{"training_set: zero width"};
    if (inputs.empty()) throw shape_error{"training_set: empty (P = 0)"};
    if (inputs.size() % input_width != 0 || targets.size() != size() * target_width)
        throw shape_error{"training_set: inconsistent sizes"};
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(inputs.begin(), inputs.end(), finite) || !std::all_of(targets.begin(), targets.end(), finite))
        throw domain_error{"training_set: non-finite value"};
}

loss_value loss(const network& net, const training_set& set)
{
    if (set.input_width != net.inputs() || set.target_width != net.outputs())
        throw shape_error{"loss: training set widths do not match the network"};
    const std::size_t l = net.outputs();
    std::vector<double> z(l);
    std::vector<double> hidden(net.hidden());
    // Accumulate per output row, then across rows; the incremental evaluator
    // in train() sums in the same order.
    std::vector<double> row_sse(l, 0.0);
    double max_err = 0.0;
    for (std::size_t p = 0; p < set.size(); ++p) {
        net.forward(set.input(p), z, hidden);
        auto y = set.target(p);
        for (std::size_t k = 0; k < l; ++k) {
            const double e = z[k] - y[k];
            row_sse[k] += e * e;
            max_err = std::max(max_err, std::abs(e));
        }
    }
    double sse = 0.0;
    for (double s : row_sse) sse += s;
    const double count = static_cast<double>(set.size() * l);
    return {set.empty() ? 0.0 : sse / count, max_err};
}

void train_config::validate() const
{
    if (!(design_bound > 0.0)) throw domain_error{"train_config: design_bound must be positive"};
    if (!(proposal_scale > 0.0)) throw domain_error{"train_config: proposal_scale must be positive"};
    if (proposal_final < 0.0) throw domain_error{"train_config: proposal_final must be >= 0"};
    if (snapshot_every < 1) throw domain_error{"train_config: snapshot_every must be >= 1"};
    if (batch < 1) throw domain_error{"train_config: batch must be >= 1"};
}

std::vector<perturbation> draw_proposal(const network& net, const train_config& cfg, prng_t& prng)
{
    std::vector<perturbation> proposal;
    proposal.reserve(cfg.batch);
    const std::size_t count = net.params().size();
    for (std::size_t b = 0; b < cfg.batch; ++b) {
        const std::size_t index = uniform_index(prng, count);
        const double delta = uniform(prng, -cfg.proposal_scale, cfg.proposal_scale);
        proposal.push_back({index, delta});
    }
    return proposal;
}

void apply_proposal(network& net, std::span<const perturbation> proposal, double design_bound)
{
    auto params = net.params();
    for (const auto& p : proposal) params[p.index] = std::clamp(params[p.index] + p.delta, -design_bound, design_bound);
}

mc_outcome mc_step(const network& net, const training_set& set, const train_config& cfg, prng_t& prng)
{
    const double old_mse = loss(net, set).mse;
    auto proposal = draw_proposal(net, cfg, prng);
    network candidate = net;
    apply_proposal(candidate, proposal, cfg.design_bound);
    const double new_mse = loss(candidate, set).mse;
    if (new_mse <= old_mse) return {std::move(candidate), true, new_mse};
    return {net, false, old_mse};
}

namespace {

/// Cached forward state of every training sample, updated per proposal.
///
/// Layouts are chosen so a proposal touching hidden unit j or output k reads
/// contiguous memory: inputs are stored [i][p], pre-activations and
/// activations [j][p], outputs and targets [k][p].
class mc_evaluator {
public:
    mc_evaluator(network& net, const training_set& set)
      : net_{net}, m_{net.inputs()}, n_{net.hidden()}, l_{net.outputs()}, count_{set.size()}
    {
        x_.resize(m_ * count_);
        y_.resize(l_ * count_);
        for (std::size_t p = 0; p < count_; ++p) {
            for (std::size_t i = 0; i < m_; ++i) x_[i * count_ + p] = set.input(p)[i];
            for (std::size_t k = 0; k < l_; ++k) y_[k * count_ + p] = set.target(p)[k];
        }
        pre_.resize(n_ * count_);
        act_.resize(n_ * count_);
        out_.resize(l_ * count_);
        row_sse_.resize(l_);
        cand_row_sse_.resize(l_);
        cand_out_.resize(l_ * count_);
        row_touched_.assign(l_, false);
        unit_slot_.assign(n_, no_slot);
        resync();
    }

    /// Recompute every cache from the current parameters.
    void resync()
    {
        auto w = net_.w_in();
        auto bh = net_.b_hid();
        auto wo = net_.w_out();
        auto bo = net_.b_out();
        const auto kind = net_.transfer();
        for (std::size_t j = 0; j < n_; ++j) {
            double* pre = &pre_[j * count_];
            for (std::size_t p = 0; p < count_; ++p) pre[p] = bh[j];
            for (std::size_t i = 0; i < m_; ++i) {
                const double wji = w[j * m_ + i];
                const double* xi = &x_[i * count_];
                for (std::size_t p = 0; p < count_; ++p) pre[p] += wji * xi[p];
            }
            double* act = &act_[j * count_];
            for (std::size_t p = 0; p < count_; ++p) act[p] = transfer_unchecked(kind, pre[p]);
        }
        for (std::size_t k = 0; k < l_; ++k) {
            double* out = &out_[k * count_];
            for (std::size_t p = 0; p < count_; ++p) out[p] = bo[k];
            for (std::size_t j = 0; j < n_; ++j) {
                const double wkj = wo[k * n_ + j];
                const double* act = &act_[j * count_];
                for (std::size_t p = 0; p < count_; ++p) out[p] += wkj * act[p];
            }
            row_sse_[k] = row_sse(out, k);
        }
    }

    double mse() const { return sum_rows(row_sse_); }

    double max_err() const
    {
        double mx = 0.0;
        for (std::size_t q = 0; q < out_.size(); ++q) mx = std::max(mx, std::abs(out_[q] - y_[q]));
        return mx;
    }

    /// Apply `proposal` to the network and evaluate the candidate mse.
    /// Must be followed by commit() or revert().
    double propose(std::span<const perturbation> proposal, double design_bound)
    {
        auto params = net_.params();
        saved_.clear();
        for (const auto& pr : proposal) saved_.push_back({pr.index, params[pr.index]});
        apply_proposal(net_, proposal, design_bound);

        units_.clear();
        out_changes_.clear();
        std::fill(row_touched_.begin(), row_touched_.end(), false);

        // Net change of each touched parameter relative to the committed state;
        // saved_ holds first-seen originals so duplicates within a batch compose.
        for (std::size_t s = 0; s < saved_.size(); ++s) {
            const std::size_t idx = saved_[s].index;
            if (std::any_of(saved_.begin(), saved_.begin() + static_cast<std::ptrdiff_t>(s),
                            [idx](const saved_param& o) { return o.index == idx; }))
                continue;
            const double delta = params[idx] - saved_[s].value;
            if (idx < net_.b_hid_offset()) {
                const std::size_t j = idx / m_;
                const std::size_t i = idx % m_;
                double* pre = slot_pre(j);
                const double* xi = &x_[i * count_];
                for (std::size_t p = 0; p < count_; ++p) pre[p] += delta * xi[p];
            }
            else if (idx < net_.w_out_offset()) {
                double* pre = slot_pre(idx - net_.b_hid_offset());
                for (std::size_t p = 0; p < count_; ++p) pre[p] += delta;
            }
            else if (idx < net_.b_out_offset()) {
                const std::size_t rel = idx - net_.w_out_offset();
                out_changes_.push_back({rel / n_, rel % n_, delta, false});
                row_touched_[rel / n_] = true;
            }
            else {
                const std::size_t k = idx - net_.b_out_offset();
                out_changes_.push_back({k, 0, delta, true});
                row_touched_[k] = true;
            }
        }

        const auto kind = net_.transfer();
        for (std::size_t u = 0; u < units_.size(); ++u) {
            const double* pre = &unit_pre_[u * count_];
            double* act = &unit_act_[u * count_];
            for (std::size_t p = 0; p < count_; ++p) act[p] = transfer_unchecked(kind, pre[p]);
        }
        if (!units_.empty()) std::fill(row_touched_.begin(), row_touched_.end(), true);

        auto wo = net_.w_out();
        for (std::size_t k = 0; k < l_; ++k) {
            if (!row_touched_[k]) {
                cand_row_sse_[k] = row_sse_[k];
                continue;
            }
            double* cand = &cand_out_[k * count_];
            const double* out = &out_[k * count_];
            std::copy(out, out + count_, cand);
            for (std::size_t u = 0; u < units_.size(); ++u) {
                const std::size_t j = units_[u];
                const double wkj = wo[k * n_ + j];
                const double* act_new = &unit_act_[u * count_];
                const double* act_old = &act_[j * count_];
                for (std::size_t p = 0; p < count_; ++p) cand[p] += wkj * (act_new[p] - act_old[p]);
            }
            for (const auto& c : out_changes_) {
                if (c.row != k) continue;
                if (c.is_bias) {
                    for (std::size_t p = 0; p < count_; ++p) cand[p] += c.delta;
                }
                else {
                    const double* act_old = &act_[c.unit * count_];
                    for (std::size_t p = 0; p < count_; ++p) cand[p] += c.delta * act_old[p];
                }
            }
            cand_row_sse_[k] = row_sse(cand, k);
        }
        return sum_rows(cand_row_sse_);
    }

    void commit()
    {
        for (std::size_t u = 0; u < units_.size(); ++u) {
            const std::size_t j = units_[u];
            std::copy_n(&unit_pre_[u * count_], count_, &pre_[j * count_]);
            std::copy_n(&unit_act_[u * count_], count_, &act_[j * count_]);
            unit_slot_[j] = no_slot;
        }
        for (std::size_t k = 0; k < l_; ++k) {
            if (!row_touched_[k]) continue;
            std::copy_n(&cand_out_[k * count_], count_, &out_[k * count_]);
            row_sse_[k] = cand_row_sse_[k];
        }
    }

    void revert()
    {
        auto params = net_.params();
        for (auto it = saved_.rbegin(); it != saved_.rend(); ++it) params[it->index] = it->value;
        for (std::size_t j : units_) unit_slot_[j] = no_slot;
    }

private:
    static constexpr std::size_t no_slot = static_cast<std::size_t>(-1);

    struct saved_param {
        std::size_t index;
        double value;
    };
    struct out_change {
        std::size_t row;
        std::size_t unit;
        double delta;
        bool is_bias;
    };

    /// Candidate pre-activation buffer for hidden unit j, seeded from the cache.
    double* slot_pre(std::size_t j)
    {
        if (unit_slot_[j] == no_slot) {
            unit_slot_[j] = units_.size();
            units_.push_back(j);
            if (unit_pre_.size() < units_.size() * count_) {
                unit_pre_.resize(units_.size() * count_);
                unit_act_.resize(units_.size() * count_);
            }
            std::copy_n(&pre_[j * count_], count_, &unit_pre_[unit_slot_[j] * count_]);
        }
        return &unit_pre_[unit_slot_[j] * count_];
    }

    double row_sse(const double* out, std::size_t k) const
    {
        const double* y = &y_[k * count_];
        double s = 0.0;
        for (std::size_t p = 0; p < count_; ++p) {
            const double e = out[p] - y[p];
            s += e * e;
        }
        return s;
    }

    double sum_rows(const std::vector<double>& rows) const
    {
        double s = 0.0;
        for (double r : rows) s += r;
        return s / static_cast<double>(count_ * l_);
    }

    network& net_;
    std::size_t m_, n_, l_, count_;
    std::vector<double> x_, y_, pre_, act_, out_;
    std::vector<double> row_sse_, cand_row_sse_, cand_out_;
    std::vector<bool> row_touched_;
    std::vector<std::size_t> unit_slot_;
    std::vector<std::size_t> units_;
    std::vector<double> unit_pre_, unit_act_;
    std::vector<saved_param> saved_;
    std::vector<out_change> out_changes_;
};

}  // namespace

train_result train(const network& net, const training_set& set, const train_config& cfg)
{
    cfg.validate();
    set.validate();
    if (set.input_width != net.inputs() || set.target_width != net.outputs())
        throw shape_error{"train: training set widths do not match the network"};
    if (net.max_abs_param() > cfg.design_bound)
        throw domain_error{"train: initial network exceeds the design bound"};

    train_result result{net, {}};
    network& current = result.net;
    train_trace& trace = result.trace;
    mc_evaluator eval{current, set};

    auto take_snapshot = [&](std::size_t step) {
        eval.resync();
        auto lv = loss(current, set);
        trace.snapshots.push_back({step, lv.mse, lv.max_err, current});
    };

    double accepted_mse = eval.mse();
    if (accepted_mse <= cfg.target_loss) {
        trace.converged = true;
        take_snapshot(0);
        return result;
    }

    prng_t prng{cfg.seed};
    train_config step_cfg = cfg;
    const double decay = cfg.proposal_final > 0.0 && cfg.max_steps > 1
                           ? std::log(cfg.proposal_final / cfg.proposal_scale) / static_cast<double>(cfg.max_steps - 1)
                           : 0.0;
    std::size_t step = 0;
    while (step < cfg.max_steps) {
        if (decay != 0.0) step_cfg.proposal_scale = cfg.proposal_scale * std::exp(decay * static_cast<double>(step));
        ++step;
        auto proposal = draw_proposal(current, step_cfg, prng);
        const double candidate = eval.propose(proposal, cfg.design_bound);
        if (candidate <= accepted_mse) {
            eval.commit();
            accepted_mse = candidate;
            trace.accepted.push_back({step, candidate, eval.max_err()});
        }
        else {
            eval.revert();
        }
        if (accepted_mse <= cfg.target_loss) trace.converged = true;
        if (step % cfg.snapshot_every == 0 || trace.converged || step == cfg.max_steps) take_snapshot(step);
        if (trace.converged) break;
    }
    trace.steps_run = step;
    return result;
}

void write_trace(const std::filesystem::path& dir, const train_trace& trace)
{
    std::filesystem::create_directories(dir / "snapshots");
    std::ofstream out{dir / "trace.csv"};
    if (!out) throw error{"cannot write " + (dir / "trace.csv").string()};
    out << "mc_step,mse,max_err,snapshot_path\n";
    std::size_t a = 0;
    std::size_t s = 0;
    // Merge both record streams by step; a snapshot follows the accepted record of the same step.
    while (a < trace.accepted.size() || s < trace.snapshots.size()) {
        const bool take_accepted = s == trace.snapshots.size()
                                   || (a < trace.accepted.size() && trace.accepted[a].step <= trace.snapshots[s].step);
        if (take_accepted) {
            const auto& r = trace.accepted[a++];
            out << r.step << ',' << fmt_real(r.mse) << ',' << fmt_real(r.max_err) << ",\n";
        }
        else {
            const auto& r = trace.snapshots[s++];
            const std::string name = "snapshots/step_" + std::to_string(r.step) + ".model";
            save_network(dir / name, r.net);
            out << r.step << ',' << fmt_real(r.mse) << ',' << fmt_real(r.max_err) << ',' << name << '\n';
        }
    }
}

trajectory drop_transient(const trajectory& traj, double fraction)
{
    if (!(fraction >= 0.0 && fraction < 1.0)) throw domain_error{"transient fraction must be in [0, 1)"};
    const auto skip = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(traj.size())));
    trajectory out{traj.dim};
    out.times.assign(traj.times.begin() + static_cast<std::ptrdiff_t>(skip), traj.times.end());
    out.values.assign(traj.values.begin() + static_cast<std::ptrdiff_t>(skip * traj.dim), traj.values.end());
    return out;
}

std::vector<replay_row> replay_snapshots(const train_trace& trace,
                                         const machine_spec& spec,
                                         const initial_condition& init,
                                         const evolve_settings& settings,
                                         double transient_fraction)
{
    std::vector<replay_row> rows;
    rows.reserve(trace.snapshots.size());
    for (const auto& snap : trace.snapshots) {
        replay_row row{snap.step, {}, false, {}};
        try {
            machine mach{spec.kind, snap.net, spec.delay};
            row.traj = drop_transient(self_evolve(mach, init, settings), transient_fraction);
        }
        catch (const divergence_error& e) {
            row.diverged = true;
            row.message = e.what();
            row.traj = trajectory{};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace dyncopy

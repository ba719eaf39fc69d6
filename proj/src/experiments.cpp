#include "dyncopy/experiments.hpp"

#include "dyncopy/analysis.hpp"
#include "dyncopy/blackbox.hpp"
#include "dyncopy/csv.hpp"
#include "dyncopy/error.hpp"
#include "dyncopy/ingest.hpp"
#include "dyncopy/machines.hpp"
#include "dyncopy/random.hpp"
#include "dyncopy/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace dyncopy {

namespace {

namespace fs = std::filesystem;

// Sub-seed stream ids; each random component draws from its own stream.
enum stream : std::uint64_t {
    stream_sampling = 1,
    stream_init = 2,
    stream_chain = 3,
    stream_teacher = 10,
    stream_probes = 11,
    stream_student_init = 12,
    stream_student_chain = 13,
};

[[noreturn]] void invalid(const std::string& key, const std::string& why)
{
    throw format_error{"config: '" + key + "' " + why};
}

double positive(const json& j, const char* key, const std::string& where)
{
    const double v = j.at(key).get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) invalid(where + "." + key, "must be positive");
    return v;
}

std::size_t count_at_least(const json& j, const char* key, std::size_t min, const std::string& where)
{
    const auto v = j.at(key).get<long long>();
    if (v < static_cast<long long>(min)) invalid(where + "." + key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::vector<double> vec3(const json& j, const std::string& where)
{
    auto v = j.get<std::vector<double>>();
    if (v.size() != 3) invalid(where, "must have 3 entries");
    return v;
}

struct machine_block {
    std::size_t hidden;
    transfer_kind transfer;
    double init_bound;
};

machine_block parse_machine(const json& j, const std::string& where)
{
    machine_block m{count_at_least(j, "hidden", 1, where), transfer_kind::tanh, positive(j, "init_bound", where)};
    try {
        m.transfer = parse_transfer_kind(j.at("transfer").get<std::string>());
    }
    catch (const format_error& e) {
        invalid(where + ".transfer", e.what());
    }
    return m;
}

train_config parse_train(const json& j, std::uint64_t seed, const std::string& where)
{
    train_config cfg;
    cfg.design_bound = positive(j, "design_bound", where);
    cfg.proposal_scale = positive(j, "proposal_scale", where);
    cfg.proposal_final = j.at("proposal_final").get<double>();
    if (cfg.proposal_final < 0.0) invalid(where + ".proposal_final", "must be >= 0");
    cfg.max_steps = count_at_least(j, "max_steps", 0, where);
    cfg.target_loss = j.at("target_loss").get<double>();
    if (cfg.target_loss < 0.0) invalid(where + ".target_loss", "must be >= 0");
    cfg.snapshot_every = count_at_least(j, "snapshot_every", 1, where);
    cfg.batch = count_at_least(j, "batch", 1, where);
    cfg.seed = seed;
    return cfg;
}

scaling parse_scaling(const json& j, std::size_t dims, const std::string& where)
{
    scaling s;
    s.offset = j.at("offset").get<std::vector<double>>();
    if (s.offset.size() != 1 && s.offset.size() != dims) invalid(where + ".offset", "has the wrong number of entries");
    s.value_scale = positive(j, "value_scale", where);
    s.time_scale = positive(j, "time_scale", where);
    return s;
}

lorenz_params parse_lorenz(const json& j)
{
    return {j.at("sigma").get<double>(), j.at("r").get<double>(), j.at("b").get<double>()};
}

section_spec parse_section(const json& j)
{
    section_spec s;
    s.level = j.at("level").get<double>();
    s.lag = j.at("lag").get<double>();
    if (s.lag < 0.0) invalid("section.lag", "must be >= 0");
    s.tol_fraction = j.at("tol_fraction").get<double>();
    s.tol_floor = j.at("tol_floor").get<double>();
    s.min_cycles = count_at_least(j, "min_cycles", 1, "section");
    s.k_max = count_at_least(j, "k_max", 1, "section");
    return s;
}

void check_machine_bound(const machine_block& m, const train_config& t, const std::string& where)
{
    if (m.init_bound > t.design_bound) invalid(where + ".init_bound", "exceeds train.design_bound");
}

void write_json(const fs::path& path, const json& doc)
{
    std::ofstream out{path};
    if (!out) throw error{"cannot write " + path.string()};
    out << doc.dump(2) << '\n';
}

json loss_json(const loss_value& lv) { return {{"mse", lv.mse}, {"max_err", lv.max_err}}; }

json trace_json(const train_trace& trace)
{
    return {{"steps_run", trace.steps_run}, {"accepted", trace.accepted.size()}, {"converged", trace.converged}};
}

double nan_if_missing() { return std::numeric_limits<double>::quiet_NaN(); }

/// Horizon and other real metrics may be NaN; store those as null.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double median(std::vector<double> v)
{
    if (v.empty()) return nan_if_missing();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --- shared Lorenz time-series preparation (DDLM and history replay) ---

struct lorenz_series_job {
    lorenz_params params;
    std::vector<double> x0;
    double settle;
    double record_duration;
    double gap;
    std::size_t component;
    std::size_t taps;
    scaling units;
    machine_block mach;
    train_config train;
    double step;
};

lorenz_series_job parse_series_job(const json& cfg)
{
    lorenz_series_job job;
    job.params = parse_lorenz(cfg.at("lorenz"));
    job.x0 = vec3(cfg.at("x0"), "x0");
    job.settle = cfg.at("settle").get<double>();
    if (job.settle < 0.0) invalid("settle", "must be >= 0");
    const json& rec = cfg.at("record");
    job.record_duration = positive(rec, "duration", "record");
    job.gap = positive(rec, "gap", "record");
    job.component = count_at_least(rec, "component", 0, "record");
    if (job.component > 2) invalid("record.component", "must be 0, 1 or 2");
    job.taps = count_at_least(cfg, "taps", 1, "");
    job.units = parse_scaling(cfg.at("scaling"), 1, "scaling");
    job.mach = parse_machine(cfg.at("machine"), "machine");
    job.step = positive(cfg, "step", "");
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    job.train = parse_train(cfg.at("train"), derive_seed(seed, stream_chain), "train");
    check_machine_bound(job.mach, job.train, "machine");
    const double ratio = job.gap / job.step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || ratio < 1.0)
        invalid("record.gap", "must be an integer multiple of step");
    const auto records = static_cast<std::size_t>(std::llround(job.record_duration / job.gap)) + 1;
    if (records <= job.taps + 2) invalid("record.duration", "too short for the delay window");
    return job;
}

struct prepared_series {
    trajectory full;         ///< true 3-D trajectory from the settled start
    series fine;             ///< recorded component at the integration step over the training span
    embedding emb;           ///< delay embedding in scaled units
    network trained{1, 1, 1, transfer_kind::tanh};
    train_trace trace;
    series history_units;    ///< last taps*gap of the fine record, scaled
};

prepared_series prepare_series(const lorenz_series_job& job, double extra_duration, std::uint64_t seed)
{
    prepared_series out;
    const auto start = settle(job.params, job.x0, job.settle, job.step);
    const auto ratio = static_cast<std::size_t>(std::llround(job.gap / job.step));
    const auto records = static_cast<std::size_t>(std::llround(job.record_duration / job.gap));
    const double span = static_cast<double>(records * ratio) * job.step;
    out.full = integrate_ode(lorenz_field(job.params), start, 0.0, span + extra_duration, job.step);

    out.fine = series{0.0, job.step, {}};
    for (std::size_t i = 0; i <= records * ratio; ++i) out.fine.values.push_back(out.full.at(i, job.component));
    series coarse{0.0, job.gap, {}};
    for (std::size_t i = 0; i <= records; ++i) coarse.values.push_back(out.fine.values[i * ratio]);

    out.emb = delay_embed(job.units.to_unit(coarse), job.taps, embed_target::derivative);
    auto net = init_random(job.taps + 1, job.mach.hidden, 1, job.mach.transfer, job.mach.init_bound,
                           derive_seed(seed, stream_init));
    auto result = train(net, out.emb.set, job.train);
    out.trained = std::move(result.net);
    out.trace = std::move(result.trace);

    const std::size_t keep = job.taps * ratio + 1;
    series hist{out.fine.time(out.fine.size() - keep), job.step,
                {out.fine.values.end() - static_cast<std::ptrdiff_t>(keep), out.fine.values.end()}};
    out.history_units = job.units.to_unit(hist);
    return out;
}

trajectory shift_to_zero(trajectory traj)
{
    if (traj.empty()) return traj;
    const double t0 = traj.times.front();
    const double h = traj.size() > 1 ? (traj.times.back() - t0) / static_cast<double>(traj.size() - 1) : 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) traj.times[i] = static_cast<double>(i) * h;
    return traj;
}

/// Coordinate `coord` of rows [from, end) of a trajectory, as a 1-D trajectory with times from 0.
trajectory tail_component(const trajectory& traj, std::size_t from, std::size_t coord, double h)
{
    trajectory out{1};
    for (std::size_t i = from; i < traj.size(); ++i) {
        const double v = traj.at(i, coord);
        out.push(static_cast<double>(i - from) * h, std::span<const double>{&v, 1});
    }
    return out;
}

// --- copy-classifier ---

struct classifier_job {
    std::uint64_t seed;
    std::string source;
    std::string path, images, labels;
    std::size_t limit;
    probe_encoding encoding;
    machine_block teacher, student;
    train_config teacher_train, student_train;
    std::vector<std::size_t> probe_counts;
};

classifier_job parse_classifier(const json& cfg)
{
    classifier_job job;
    job.seed = cfg.at("seed").get<std::uint64_t>();
    const json& pat = cfg.at("patterns");
    job.source = pat.at("source").get<std::string>();
    if (job.source != "file" && job.source != "idx") invalid("patterns.source", "must be 'file' or 'idx'");
    job.path = pat.at("path").get<std::string>();
    job.images = pat.at("images").get<std::string>();
    job.labels = pat.at("labels").get<std::string>();
    if (job.source == "idx" && (job.images.empty() || job.labels.empty()))
        invalid("patterns", "idx source needs images and labels");
    job.limit = count_at_least(pat, "limit", 0, "patterns");
    const auto enc = cfg.at("encoding").get<std::string>();
    if (enc != "plus_minus" && enc != "zero_one") invalid("encoding", "must be 'plus_minus' or 'zero_one'");
    job.encoding = enc == "plus_minus" ? probe_encoding::plus_minus : probe_encoding::zero_one;

    job.teacher = parse_machine(json{{"hidden", cfg.at("teacher").at("hidden")},
                                     {"transfer", "tanh"},
                                     {"init_bound", cfg.at("teacher").at("init_bound")}},
                                "teacher");
    job.teacher_train = parse_train(cfg.at("teacher").at("train"), derive_seed(job.seed, stream_teacher), "teacher.train");
    check_machine_bound(job.teacher, job.teacher_train, "teacher");
    job.student = parse_machine(cfg.at("student"), "student");
    job.student_train =
      parse_train(cfg.at("student").at("train"), derive_seed(job.seed, stream_student_chain), "student.train");
    check_machine_bound(job.student, job.student_train, "student");

    const auto counts = cfg.at("probe_counts").get<std::vector<long long>>();
    if (counts.empty()) invalid("probe_counts", "must not be empty");
    for (auto c : counts) {
        if (c <= 0) invalid("probe_counts", "entries must be positive (a training set cannot be empty)");
        job.probe_counts.push_back(static_cast<std::size_t>(c));
    }
    return job;
}

json run_classifier(const json& cfg, const fs::path& out)
{
    const auto job = parse_classifier(cfg);
    labeled_patterns memories = job.source == "file" ? read_pattern_file(job.path)
                                                     : read_idx(job.images, job.labels, job.encoding);
    if (job.source == "file" && job.encoding == probe_encoding::zero_one)
        for (double& v : memories.pixels) v = v > 0 ? 1.0 : 0.0;
    if (job.limit > 0 && job.limit < memories.size()) {
        memories.labels.resize(job.limit);
        memories.pixels.resize(job.limit * memories.width);
    }
    constexpr std::size_t classes = 10;

    auto teacher = make_teacher(memories.width, job.teacher.hidden, classes, memories, job.teacher_train,
                                job.teacher.init_bound);
    save_network(out / "teacher.model", teacher.net);

    const std::size_t max_probes = *std::max_element(job.probe_counts.begin(), job.probe_counts.end());
    const auto probes = probe_random(teacher.net, max_probes, derive_seed(job.seed, stream_probes), job.encoding);
    const auto student0 = init_random(memories.width, job.student.hidden, classes, job.student.transfer,
                                      job.student.init_bound, derive_seed(job.seed, stream_student_init));

    std::ofstream csv{out / "recovery.csv"};
    csv << "probes,recovery_rate,mse,max_err\n";
    json rates = json::array();
    for (std::size_t count : job.probe_counts) {
        // probe sets are nested prefixes of one seeded stream
        training_set subset{probes.input_width, probes.target_width};
        subset.inputs.assign(probes.inputs.begin(), probes.inputs.begin() + static_cast<std::ptrdiff_t>(count * probes.input_width));
        subset.targets.assign(probes.targets.begin(),
                              probes.targets.begin() + static_cast<std::ptrdiff_t>(count * probes.target_width));
        auto result = train(student0, subset, job.student_train);
        const double rate = recovery_rate(result.net, teacher.net, memories);
        const auto lv = loss(result.net, subset);
        save_network(out / ("student_" + std::to_string(count) + ".model"), result.net);
        csv << count << ',' << fmt_real(rate) << ',' << fmt_real(lv.mse) << ',' << fmt_real(lv.max_err) << '\n';
        rates.push_back({{"probes", count}, {"recovery_rate", rate}, {"loss", loss_json(lv)},
                         {"train", trace_json(result.trace)}});
    }
    return {{"memories", memories.size()},
            {"teacher", {{"converged", teacher.converged},
                         {"steps", teacher.steps},
                         {"self_recognition", recognition_rate(teacher.net, memories)}}},
            {"recovery", rates}};
}

// --- copy-lorenz-dlm ---

json run_lorenz_dlm(const json& cfg, const fs::path& out)
{
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const auto params = parse_lorenz(cfg.at("lorenz"));
    const std::size_t samples = count_at_least(cfg, "samples", 1, "");
    const double interval = positive(cfg, "interval", "");
    const auto mode = cfg.at("target_mode").get<std::string>();
    if (mode != "chord_midpoint" && mode != "chord_start") invalid("target_mode", "must be chord_midpoint or chord_start");
    sampling_box box;
    const auto lo = vec3(cfg.at("box").at("lo"), "box.lo");
    const auto hi = vec3(cfg.at("box").at("hi"), "box.hi");
    for (std::size_t c = 0; c < 3; ++c) {
        if (!(lo[c] < hi[c])) invalid("box", "needs lo < hi");
        box.lo[c] = lo[c];
        box.hi[c] = hi[c];
    }
    const auto units = parse_scaling(cfg.at("scaling"), 3, "scaling");
    const auto mach = parse_machine(cfg.at("machine"), "machine");
    const auto tcfg = parse_train(cfg.at("train"), derive_seed(seed, stream_chain), "train");
    check_machine_bound(mach, tcfg, "machine");
    const double step = positive(cfg, "step", "");
    const json& ev = cfg.at("evolve");
    const auto x0 = vec3(ev.at("x0"), "evolve.x0");
    const double settle_time = ev.at("settle").get<double>();
    const double duration = positive(ev, "duration", "evolve");
    const double eps = positive(ev, "eps", "evolve");
    const double threshold = positive(ev, "max_err_threshold", "evolve");
    const std::size_t starts_count = count_at_least(ev, "horizon_starts", 1, "evolve");
    const double spacing = positive(ev, "horizon_spacing", "evolve");
    const double window = positive(ev, "horizon_window", "evolve");

    const std::size_t rounds = count_at_least(cfg, "correction_rounds", 0, "");

    const auto pairs = sample_flow_pairs(params, samples, interval, box, derive_seed(seed, stream_sampling),
                                         flow_target::flow_map, step);
    std::vector<double> starts, chords;  // scaled chord starts and data chord velocities
    training_set set{3, 3};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::vector<double> in(3), y(3);
        for (std::size_t c = 0; c < 3; ++c) {
            const double a = pairs.input(i)[c];
            const double b = pairs.target(i)[c];
            const double velocity = units.rate_to_unit((b - a) / interval);
            in[c] = units.to_unit(mode == "chord_midpoint" ? 0.5 * (a + b) : a, c);
            y[c] = velocity;
            starts.push_back(units.to_unit(a, c));
            chords.push_back(velocity);
        }
        set.add(in, y);
    }

    // Each round shifts every target by the gap between the data chord and the
    // machine's own chord over the same interval, removing the finite-difference bias.
    const double interval_units = interval / units.time_scale;
    const double step_units = step / units.time_scale;
    auto correct_targets = [&](const network& net) {
        const machine m{machine_kind::dlm, net};
        const vector_field f = [&m](double, std::span<const double> x, std::span<double> dx) {
            const auto v = dlm_rhs(m, x);
            std::copy(v.begin(), v.end(), dx.begin());
        };
        double shift = 0.0;
        for (std::size_t i = 0; i < set.size(); ++i) {
            const std::span<const double> u0{starts.data() + 3 * i, 3};
            const auto path = integrate_ode(f, {u0.begin(), u0.end()}, 0.0, interval_units, step_units);
            for (std::size_t c = 0; c < 3; ++c) {
                const double machine_chord = (path.at(path.size() - 1, c) - u0[c]) / interval_units;
                const double d = chords[3 * i + c] - machine_chord;
                set.targets[3 * i + c] += d;
                shift = std::max(shift, std::abs(d));
            }
        }
        return shift;
    };

    auto round_cfg = tcfg;
    round_cfg.max_steps = tcfg.max_steps / (rounds + 1);
    auto net0 = init_random(3, mach.hidden, 3, mach.transfer, mach.init_bound, derive_seed(seed, stream_init));
    auto result = train(net0, set, round_cfg);
    json corrections = json::array();
    for (std::size_t r = 1; r <= rounds; ++r) {
        const double shift = correct_targets(result.net);
        round_cfg.seed = derive_seed(tcfg.seed, r);
        result = train(result.net, set, round_cfg);
        corrections.push_back({{"round", r}, {"max_shift", shift}, {"mse", loss(result.net, set).mse}});
    }
    save_network(out / "model.bin", result.net);
    write_trace(out / "trace", result.trace);
    const auto lv = loss(result.net, set);
    const double max_err_physical = lv.max_err * units.value_scale / units.time_scale;

    const auto start = settle(params, x0, settle_time, step);
    const auto truth = integrate_ode(lorenz_field(params), start, 0.0, duration, step);
    write_trajectory_csv(out / "truth.csv", truth);
    write_projection_csv(out / "projection_truth_xz.csv", attractor_projection(truth, projection_mode::pair(0, 2)));

    json summary{{"loss", loss_json(lv)},
                 {"max_err_physical", max_err_physical},
                 {"max_err_below_threshold", lv.max_err <= threshold},
                 {"train", trace_json(result.trace)},
                 {"corrections", corrections}};
    const machine dlm{machine_kind::dlm, result.net};
    evolve_settings settings;
    settings.step = step / units.time_scale;
    settings.duration = duration / units.time_scale;
    try {
        const auto traj = units.from_unit(self_evolve(dlm, units.to_unit(start), settings));
        write_trajectory_csv(out / "machine.csv", traj);
        write_projection_csv(out / "projection_machine_xz.csv", attractor_projection(traj, projection_mode::pair(0, 2)));
        bool bounded = true;
        for (std::size_t c = 0; c < 3; ++c) {
            double tlo = truth.at(0, c), thi = tlo;
            for (std::size_t i = 0; i < truth.size(); ++i) {
                tlo = std::min(tlo, truth.at(i, c));
                thi = std::max(thi, truth.at(i, c));
            }
            const double mid = 0.5 * (tlo + thi);
            const double half = thi - tlo;  // twice the half-width
            for (std::size_t i = 0; i < traj.size() && bounded; ++i)
                bounded = std::abs(traj.at(i, c) - mid) <= half;
        }
        summary["diverged"] = false;
        summary["bounded_2x"] = bounded;
        summary["prediction_horizon"] = prediction_horizon(truth, traj, eps, 0);
    }
    catch (const divergence_error& e) {
        summary["diverged"] = true;
        summary["divergence"] = e.what();
        summary["bounded_2x"] = false;
        summary["prediction_horizon"] = nullptr;
    }

    // Horizons from further shared starts along the true orbit, so one
    // unlucky start (a near pass by the origin, say) does not decide alone.
    const auto far = integrate_ode(lorenz_field(params), start, 0.0,
                                   static_cast<double>(starts_count - 1) * spacing + window, step);
    const auto stride = static_cast<std::size_t>(std::llround(spacing / step));
    const auto span = static_cast<std::size_t>(std::llround(window / step));
    std::vector<double> horizons;
    settings.duration = window / units.time_scale;
    for (std::size_t k = 0; k < starts_count; ++k) {
        trajectory piece{3};
        for (std::size_t i = k * stride; i <= k * stride + span; ++i)
            piece.push(static_cast<double>(i - k * stride) * step, far.state(i));
        const auto s0 = piece.state(0);
        try {
            const auto traj = units.from_unit(self_evolve(dlm, units.to_unit(std::vector<double>(s0.begin(), s0.end())), settings));
            horizons.push_back(prediction_horizon(piece, traj, eps, 0));
        }
        catch (const divergence_error&) {
            horizons.push_back(0.0);  // a diverged copy counts as no horizon at all
        }
    }
    summary["horizons"] = horizons;
    summary["median_horizon"] = median(horizons);
    return summary;
}

// --- copy-lorenz-ddlm ---

json run_lorenz_ddlm(const json& cfg, const fs::path& out)
{
    const auto job = parse_series_job(cfg);
    const json& ev = cfg.at("evolve");
    const double duration = positive(ev, "duration", "evolve");
    const double eps = positive(ev, "eps", "evolve");
    const double lag = positive(ev, "lag", "evolve");

    auto prep = prepare_series(job, duration, cfg.at("seed").get<std::uint64_t>());
    save_network(out / "model.bin", prep.trained);
    write_trace(out / "trace", prep.trace);
    write_series_csv(out / "record.csv", prep.fine);
    const auto lv = loss(prep.trained, prep.emb.set);

    // truth: the recorded component continued past the training span
    const std::size_t from = prep.fine.size() - 1;
    const auto truth = tail_component(prep.full, from, job.component, job.step);
    const auto truth_all = tail_component(prep.full, 0, job.component, job.step);
    write_trajectory_csv(out / "truth.csv", truth);

    json summary{{"samples", prep.emb.set.size()},
                 {"loss", loss_json(lv)},
                 {"max_err_physical", lv.max_err * job.units.value_scale / job.units.time_scale},
                 {"train", trace_json(prep.trace)}};
    const machine ddlm{machine_kind::ddlm, prep.trained, prep.emb.delay};
    evolve_settings settings;
    settings.step = job.step / job.units.time_scale;
    settings.duration = duration / job.units.time_scale;
    try {
        const auto traj = shift_to_zero(job.units.from_unit(self_evolve(ddlm, prep.history_units, settings)));
        write_trajectory_csv(out / "machine.csv", traj);
        const auto mode = projection_mode::delay(lag);
        const auto machine_proj = attractor_projection(traj, mode);
        const auto truth_proj = attractor_projection(truth_all, mode);
        write_projection_csv(out / "projection_machine_delay.csv", machine_proj);
        write_projection_csv(out / "projection_truth_delay.csv", truth_proj);
        const auto box = bounding_box(truth_proj);
        const auto inside = std::count_if(machine_proj.begin(), machine_proj.end(), [&](const auto& p) { return box.contains(p); });
        summary["diverged"] = false;
        summary["prediction_horizon"] = prediction_horizon(truth, traj, eps, 0);
        summary["projection_inside_fraction"] = static_cast<double>(inside) / static_cast<double>(machine_proj.size());
        summary["projection_points"] = machine_proj.size();
    }
    catch (const divergence_error& e) {
        summary["diverged"] = true;
        summary["divergence"] = e.what();
        summary["prediction_horizon"] = nullptr;
        summary["projection_inside_fraction"] = 0.0;
    }
    return summary;
}

// --- history-replay ---

json rows_json(const std::vector<bifurcation_row>& rows)
{
    json arr = json::array();
    for (const auto& r : rows) arr.push_back({{"key", r.key}, {"class", r.cls.label()}, {"points", r.values.size()}});
    return arr;
}

json run_history(const json& cfg, const fs::path& out)
{
    const auto job = parse_series_job(cfg);
    const json& rp = cfg.at("replay");
    const double duration = positive(rp, "duration", "replay");
    const double transient = rp.at("transient_fraction").get<double>();
    if (!(transient >= 0.0 && transient < 1.0)) invalid("replay.transient_fraction", "must be in [0, 1)");
    auto section = parse_section(cfg.at("section"));
    const json& sw = cfg.at("sweep");
    const auto sweep_values = sw.at("values").get<std::vector<double>>();
    sweep_settings sweep;
    sweep.x0 = job.x0;
    sweep.duration = positive(sw, "duration", "sweep");
    sweep.step = job.step;
    sweep.transient_fraction = 0.5;

    auto prep = prepare_series(job, 0.0, cfg.at("seed").get<std::uint64_t>());
    save_network(out / "model.bin", prep.trained);
    write_trace(out / "trace", prep.trace);
    write_series_csv(out / "record.csv", prep.fine);

    evolve_settings settings;
    settings.step = job.step / job.units.time_scale;
    settings.duration = duration / job.units.time_scale;
    const machine_spec spec{machine_kind::ddlm, prep.emb.delay};
    const scaling units = job.units;
    auto rows = bifurcation_over_training(prep.trace, spec, prep.history_units, settings, section, transient,
                                          [&units](const trajectory& t) { return units.from_unit(t); });
    write_bifurcation_csv(out / "bifurcation_training.csv", rows);
    write_bifurcation_classes(out / "bifurcation_training_classes.csv", rows);

    auto truth_rows = bifurcation_sweep(job.params, lorenz_axis::b, sweep_values, section, sweep);
    write_bifurcation_csv(out / "bifurcation_sweep.csv", truth_rows);
    write_bifurcation_classes(out / "bifurcation_sweep_classes.csv", truth_rows);

    // periodic (k <= 4) snapshot followed by a later chaotic one
    double first_periodic = nan_if_missing();
    double later_chaotic = nan_if_missing();
    for (const auto& r : rows) {
        if (std::isnan(first_periodic) && r.cls.kind == period_class::periodic && r.cls.period <= 4) first_periodic = r.key;
        else if (!std::isnan(first_periodic) && r.cls.kind == period_class::chaotic) later_chaotic = r.key;
    }
    return {{"loss", loss_json(loss(prep.trained, prep.emb.set))},
            {"train", trace_json(prep.trace)},
            {"snapshots", rows_json(rows)},
            {"sweep", rows_json(truth_rows)},
            {"first_periodic_step", real(first_periodic)},
            {"later_chaotic_step", real(later_chaotic)},
            {"periodic_then_chaotic", !std::isnan(first_periodic) && !std::isnan(later_chaotic)}};
}

// --- copy-series ---

json run_series(const json& cfg, const fs::path& out)
{
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const auto path = cfg.at("lightcurve").at("path").get<std::string>();
    const double bin_days = positive(cfg, "bin_days", "");
    const std::size_t taps = count_at_least(cfg, "taps", 1, "");
    const double train_fraction = cfg.at("train_fraction").get<double>();
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) invalid("train_fraction", "must be in (0, 1]");
    const auto mach = parse_machine(cfg.at("machine"), "machine");
    const auto tcfg = parse_train(cfg.at("train"), derive_seed(seed, stream_chain), "train");
    check_machine_bound(mach, tcfg, "machine");
    const std::size_t predict = count_at_least(cfg, "predict_records", 1, "");
    const json& rp = cfg.at("replay");
    const std::size_t replay_records = count_at_least(rp, "records", 2, "replay");
    const double transient = rp.at("transient_fraction").get<double>();
    if (!(transient >= 0.0 && transient < 1.0)) invalid("replay.transient_fraction", "must be in [0, 1)");
    const auto section = parse_section(cfg.at("section"));

    const auto curve = read_lightcurve(path);
    const series smoothed = smooth_bin(curve, bin_days);
    write_series_csv(out / "smoothed.csv", smoothed);
    const auto train_len = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(smoothed.size())));
    if (train_len <= taps + 1) throw shape_error{"copy-series: light curve too short for " + std::to_string(taps) + " taps"};

    // normalized units: zero mean, unit half-range, one record per time unit
    const auto [lo, hi] = std::minmax_element(smoothed.values.begin(), smoothed.values.begin() + static_cast<std::ptrdiff_t>(train_len));
    const double mean = std::accumulate(smoothed.values.begin(), smoothed.values.begin() + static_cast<std::ptrdiff_t>(train_len), 0.0)
                        / static_cast<double>(train_len);
    const scaling units{{mean}, std::max(0.5 * (*hi - *lo), 1e-12), bin_days};
    series train_units = units.to_unit(smoothed);
    train_units.values.resize(train_len);

    const auto emb = delay_embed(train_units, taps, embed_target::next_value);
    auto net0 = init_random(taps + 1, mach.hidden, 1, mach.transfer, mach.init_bound, derive_seed(seed, stream_init));
    auto result = train(net0, emb.set, tcfg);
    save_network(out / "model.bin", result.net);
    write_trace(out / "trace", result.trace);

    const machine dilm{machine_kind::dilm, result.net, emb.delay};
    evolve_settings settings;
    settings.iterations = predict;
    json summary{{"records", smoothed.size()},
                 {"train_records", train_len},
                 {"samples", emb.set.size()},
                 {"loss", loss_json(loss(result.net, emb.set))},
                 {"train", trace_json(result.trace)}};
    try {
        const auto pred = units.from_unit(self_evolve(dilm, train_units, settings));
        write_trajectory_csv(out / "predicted.csv", pred);
        double sse = 0.0;
        std::size_t overlap = 0;
        for (std::size_t i = 1; i < pred.size() && train_len - 1 + i < smoothed.size(); ++i, ++overlap) {
            const double e = pred.at(i, 0) - smoothed.values[train_len - 1 + i];
            sse += e * e;
        }
        summary["predicted_records"] = pred.size() - 1;
        summary["prediction_rmse"] = overlap ? real(std::sqrt(sse / static_cast<double>(overlap))) : json(nullptr);
        summary["prediction_overlap"] = overlap;
        summary["diverged"] = false;
    }
    catch (const divergence_error& e) {
        summary["diverged"] = true;
        summary["divergence"] = e.what();
    }

    evolve_settings replay;
    replay.iterations = replay_records;
    auto rows = bifurcation_over_training(result.trace, {machine_kind::dilm, emb.delay}, train_units, replay, section, transient);
    write_bifurcation_csv(out / "bifurcation_training.csv", rows);
    write_bifurcation_classes(out / "bifurcation_training_classes.csv", rows);
    summary["snapshots"] = rows_json(rows);
    return summary;
}

}  // namespace

void validate_experiment(const json& cfg)
{
    const auto name = cfg.at("experiment").get<std::string>();
    if (name == "copy-classifier") parse_classifier(cfg);
    else if (name == "copy-lorenz-ddlm" || name == "history-replay") parse_series_job(cfg);
    else if (name == "copy-lorenz-dlm" || name == "copy-series") {
        // these validate inline before computing; a dry parse of the shared blocks suffices here
        const std::string where = "machine";
        auto m = parse_machine(cfg.at("machine"), where);
        auto t = parse_train(cfg.at("train"), 0, "train");
        check_machine_bound(m, t, where);
    }
    else throw format_error{"unknown experiment '" + name + "'"};
}

json run_experiment(const json& cfg, const fs::path& out)
{
    fs::create_directories(out);
    write_json(out / "effective_config.json", cfg);
    const auto name = cfg.at("experiment").get<std::string>();
    json summary;
    try {
        validate_experiment(cfg);
        if (name == "copy-classifier") summary = run_classifier(cfg, out);
        else if (name == "copy-lorenz-dlm") summary = run_lorenz_dlm(cfg, out);
        else if (name == "copy-lorenz-ddlm") summary = run_lorenz_ddlm(cfg, out);
        else if (name == "history-replay") summary = run_history(cfg, out);
        else summary = run_series(cfg, out);
    }
    catch (const std::exception& e) {
        write_json(out / "summary.json", {{"experiment", name}, {"status", "failed"}, {"error", e.what()}});
        throw;
    }
    summary["experiment"] = name;
    summary["status"] = "ok";
    write_json(out / "summary.json", summary);
    return summary;
}

}  // namespace dyncopy

// Acceptance suite: one PASS/FAIL line per criterion. Criteria 5-8 run the
// shipped experiments at their default configuration and read their summaries.

#include "dyncopy/analysis.hpp"
#include "dyncopy/blackbox.hpp"
#include "dyncopy/config.hpp"
#include "dyncopy/experiments.hpp"
#include "dyncopy/ingest.hpp"
#include "dyncopy/integrate.hpp"
#include "dyncopy/random.hpp"
#include "dyncopy/trainer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace dyncopy;
namespace fs = std::filesystem;

namespace {

struct outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Run an experiment with its default configuration plus `overrides`.
json run_default(const std::string& name, const fs::path& out, const json& overrides = json::object())
{
    json user = overrides;
    user["experiment"] = name;
    return run_experiment(resolve_config(user, "."), out);
}

// 1. rk4 order on dz/dt = -z between h = 1e-2 and 5e-3
outcome integrator_order()
{
    const auto t0 = std::chrono::steady_clock::now();
    const vector_field decay = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
    const auto err = [&](double h) {
        const auto traj = integrate_ode(decay, std::vector<double>{1.0}, 0.0, 1.0, h);
        return std::abs(traj.at(traj.size() - 1, 0) - std::exp(-1.0));
    };
    const double order = std::log2(err(1e-2) / err(5e-3));
    const double secs = seconds_since(t0);
    return {order >= 3.8 && order <= 4.2 && secs < 1.0, "order " + fmt(order) + ", " + fmt(secs) + " s"};
}

// 2. dz/dt = -z(t-1), history 1, against the method-of-steps solution on [0, 2]
outcome dde_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    const window_field rhs = [](double, std::span<const double> w) { return -w[1]; };
    const auto traj = integrate_dde(rhs, series{-1.0, 1e-3, std::vector<double>(1001, 1.0)}, 2.0, 1e-3, {1, 1.0});
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        const double exact = t <= 1.0 ? 1.0 - t : 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0);
        worst = std::max(worst, std::abs(traj.at(i, 0) - exact));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-6 && secs < 1.0, "max error " + fmt(worst) + ", " + fmt(secs) + " s"};
}

// 3. Lorenz endpoint over t = 0.05 against a half-step run
outcome lorenz_fidelity()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto field = lorenz_field({});
    const std::vector<double> x0{1.0, 1.0, 1.0};
    const auto a = integrate_ode(field, x0, 0.0, 0.05, 1e-3);
    const auto b = integrate_ode(field, x0, 0.0, 0.05, 5e-4);
    double worst = 0.0;
    for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a.at(a.size() - 1, c) - b.at(b.size() - 1, c)));
    const double secs = seconds_since(t0);
    return {worst < 1e-8 && secs < 1.0, "max component gap " + fmt(worst) + ", " + fmt(secs) + " s"};
}

// 4. monotone accepted loss, bound containment and bit-identical reruns on a 2-20-2 net
outcome trainer_contracts()
{
    const auto t0 = std::chrono::steady_clock::now();
    prng_t prng{4};
    training_set set{2, 2};
    for (int p = 0; p < 20; ++p) {
        const std::vector<double> x{uniform(prng, -1.0, 1.0), uniform(prng, -1.0, 1.0)};
        const std::vector<double> y{std::sin(2.0 * x[0]) * 0.5, x[0] * x[1]};
        set.add(x, y);
    }
    const auto net = init_random(2, 20, 2, transfer_kind::tanh, 0.5, 5);
    train_config cfg;
    cfg.max_steps = 50000;
    cfg.snapshot_every = 5000;
    cfg.seed = 6;
    const auto a = train(net, set, cfg);
    const auto b = train(net, set, cfg);

    bool monotone = true;
    double prev = loss(net, set).mse;
    for (const auto& r : a.trace.accepted) {
        monotone = monotone && r.mse <= prev;
        prev = r.mse;
    }
    bool bounded = a.net.max_abs_param() <= cfg.design_bound;
    for (const auto& s : a.trace.snapshots) bounded = bounded && s.net.max_abs_param() <= cfg.design_bound;
    bool identical = a.net == b.net && a.trace.accepted.size() == b.trace.accepted.size();
    for (std::size_t i = 0; identical && i < a.trace.accepted.size(); ++i)
        identical = a.trace.accepted[i].step == b.trace.accepted[i].step && a.trace.accepted[i].mse == b.trace.accepted[i].mse;
    const double secs = seconds_since(t0);
    return {monotone && bounded && identical && secs < 30.0,
            std::string{"monotone "} + (monotone ? "yes" : "no") + ", bounded " + (bounded ? "yes" : "no") +
                ", identical " + (identical ? "yes" : "no") + ", " + fmt(secs) + " s"};
}

// 5. classifier copy: recovery >= 0.90 at the largest probe count, non-decreasing within 0.05
outcome classifier_copy(const fs::path& out)
{
    const auto s = run_default("copy-classifier", out);
    const double self = s.at("teacher").at("self_recognition").get<double>();
    const auto& rec = s.at("recovery");
    bool trend = true;
    std::string rates;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double r = rec[i].at("recovery_rate").get<double>();
        if (i > 0) trend = trend && r >= rec[i - 1].at("recovery_rate").get<double>() - 0.05;
        rates += (i ? " " : "") + std::to_string(rec[i].at("probes").get<int>()) + ":" + fmt(r);
    }
    const double last = rec.back().at("recovery_rate").get<double>();
    return {self == 1.0 && last >= 0.90 && trend,
            "teacher self-recognition " + fmt(self) + ", rates " + rates + ", trend " + (trend ? "ok" : "broken")};
}

// 6. DLM copy: max_err below threshold, bounded within 2x the attractor box, horizon >= 2.0
outcome dlm_copy(const fs::path& out)
{
    const auto s = run_default("copy-lorenz-dlm", out);
    const bool below = s.at("max_err_below_threshold").get<bool>();
    const bool bounded = s.at("bounded_2x").get<bool>();
    const double horizon = s.at("prediction_horizon").is_number() ? s.at("prediction_horizon").get<double>() : 0.0;
    const double median = s.at("median_horizon").get<double>();
    return {below && bounded && horizon >= 2.0,
            std::string{"max_err below threshold "} + (below ? "yes" : "no") + ", bounded " + (bounded ? "yes" : "no") +
                ", horizon " + fmt(horizon) + " (median over starts " + fmt(median) + ")"};
}

// 7. DDLM copy: 4k-5k samples, horizon >= 1.0, >= 95% of the delayed projection inside the true box
outcome ddlm_copy(const fs::path& out)
{
    const auto s = run_default("copy-lorenz-ddlm", out);
    const auto samples = s.at("samples").get<std::size_t>();
    const double horizon = s.at("prediction_horizon").is_number() ? s.at("prediction_horizon").get<double>() : 0.0;
    const double inside = s.at("projection_inside_fraction").get<double>();
    return {samples >= 4000 && samples <= 5000 && horizon >= 1.0 && inside >= 0.95,
            std::to_string(samples) + " samples, horizon " + fmt(horizon) + ", projection inside " + fmt(inside)};
}

// 8. history replay: a period-k (k <= 4) snapshot followed by a chaotic one
outcome history_replay(const fs::path& out)
{
    const auto s = run_default("history-replay", out);
    const bool ok = s.at("periodic_then_chaotic").get<bool>();
    std::string detail = "first periodic step ";
    detail += s.at("first_periodic_step").is_null() ? "none" : fmt(s.at("first_periodic_step").get<double>());
    detail += ", later chaotic step ";
    detail += s.at("later_chaotic_step").is_null() ? "none" : fmt(s.at("later_chaotic_step").get<double>());
    return {ok, detail};
}

// 9. period detector on 200 noisy k-cycles and on a chaotic Lorenz section
outcome period_detector()
{
    const auto t0 = std::chrono::steady_clock::now();
    const period_options opts;
    prng_t prng{9};
    int correct = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + trial % 4;
        std::vector<double> c;
        while (static_cast<int>(c.size()) < k) {
            const double v = uniform(prng, 0.0, 10.0);
            bool apart = true;
            for (double o : c) apart = apart && std::abs(o - v) >= 4.0 * opts.tol;
            if (apart) c.push_back(v);
        }
        std::vector<double> v;
        for (int i = 0; i < 64; ++i) v.push_back(c[i % k] + uniform(prng, -0.49, 0.49) * opts.tol);
        if (detect_period(v, opts) == period_class{period_class::periodic, k}) ++correct;
    }
    const lorenz_params p;
    const auto start = settle(p, std::vector<double>{1.0, 1.0, 1.0}, 50.0);
    const auto traj = integrate_ode(lorenz_field(p), start, 0.0, 200.0, 1e-3);
    const auto cls = classify_section(section_values(poincare_section(traj, 0, 5.0, 0.1)), {});
    const double secs = seconds_since(t0);
    const bool lorenz_ok = cls.kind != period_class::periodic && cls.kind != period_class::insufficient;
    return {correct == 200 && lorenz_ok && secs < 1.0,
            std::to_string(correct) + "/200 cycles, Lorenz section " + cls.label() + ", " + fmt(secs) + " s"};
}

// 10. IDX bytes, smoothing examples and byte-identical reruns from the effective config
outcome ingestion(const fs::path& out)
{
    fs::create_directories(out);
    const std::vector<unsigned char> images{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 128, 255, 7, 1, 2, 3, 4};
    const std::vector<unsigned char> labels{0, 0, 8, 1, 0, 0, 0, 2, 5, 9};
    const auto put = [](const fs::path& p, const std::vector<unsigned char>& b) {
        std::ofstream f{p, std::ios::binary};
        f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    };
    put(out / "images.idx", images);
    put(out / "labels.idx", labels);
    const auto raw = read_idx_raw(out / "images.idx", out / "labels.idx");
    const bool idx_ok = raw.count() == 2 && raw.rows == 2 && raw.cols == 2 &&
                        raw.pixels == std::vector<std::uint8_t>{0, 128, 255, 7, 1, 2, 3, 4} &&
                        raw.labels == std::vector<std::uint8_t>{5, 9};

    const auto mean = smooth_bin({{0, 4}, {1, 3}}, 10.0);
    const auto fill = smooth_bin({{0, 25}, {1, 3}}, 10.0);
    const bool smooth_ok = mean.size() == 1 && mean.values[0] == 2.0 && fill.size() == 3 && fill.values[1] == 2.0;

    const json user{{"experiment", "copy-lorenz-dlm"},
                    {"samples", 30},
                    {"correction_rounds", 1},
                    {"train", {{"max_steps", 5000}, {"snapshot_every", 1000}}},
                    {"evolve", {{"duration", 2.0}, {"horizon_starts", 2}, {"horizon_window", 1.0}}}};
    run_experiment(resolve_config(user, out), out / "first");
    run_experiment(load_config(out / "first" / "effective_config.json"), out / "second");
    bool same = true;
    for (const auto& entry : fs::recursive_directory_iterator(out / "first")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), out / "first");
        same = same && slurp(entry.path()) == slurp(out / "second" / rel);
    }
    return {idx_ok && smooth_ok && same, std::string{"idx "} + (idx_ok ? "ok" : "mismatch") + ", smoothing " +
                                             (smooth_ok ? "ok" : "mismatch") + ", rerun " +
                                             (same ? "byte-identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dyncopy acceptance suite"};
    fs::path out_dir = "acceptance_out";
    std::vector<int> only;
    app.add_option("--out-dir", out_dir, "directory for experiment outputs");
    app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria{
        {"integrator order", integrator_order},
        {"dde oracle", dde_oracle},
        {"lorenz flow fidelity", lorenz_fidelity},
        {"trainer contracts", trainer_contracts},
        {"classifier copy", [&] { return classifier_copy(out_dir / "classifier"); }},
        {"lorenz dlm copy", [&] { return dlm_copy(out_dir / "lorenz_dlm"); }},
        {"lorenz ddlm copy", [&] { return ddlm_copy(out_dir / "lorenz_ddlm"); }},
        {"history replay", [&] { return history_replay(out_dir / "history"); }},
        {"period detector", period_detector},
        {"ingestion", [&] { return ingestion(out_dir / "ingestion"); }},
    };
    const std::set<int> wanted(only.begin(), only.end());
    fs::create_directories(out_dir);
    std::ofstream results{out_dir / "results.txt"};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.count(n)) continue;
        outcome o;
        try {
            o = criteria[i].second();
        }
        catch (const std::exception& e) {
            o = {false, std::string{"error: "} + e.what()};
        }
        if (!o.pass) ++failures;
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << criteria[i].first << "): " << o.detail;
        std::cout << line.str() << std::endl;
        results << line.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

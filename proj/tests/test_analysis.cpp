#include <doctest.h>

#include "dyncopy/analysis.hpp"
#include "dyncopy/blackbox.hpp"
#include "dyncopy/error.hpp"
#include "dyncopy/random.hpp"

#include <cmath>
#include <numbers>

using namespace dyncopy;

namespace {

trajectory sampled(double t0, double t1, double h, double (*f)(double))
{
    trajectory traj{1};
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / h + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        const double v = f(t);
        traj.push(t, std::span<const double>{&v, 1});
    }
    return traj;
}

trajectory constant(double value, std::size_t n, double h)
{
    trajectory traj{1};
    for (std::size_t i = 0; i < n; ++i) traj.push(static_cast<double>(i) * h, std::span<const double>{&value, 1});
    return traj;
}

/// k cluster centres in [0, 10] at least `sep` apart.
std::vector<double> centres(prng_t& prng, int k, double sep)
{
    std::vector<double> c;
    while (static_cast<int>(c.size()) < k) {
        const double v = uniform(prng, 0.0, 10.0);
        bool ok = true;
        for (double o : c) ok = ok && std::abs(o - v) >= sep;
        if (ok) c.push_back(v);
    }
    return c;
}

trajectory lorenz_attractor(const lorenz_params& p, double duration)
{
    const auto start = settle(p, std::vector<double>{1.0, 1.0, 1.0}, 50.0);
    return integrate_ode(lorenz_field(p), start, 0.0, duration, 1e-3);
}

}  // namespace

TEST_CASE("section of a monotone trajectory that never reaches the level")
{
    const auto traj = sampled(0.0, 1.0, 1e-3, [](double t) { return t; });
    CHECK(poincare_section(traj, 0, 5.0, 0.0).empty());
    CHECK(poincare_section(trajectory{1}, 0, 0.0, 0.0).empty());
}

TEST_CASE("section of a sine")
{
    const auto traj = sampled(0.0, 4.0 * std::numbers::pi + 0.5, 1e-3, [](double t) { return std::sin(t); });
    SUBCASE("crossing times")
    {
        const auto pts = poincare_section(traj, 0, 0.0, 0.0, crossing::up);
        REQUIRE(pts.size() == 3);
        CHECK(std::abs(pts[0].t_c) < 1e-4);
        CHECK(std::abs(pts[1].t_c - 2.0 * std::numbers::pi) < 1e-4);
        CHECK(std::abs(pts[2].t_c - 4.0 * std::numbers::pi) < 1e-4);
    }
    SUBCASE("delayed values")
    {
        const auto pts = poincare_section(traj, 0, 0.0, std::numbers::pi / 2.0, crossing::up);
        REQUIRE(pts.size() == 2);
        for (const auto& p : pts) CHECK(std::abs(p.value + 1.0) < 1e-4);
    }
    SUBCASE("down and both")
    {
        CHECK(poincare_section(traj, 0, 0.0, 0.0, crossing::down).size() == 2);
        CHECK(poincare_section(traj, 0, 0.0, 0.0, crossing::both).size() == 5);
    }
}

TEST_CASE("section crossings bracket the level and interpolate onto it")
{
    const auto traj = lorenz_attractor({}, 20.0);
    const auto pts = poincare_section(traj, 0, 5.0, 0.0, crossing::up);
    REQUIRE(!pts.empty());
    const double h = 1e-3;
    for (const auto& p : pts) {
        const auto i = static_cast<std::size_t>(std::floor(p.t_c / h + 1e-9));
        REQUIRE(i + 1 < traj.size());
        CHECK(traj.at(i, 0) <= 5.0);
        CHECK(traj.at(i + 1, 0) > 5.0);
        // with lag 0 the delayed value is the interpolated coordinate itself
        CHECK(std::abs(p.value - 5.0) < 1e-9);
    }
}

TEST_CASE("detect_period basics")
{
    const period_options opts;
    CHECK(detect_period(std::vector<double>(20, 3.0), opts) == period_class{period_class::periodic, 1});
    std::vector<double> alt;
    for (int i = 0; i < 20; ++i) alt.push_back(i % 2 ? 1.0 : 2.0);
    CHECK(detect_period(alt, opts) == period_class{period_class::periodic, 2});
    CHECK(detect_period(std::vector<double>(15, 3.0), opts).kind == period_class::insufficient);
    CHECK(detect_period({}, opts).kind == period_class::insufficient);
}

TEST_CASE("detect_period recovers noisy k-cycles")
{
    prng_t prng{2024};
    const period_options opts;  // tol 0.05
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + trial % 4;
        const auto c = centres(prng, k, 4.0 * opts.tol);
        std::vector<double> v;
        for (int i = 0; i < 64; ++i) v.push_back(c[i % k] + uniform(prng, -0.49, 0.49) * opts.tol);
        CHECK(detect_period(v, opts) == period_class{period_class::periodic, k});
    }
}

TEST_CASE("labels")
{
    CHECK(period_class{period_class::periodic, 3}.label() == "period-3");
    CHECK(period_class{period_class::chaotic, 0}.label() == "chaotic");
    CHECK(period_class{period_class::quasiperiodic, 0}.label() == "quasiperiodic");
    CHECK(period_class{period_class::diverged, 0}.label() == "diverged");
    CHECK(period_class{period_class::insufficient, 0}.label() == "insufficient");
}

TEST_CASE("classic lorenz section is chaotic")
{
    const auto traj = lorenz_attractor({}, 200.0);
    const auto values = section_values(poincare_section(traj, 0, 5.0, 0.1));
    REQUIRE(values.size() >= 16);
    CHECK(classify_section(values, {}).kind == period_class::chaotic);
}

TEST_CASE("quasiperiodic circle-map sections")
{
    // irrational rotation fills an interval densely
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back(std::sin(2.0 * std::numbers::pi * std::fmod(i * 0.6180339887498949, 1.0)));
    CHECK(classify_section(v, {}).kind == period_class::quasiperiodic);
}

TEST_CASE("prediction horizon")
{
    const auto a = constant(0.0, 100, 0.01);
    const auto b = constant(2.0, 100, 0.01);
    CHECK(prediction_horizon(a, a, 1.0) == doctest::Approx(0.99));
    CHECK(prediction_horizon(a, b, 1.0) == 0.0);

    trajectory shifted{1};
    for (std::size_t i = 0; i < 100; ++i) {
        const double v = i < 40 ? 0.0 : 5.0;
        shifted.push(a.times[i], std::span<const double>{&v, 1});
    }
    CHECK(prediction_horizon(a, shifted, 1.0) == doctest::Approx(0.40));
    CHECK(prediction_horizon(shifted, a, 1.0) == prediction_horizon(a, shifted, 1.0));

    CHECK_THROWS_AS(prediction_horizon(a, constant(0.0, 100, 0.02), 1.0), shape_error);
    CHECK_THROWS_AS(prediction_horizon(a, trajectory{1}, 1.0), shape_error);
}

TEST_CASE("prediction horizon symmetry on random pairs")
{
    prng_t prng{7};
    for (int trial = 0; trial < 50; ++trial) {
        trajectory a{1}, b{1};
        for (int i = 0; i < 200; ++i) {
            const double x = uniform(prng, -1, 1), y = uniform(prng, -1, 1);
            a.push(i * 0.1, std::span<const double>{&x, 1});
            b.push(i * 0.1, std::span<const double>{&y, 1});
        }
        CHECK(prediction_horizon(a, b, 1.5) == prediction_horizon(b, a, 1.5));
    }
}

TEST_CASE("lorenz at R=28 against R=28.02")
{
    lorenz_params q;
    q.r = 28.02;
    const auto start = settle({}, std::vector<double>{1.0, 1.0, 1.0}, 20.0);
    const auto a = integrate_ode(lorenz_field({}), start, 0.0, 40.0, 1e-3);
    const auto b = integrate_ode(lorenz_field(q), start, 0.0, 40.0, 1e-3);
    double lo = a.at(0, 0), hi = lo;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lo = std::min(lo, a.at(i, 0));
        hi = std::max(hi, a.at(i, 0));
    }
    const double h = prediction_horizon(a, b, 0.1 * (hi - lo));
    CHECK(h > 1.0);
    CHECK(h < 40.0);
}

TEST_CASE("attractor projections")
{
    const auto traj = lorenz_attractor({}, 2.0);
    const auto xz = attractor_projection(traj, projection_mode::pair(0, 2));
    REQUIRE(xz.size() == traj.size());
    CHECK(xz[5].first == traj.at(5, 0));
    CHECK(xz[5].second == traj.at(5, 2));

    const auto flat = constant(3.0, 500, 1e-3);
    const auto diag = attractor_projection(flat, projection_mode::delay(0.1));
    CHECK(diag.size() == 400);
    for (const auto& p : diag) CHECK(p.first == p.second);

    const auto delayed = attractor_projection(traj, projection_mode::delay(0.1));
    CHECK(delayed.size() == traj.size() - 100);
    for (const auto& p : delayed) CHECK((std::isfinite(p.first) && std::isfinite(p.second)));
    // first point pairs x(t - 0.1) with x(t)
    CHECK(delayed[0].first == traj.at(0, 0));
    CHECK(delayed[0].second == traj.at(100, 0));

    CHECK_THROWS_AS(attractor_projection(flat, projection_mode::delay(1.0)), history_error);
}

TEST_CASE("bounding box")
{
    const std::vector<std::pair<double, double>> pts{{0, 1}, {2, -1}, {1, 3}};
    const auto box = bounding_box(pts);
    CHECK(box.x_lo == 0);
    CHECK(box.x_hi == 2);
    CHECK(box.y_lo == -1);
    CHECK(box.y_hi == 3);
    CHECK(box.contains({1, 1}));
    CHECK_FALSE(box.contains({3, 1}));
}

TEST_CASE("bifurcation sweep")
{
    sweep_settings s;
    s.duration = 150.0;
    SUBCASE("single value, classic chaos")
    {
        const std::vector<double> b{8.0 / 3.0};
        const auto rows = bifurcation_sweep({}, lorenz_axis::b, b, {}, s);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].cls.kind == period_class::chaotic);
        CHECK(rows[0].key == b[0]);
    }
    SUBCASE("classes vary along b")
    {
        const std::vector<double> b{0.54, 0.58};
        s.duration = 300.0;
        const auto rows = bifurcation_sweep({}, lorenz_axis::b, b, {}, s);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].cls.kind == period_class::periodic);
        CHECK(rows[1].cls.kind == period_class::chaotic);
    }
}

TEST_CASE("bifurcation over training")
{
    const auto net = init_random(3, 8, 3, transfer_kind::gauss, 0.5, 4);
    const machine_spec spec{machine_kind::dlm, std::nullopt};
    evolve_settings e;
    e.step = 0.01;
    e.duration = 20.0;
    section_spec sec;
    sec.level = 0.0;
    sec.lag = 0.0;
    const std::vector<double> x0{0.1, 0.2, 0.3};

    SUBCASE("identical snapshots, identical rows")
    {
        train_trace trace;
        for (std::size_t s : {1u, 2u, 3u}) trace.snapshots.push_back({s, 0.0, 0.0, net});
        const auto rows = bifurcation_over_training(trace, spec, x0, e, sec, 0.5);
        REQUIRE(rows.size() == 3);
        for (const auto& r : rows) {
            CHECK(r.values == rows[0].values);
            CHECK(r.cls == rows[0].cls);
        }
    }
    SUBCASE("one snapshot equals evolve then section")
    {
        train_trace trace;
        trace.snapshots.push_back({7, 0.0, 0.0, net});
        const auto rows = bifurcation_over_training(trace, spec, x0, e, sec, 0.5);
        const auto traj = drop_transient(self_evolve(machine{machine_kind::dlm, net}, x0, e), 0.5);
        const auto values = section_values(poincare_section(traj, sec.coord, sec.level, sec.lag, sec.direction));
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].key == 7.0);
        CHECK(rows[0].values == values);
        CHECK(rows[0].cls == classify_section(values, sec));
    }
    SUBCASE("diverged snapshot")
    {
        network grow{3, 1, 3, transfer_kind::gauss};
        for (auto& b : grow.b_out()) b = 1e9;
        train_trace trace;
        trace.snapshots.push_back({1, 0.0, 0.0, grow});
        const auto rows = bifurcation_over_training(trace, spec, x0, e, sec, 0.5);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].values.empty());
        CHECK(rows[0].cls.kind == period_class::diverged);
    }
}

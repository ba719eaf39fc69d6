#include <doctest.h>

#include "dyncopy/blackbox.hpp"
#include "dyncopy/error.hpp"
#include "dyncopy/random.hpp"

#include <cmath>
#include <set>

using namespace dyncopy;

TEST_CASE("lorenz right-hand side")
{
    const lorenz_params p;
    const auto o = lorenz_rhs(p, std::vector<double>{0.0, 0.0, 0.0});
    for (double v : o) CHECK(v == 0.0);

    const double c = std::sqrt(p.b * (p.r - 1.0));
    const auto fp = lorenz_rhs(p, std::vector<double>{c, c, p.r - 1.0});
    for (double v : fp) CHECK(std::abs(v) < 1e-12);
    CHECK(c == doctest::Approx(8.48528137423857).epsilon(1e-13));

    // direct substitution at (1, 2, 3)
    const auto v = lorenz_rhs(p, std::vector<double>{1.0, 2.0, 3.0});
    CHECK(v[0] == 10.0);
    CHECK(v[1] == 23.0);
    CHECK(v[2] == doctest::Approx(2.0 - 8.0).epsilon(1e-15));
}

TEST_CASE("lorenz jacobian trace is constant")
{
    const lorenz_params p;
    prng_t prng{5};
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x{uniform(prng, -20, 20), uniform(prng, -20, 20), uniform(prng, 0, 40)};
        double trace = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            auto up = x, down = x;
            up[c] += h;
            down[c] -= h;
            trace += (lorenz_rhs(p, up)[c] - lorenz_rhs(p, down)[c]) / (2.0 * h);
        }
        CHECK(std::abs(trace + (p.sigma + 1.0 + p.b)) < 1e-6);
    }
}

TEST_CASE("flow pair sampling")
{
    const lorenz_params p;
    const sampling_box box;
    SUBCASE("empty request")
    {
        CHECK_THROWS_AS(sample_flow_pairs(p, 0, 0.05, box, 1), shape_error);
    }
    SUBCASE("100 pairs inside the box, deterministic")
    {
        const auto a = sample_flow_pairs(p, 100, 0.05, box, 3, flow_target::flow_map);
        const auto b = sample_flow_pairs(p, 100, 0.05, box, 3, flow_target::flow_map);
        REQUIRE(a.size() == 100);
        CHECK(a.inputs == b.inputs);
        CHECK(a.targets == b.targets);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(a.input(i)[c] >= box.lo[c]);
                CHECK(a.input(i)[c] <= box.hi[c]);
            }
    }
    SUBCASE("vanishing interval")
    {
        const auto a = sample_flow_pairs(p, 20, 1e-6, box, 4, flow_target::flow_map, 1e-6);
        // over a vanishing interval the flow map is the identity plus one Euler step, up to h^2 terms
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto v = lorenz_rhs(p, a.input(i));
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(std::abs(a.target(i)[c] - a.input(i)[c] - 1e-6 * v[c]) < 1e-8);
        }
    }
    SUBCASE("chord velocity reading")
    {
        const auto map = sample_flow_pairs(p, 10, 0.05, box, 6, flow_target::flow_map);
        const auto vel = sample_flow_pairs(p, 10, 0.05, box, 6, flow_target::chord_velocity);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t c = 0; c < 3; ++c) {
                const double x0 = map.input(i)[c], x1 = map.target(i)[c];
                CHECK(vel.input(i)[c] == doctest::Approx(0.5 * (x0 + x1)).epsilon(1e-14));
                CHECK(vel.target(i)[c] == doctest::Approx((x1 - x0) / 0.05).epsilon(1e-12));
            }
    }
}

TEST_CASE("record_series")
{
    const lorenz_params p;
    const std::vector<double> x0{1.0, 1.0, 1.0};
    CHECK(record_series(p, x0, 5.0, 0.001, 0).size() == 5001);
    SUBCASE("subsampling consistency")
    {
        const auto fine = record_series(p, x0, 1.0, 0.001, 0);
        const auto coarse = record_series(p, x0, 1.0, 0.002, 0);
        REQUIRE(coarse.size() == 501);
        for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(coarse.values[i] == fine.values[2 * i]);
    }
    SUBCASE("constant trajectory")
    {
        const auto origin = record_series(p, std::vector<double>{0.0, 0.0, 0.0}, 1.0, 0.01, 0);
        for (double v : origin.values) CHECK(v == 0.0);
    }
    SUBCASE("gap must be a multiple of the step")
    {
        CHECK_THROWS(record_series(p, x0, 1.0, 0.0015, 0));
        CHECK_THROWS(record_series(p, x0, 1.0, 0.0005, 0));
    }
}

TEST_CASE("delay embedding")
{
    const series s{0.0, 1.0, {0, 1, 2, 3, 4, 5}};
    SUBCASE("hand enumeration")
    {
        const auto e = delay_embed(s, 2, embed_target::next_value);
        REQUIRE(e.set.size() == 3);
        CHECK(e.set.inputs == std::vector<double>{2, 1, 0, 3, 2, 1, 4, 3, 2});
        CHECK(e.set.targets == std::vector<double>{3, 4, 5});
        CHECK(e.delay.taps == 2);
        CHECK(e.delay.gap == 1.0);
    }
    SUBCASE("derivative of a linear series")
    {
        series lin{0.0, 0.1, {}};
        for (int i = 0; i < 30; ++i) lin.values.push_back(2.5 * 0.1 * i - 1.0);
        const auto e = delay_embed(lin, 5, embed_target::derivative);
        CHECK(e.set.size() == 30 - 5 - 2);
        for (double t : e.set.targets) CHECK(t == doctest::Approx(2.5).epsilon(1e-12));
    }
    SUBCASE("sample counts")
    {
        series big{0.0, 0.001, std::vector<double>(5001, 0.0)};
        CHECK(delay_embed(big, 100, embed_target::next_value).set.size() == 4900);
        CHECK(delay_embed(big, 100, embed_target::derivative).set.size() == 4899);
    }
    SUBCASE("too short")
    {
        CHECK_THROWS_AS(delay_embed(s, 5, embed_target::next_value), shape_error);
        CHECK_THROWS_AS(delay_embed(s, 4, embed_target::derivative), shape_error);
    }
    SUBCASE("windows overlap")
    {
        series r{0.0, 1.0, {}};
        prng_t prng{2};
        for (int i = 0; i < 40; ++i) r.values.push_back(uniform01(prng));
        const auto e = delay_embed(r, 6, embed_target::next_value);
        for (std::size_t j = 0; j + 1 < e.set.size(); ++j) {
            const auto a = e.set.input(j);
            const auto b = e.set.input(j + 1);
            for (std::size_t k = 0; k < 6; ++k) CHECK(b[k + 1] == a[k]);
        }
    }
}

TEST_CASE("argmax ties go to the lowest index")
{
    CHECK(argmax(std::vector<double>{1.0, 3.0, 3.0}) == 1);
    CHECK(argmax(std::vector<double>{2.0, 2.0}) == 0);
}

TEST_CASE("one-hot targets")
{
    labeled_patterns pats{2, {1, -1, -1, 1}, {0, 2}};
    const auto set = one_hot_set(pats, 3);
    CHECK(set.targets == std::vector<double>{1, -1, -1, -1, -1, 1});
    labeled_patterns bad{2, {1, -1}, {5}};
    CHECK_THROWS(one_hot_set(bad, 3));
}

TEST_CASE("teacher with one memory converges")
{
    labeled_patterns one{4, {1, -1, 1, -1}, {2}};
    train_config cfg;
    cfg.max_steps = 20000;
    cfg.snapshot_every = 1000;
    cfg.seed = 3;
    const auto t = make_teacher(4, 3, 5, one, cfg, 0.1);
    CHECK(t.converged);
    CHECK(recognition_rate(t.net, one) == 1.0);
}

TEST_CASE("random probes")
{
    const auto teacher = init_random(8, 5, 3, transfer_kind::tanh, 1.0, 1);
    const auto a = probe_random(teacher, 50, 9);
    const auto b = probe_random(teacher, 50, 9);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
    for (double v : a.inputs) CHECK((v == 1.0 || v == -1.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto z = teacher.forward(a.input(i));
        for (std::size_t k = 0; k < 3; ++k) CHECK(a.target(i)[k] == z[k]);
    }
    const auto big = probe_random(teacher, 2000, 9);
    CHECK(big.size() == 2000);
    // prefix nesting: a smaller set is the head of a larger one
    for (std::size_t i = 0; i < a.inputs.size(); ++i) CHECK(big.inputs[i] == a.inputs[i]);
    const auto zo = probe_random(teacher, 20, 9, probe_encoding::zero_one);
    for (double v : zo.inputs) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("recovery rate")
{
    const auto teacher = init_random(4, 6, 3, transfer_kind::tanh, 1.0, 2);
    labeled_patterns mem{4, {}, {}};
    prng_t prng{3};
    for (int i = 0; i < 12; ++i) {
        for (int k = 0; k < 4; ++k) mem.pixels.push_back(uniform01(prng) < 0.5 ? -1.0 : 1.0);
        mem.labels.push_back(static_cast<int>(argmax(teacher.forward(mem.pattern(mem.size())))));
    }
    CHECK(recovery_rate(teacher, teacher, mem) == 1.0);

    // a constant student always answers class 1
    network constant{4, 6, 3, transfer_kind::tanh};
    constant.b_out()[1] = 1.0;
    std::size_t ones = 0;
    for (int l : mem.labels) ones += l == 1;
    CHECK(recovery_rate(constant, teacher, mem) == doctest::Approx(static_cast<double>(ones) / 12.0));
    const double r = recovery_rate(init_random(4, 6, 3, transfer_kind::gauss, 1.0, 9), teacher, mem);
    CHECK((r >= 0.0 && r <= 1.0));
}

TEST_CASE("scaling maps round-trip")
{
    const scaling s{{0.0, 0.0, 25.0}, 20.0, 0.1};
    CHECK(s.to_unit(45.0, 2) == 1.0);
    CHECK(s.from_unit(1.0, 2) == 45.0);
    CHECK(s.rate_to_unit(200.0) == doctest::Approx(1.0));
    const series x{1.0, 0.01, {20.0, 40.0}};
    const auto u = s.to_unit(x);
    CHECK(u.t0 == doctest::Approx(10.0));
    CHECK(u.gap == doctest::Approx(0.1));
    const auto back = s.from_unit(u);
    CHECK(back.values[1] == doctest::Approx(40.0));
    CHECK(back.gap == doctest::Approx(0.01));
}

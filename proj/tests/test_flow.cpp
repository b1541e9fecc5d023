#include <doctest.h>

#include <cmath>

#include "fbarlab/flow.hpp"
#include "fbarlab/prng.hpp"

using namespace fbarlab;

namespace {

RotationSpec golden_spec() {
    return build_rotation({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
                          {2, 1, 1, 1, 1, 1, 1, 1, 1, 1}, 64);
}

RoofFunction depth2_roof(const RotationSpec& spec) {
    return assemble_roof(spec, TrigPoly(2), {}, 2);
}

// Naive return-count oracle: plain double accumulation.
long long naive_pi(double t, const FlowPoint& p, const RoofFunction& roof,
                   const RotationSpec& spec) {
    double target = t + p.s;
    double acc = 0;
    long long n = 0;
    double x = p.x, y = p.y;
    for (;;) {
        double phi = roof(x, y);
        if (target < acc + phi) return n;
        acc += phi;
        auto b = spec.rotate({x, y}, 1);
        x = b[0];
        y = b[1];
        ++n;
    }
}

} // namespace

TEST_CASE("return_count: trivial cases") {
    RotationSpec spec = golden_spec();
    RoofFunction one = constant_roof();
    // t = 0 -> pi = 0
    CHECK(return_count(0.0, {0.4, 0.2, 0.3}, one, spec) == 0);
    // phi == 1, s = 0, integer t = m -> pi = m
    for (long long m : {1LL, 2LL, 17LL, 400LL})
        CHECK(return_count(static_cast<double>(m), {0.1, 0.8, 0.0}, one,
                           spec) == m);
}

TEST_CASE("return_count agrees with the naive loop oracle") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    Xoshiro256 rng(21);
    for (int i = 0; i < 300; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        double s = rng.uniform01() * roof(x, y) * 0.999;
        double t = rng.uniform(0.0, 50.0);
        FlowPoint p{x, y, s};
        CHECK(return_count(t, p, roof, spec) == naive_pi(t, p, roof, spec));
    }
}

TEST_CASE("flow: constant roof advances the base one step per unit time") {
    RotationSpec spec = golden_spec();
    RoofFunction one = constant_roof();
    FlowPoint p{0.25, 0.6, 0.37};
    FlowPoint q = flow(1.0, p, one, spec);
    auto b = spec.rotate({p.x, p.y}, 1);
    CHECK(q.x == doctest::Approx(b[0]).epsilon(1e-14));
    CHECK(q.y == doctest::Approx(b[1]).epsilon(1e-14));
    CHECK(q.s == doctest::Approx(p.s).epsilon(1e-14));
}

TEST_CASE("flow: short times only climb the fiber") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    Xoshiro256 rng(22);
    for (int i = 0; i < 200; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        double phi = roof(x, y);
        double s = rng.uniform01() * phi * 0.5;
        double t = rng.uniform01() * (phi - s) * 0.99;
        FlowPoint q = flow(t, {x, y, s}, roof, spec);
        CHECK(q.x == doctest::Approx(x));
        CHECK(q.y == doctest::Approx(y));
        CHECK(q.s == doctest::Approx(s + t).epsilon(1e-12));
    }
}

TEST_CASE("flow semigroup: flow(t1+t2) == flow(t2) o flow(t1)") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    Xoshiro256 rng(23);
    for (int i = 0; i < 1000; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        double s = rng.uniform01() * roof(x, y) * 0.999;
        double t1 = rng.uniform(0.0, 8.0), t2 = rng.uniform(0.0, 8.0);
        FlowPoint a = flow(t1 + t2, {x, y, s}, roof, spec);
        FlowPoint b = flow(t2, flow(t1, {x, y, s}, roof, spec), roof, spec);
        CHECK(std::abs(a.x - b.x) <= 1e-10);
        CHECK(std::abs(a.y - b.y) <= 1e-10);
        CHECK(std::abs(a.s - b.s) <= 1e-10);
    }
}

TEST_CASE("flow: negative time inverts positive time") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    Xoshiro256 rng(24);
    for (int i = 0; i < 500; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        double s = rng.uniform01() * roof(x, y) * 0.999;
        double t = rng.uniform(0.0, 20.0);
        FlowPoint fwd = flow(t, {x, y, s}, roof, spec);
        FlowPoint back = flow(-t, fwd, roof, spec);
        CHECK(std::abs(back.x - x) <= 1e-10);
        CHECK(std::abs(back.y - y) <= 1e-10);
        CHECK(std::abs(back.s - s) <= 1e-10);
    }
}

TEST_CASE("time-one map: constant roof degenerates to the translation") {
    RotationSpec spec = golden_spec();
    RoofFunction one = constant_roof();
    Xoshiro256 rng(25);
    for (int i = 0; i < 2000; ++i) {
        Vec3 p{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        Vec3 g = time_one_normalized(p, one, spec);
        auto b = spec.rotate({p.x, p.y}, 1);
        CHECK(std::abs(g.x - b[0]) <= 1e-12);
        CHECK(std::abs(g.y - b[1]) <= 1e-12);
        CHECK(std::abs(g.z - p.z) <= 1e-12);
    }
}

TEST_CASE("time-one map: numerically invertible") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    Xoshiro256 rng(26);
    for (int i = 0; i < 500; ++i) {
        Vec3 p{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        Vec3 g = time_one_normalized(p, roof, spec);
        Vec3 back = time_one_normalized_inverse(g, roof, spec);
        CHECK(std::abs(back.x - p.x) <= 1e-10);
        CHECK(std::abs(back.y - p.y) <= 1e-10);
        CHECK(std::abs(back.z - p.z) <= 1e-10);
        Vec3 fwd = time_one_normalized(back, roof, spec);
        CHECK(std::abs(fwd.z - g.z) <= 1e-10);
    }
}

TEST_CASE("orbit stays canonical over 10^6 steps") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    NormalizedFlowMap G(roof, spec);
    long long bad = 0;
    G.orbit_run({0.123, 0.456, 0.789}, 1000000,
                [&](long long, const Vec3& p) {
                    if (!(p.z >= 0.0 && p.z < 1.0)) ++bad;
                    if (!(p.x >= 0.0 && p.x < 1.0)) ++bad;
                });
    CHECK(bad == 0);
}

TEST_CASE("orbit_run matches repeated apply") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    NormalizedFlowMap G(roof, spec);
    Vec3 p{0.31, 0.77, 0.11};
    Vec3 by_apply = p;
    std::vector<Vec3> orbit;
    G.orbit_run(p, 50, [&](long long, const Vec3& q) { orbit.push_back(q); });
    for (int i = 0; i < 50; ++i) {
        by_apply = G.apply(by_apply);
        CHECK(std::abs(by_apply.x - orbit[i].x) <= 1e-9);
        CHECK(std::abs(by_apply.y - orbit[i].y) <= 1e-9);
        CHECK(std::abs(by_apply.z - orbit[i].z) <= 1e-9);
    }
}

TEST_CASE("invariant measure: normalization, constant roof, MC consistency") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);

    // full torus has measure exactly 1 in closed form
    Box3 all{0, 1, 0, 1, 0, 1};
    MeasureEstimate full = invariant_measure(all, roof, spec, 1000, 5);
    REQUIRE(full.closed_form.has_value());
    CHECK(*full.closed_form == doctest::Approx(1.0).epsilon(1e-12));

    // constant roof: Lebesgue volume
    RoofFunction one = constant_roof();
    Box3 b{0.1, 0.4, 0.2, 0.9, 0.3, 0.35};
    MeasureEstimate le = invariant_measure(b, one, spec, 1000, 5);
    CHECK(*le.closed_form == doctest::Approx(b.volume()).epsilon(1e-12));
    CHECK(le.estimate == doctest::Approx(b.volume()).epsilon(1e-12));

    // MC estimate within 4 sigma of the closed form
    Xoshiro256 rng(27);
    for (int i = 0; i < 10; ++i) {
        Box3 box;
        box.x0 = rng.uniform(0.0, 0.5);
        box.x1 = box.x0 + rng.uniform(0.1, 0.5);
        box.y0 = rng.uniform(0.0, 0.5);
        box.y1 = box.y0 + rng.uniform(0.1, 0.5);
        box.z0 = rng.uniform(0.0, 0.5);
        box.z1 = box.z0 + rng.uniform(0.1, 0.5);
        MeasureEstimate est = invariant_measure(box, roof, spec, 40000, 100 + i);
        CHECK(std::abs(est.estimate - *est.closed_form) <=
              4.0 * est.se + 1e-9);
    }
    CHECK_THROWS_AS(invariant_measure(all, roof, spec, 0, 1), InvalidInput);
}

TEST_CASE("invariant density vs pure Monte Carlo pushforward") {
    // Sample flow points per the normalized product measure, push them
    // through Phi^{-1} and compare box frequencies with the density route.
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    FlowInvariantMeasure measure(roof, spec);
    Xoshiro256 rng(28);
    const long long N = 200000;
    Box3 box{0.2, 0.5, 0.1, 0.7, 0.25, 0.75};
    double sup = roof.sup_bound();
    long long hits = 0;
    for (long long i = 0; i < N; ++i) {
        // (a, b, s) ~ lambda via rejection under the roof
        double a, b, s;
        for (;;) {
            a = rng.uniform01();
            b = rng.uniform01();
            s = rng.uniform(0.0, sup);
            if (s < roof(a, b)) break;
        }
        // Phi^{-1}(a, b, s) = (a - Omega, b - Omega', s / phi(a, b))
        auto pre = spec.rotate({a, b}, -1);
        Vec3 p{pre[0], pre[1], s / roof(a, b)};
        if (box.contains(p)) ++hits;
    }
    double freq = static_cast<double>(hits) / static_cast<double>(N);
    double se = std::sqrt(freq * (1 - freq) / static_cast<double>(N));
    double expect = *measure.box_measure_exact(box);
    CHECK(std::abs(freq - expect) <= 4.0 * se + 1e-6);
}

TEST_CASE("measure preservation smoke test") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    NormalizedFlowMap G(roof, spec);
    FlowInvariantMeasure measure(roof, spec);
    Xoshiro256 rng(29);
    Box3 box{0.15, 0.65, 0.3, 0.8, 0.1, 0.6};
    const long long N = 100000;
    long long direct = 0, pulled = 0;
    for (long long i = 0; i < N; ++i) {
        Vec3 p = measure.sample(rng);
        if (box.contains(p)) ++direct;
        if (box.contains(G.apply(p))) ++pulled; // mu(G^{-1} box)
    }
    double f1 = static_cast<double>(direct) / N;
    double f2 = static_cast<double>(pulled) / N;
    double se = std::sqrt((f1 * (1 - f1) + f2 * (1 - f2)) / N);
    CHECK(std::abs(f1 - f2) <= 4.0 * se + 1e-6);
}

TEST_CASE("printed normalization: identical for constant roofs") {
    RotationSpec spec = golden_spec();
    RoofFunction one = constant_roof();
    FlowParams printed;
    printed.roof_argument = FlowParams::RoofArgument::printed;
    Xoshiro256 rng(30);
    for (int i = 0; i < 200; ++i) {
        Vec3 p{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        Vec3 a = time_one_normalized(p, one, spec);
        Vec3 b = time_one_normalized(p, one, spec, printed);
        CHECK(a.x == doctest::Approx(b.x));
        CHECK(a.y == doctest::Approx(b.y));
        CHECK(a.z == doctest::Approx(b.z));
    }
}

TEST_CASE("flow rejects non-canonical points") {
    RotationSpec spec = golden_spec();
    RoofFunction one = constant_roof();
    CHECK_THROWS_AS(flow(1.0, {0.1, 0.1, 1.5}, one, spec),
                    PreconditionFailed);
    CHECK_THROWS_AS(return_count(-1.0, {0.1, 0.1, 0.5}, one, spec),
                    InvalidInput);
}

TEST_CASE("heights within the wrap tolerance are canonicalized") {
    RotationSpec spec = golden_spec();
    RoofFunction roof = depth2_roof(spec);
    double x = 0.21, y = 0.58;
    double phi = roof(x, y);
    FlowPoint p{x, y, phi - 1e-15}; // representative drifted onto the roof
    FlowPoint q = flow(0.0, p, roof, spec);
    // wrapped through the relation: base advanced, height reset to zero
    auto b = spec.rotate({x, y}, 1);
    CHECK(q.x == doctest::Approx(b[0]));
    CHECK(q.y == doctest::Approx(b[1]));
    CHECK(q.s == 0.0);
}

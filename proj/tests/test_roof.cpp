#include <doctest.h>

#include <cmath>

#include "fbarlab/prng.hpp"
#include "fbarlab/roof.hpp"

using namespace fbarlab;

namespace {

// q = (1, 1, 2, 3, 5, 8, 21, 4082): a toy surrogate-growth ladder whose
// index-6 level has q_6 = 21 <= 32 and q_7 = 4082 <= 4096.
RotationSpec plateau_spec() {
    return build_rotation({1, 1, 1, 1, 1, 2, 194}, {8, 1, 1, 1, 1, 1, 1}, 64);
}

} // namespace

TEST_CASE("select_eta: toy values and the feasibility window") {
    // q_0 = 1: window for 1/eta is [(4/3) e, 2 e] ~ [3.62, 5.44]; the only
    // multiple of 2 is 4, so eta = 1/4.
    RotationSpec spec = build_rotation({2, 1, 3}, {5, 1}, 64);
    EtaResult r = select_eta(0, spec);
    CHECK(r.inv_eta == 4);
    CHECK(r.eta == doctest::Approx(0.25));
    CHECK(r.window_lo == doctest::Approx((4.0 / 3.0) * std::exp(1.0)));
    CHECK(r.window_hi == doctest::Approx(2.0 * std::exp(1.0)));

    // both bracket inequalities hold for the returned eta
    double q = static_cast<double>(r.q);
    CHECK(r.eta >= q * std::exp(-q) / 2.0);
    CHECK(r.eta <= 3.0 * q * std::exp(-q) / 4.0);

    // q_n = 2: window [4.93, 7.39] contains no multiple of 4
    CHECK_THROWS_AS(select_eta(1, spec), NoFeasibleEta);
}

TEST_CASE("select_eta picks the smallest feasible 1/eta") {
    RotationSpec spec = plateau_spec();
    EtaResult r = select_eta(6, spec); // q_6 = 21
    CHECK(r.q == 21);
    CHECK(r.inv_eta % 42 == 0);
    CHECK(static_cast<double>(r.inv_eta) >= r.window_lo);
    CHECK(static_cast<double>(r.inv_eta - 42) < r.window_lo);
    CHECK(static_cast<double>(r.inv_eta) <= r.window_hi);
}

TEST_CASE("xi profile: anchor values, oddness, closed-form coefficients") {
    RotationSpec spec = build_rotation({1, 1, 1, 1, 300}, {8, 300}, 64);
    EtaResult eta = select_eta(4, spec); // q_4 = 5, eta = 1/40
    CHECK(eta.inv_eta == 40);
    const double mu = 0.06;
    PiecewiseXi xi(5, mu, eta.eta);

    CHECK(xi.eval_profile(0.0) == 0.0);
    double plateau_x = 1.0 / (4.0 * 5.0);
    CHECK(xi.eval_profile(plateau_x) ==
          doctest::Approx((1.0 - 4.0 * mu) / (4.0 * 5.0)));
    CHECK(xi.eval(plateau_x) == doctest::Approx(eta.eta));

    Xoshiro256 rng(9);
    for (int i = 0; i < 1000; ++i) {
        double x = rng.uniform01();
        CHECK(xi.eval(-x) == doctest::Approx(-xi.eval(x)).epsilon(1e-9));
        CHECK(xi.eval(x + 1.0 / 5.0) ==
              doctest::Approx(xi.eval(x)).epsilon(1e-9)); // 1/q_n periodic
    }

    // closed-form sine series converges to the profile away from corners
    const int terms = 4000;
    for (double x : {0.31, 0.07, 0.55, 0.93}) {
        double s = 0;
        for (long long j = 1; j <= terms; ++j)
            s += xi.sine_coefficient(j) * std::sin(kTwoPi * j * 5.0 * x);
        CHECK(std::abs(s - xi.eval(x)) <= 1e-4 * eta.eta + 1e-12);
    }
}

TEST_CASE("bump kernel: unit integral and support") {
    BumpKernel k(80.0);
    CHECK(std::abs(k.integral_check() - 1.0) <= 1e-10);
    CHECK(k.support_halfwidth() == doctest::Approx(1.0 / 80.0));
    CHECK(k.eval(1.1 / 80.0) == 0.0);
    CHECK(k.eval(0.0) > 0.0);
    // Fourier transform at 0 is the integral
    CHECK(k.fourier(0.0) == doctest::Approx(1.0).epsilon(1e-10));
    // decay with frequency
    CHECK(std::abs(k.fourier(400.0)) < 0.5);
}

TEST_CASE("plateau polynomial at the toy index: properties and margins") {
    RotationSpec spec = plateau_spec();
    const double mu = 0.06;
    PlateauPoly P = build_P_mu_n(6, mu, spec);

    CHECK(P.qn == 21);
    CHECK(P.margins.zero_average_exact);
    CHECK(P.margins.inv_eta_multiple_exact);
    // degree <= q_{n+1}
    CHECK(P.series.degree() <= spec.q(7));

    // C^0 norm within e^{-3q/4} at this index
    CHECK(P.margins.norm_c0.pass);

    // plateau and slope margins on the measured grid
    CHECK(P.margins.plateau_plus.applicable);
    CHECK(P.margins.plateau_plus.pass);
    CHECK(P.margins.plateau_minus.pass);
    CHECK(P.margins.slope_descending.applicable);
    CHECK(P.margins.slope_descending.pass);
    CHECK(P.margins.slope_ascending.pass);
    CHECK(P.margins.kernel_integral.pass);
    CHECK(P.margins.tail.pass);

    // spot values: P ~ +eta at the 1/4 plateau, ~ -eta at the 3/4 plateau
    double c_plus = 1.0 / (4.0 * 21.0);
    double c_minus = 3.0 / (4.0 * 21.0);
    CHECK(P.eval(c_plus) == doctest::Approx(P.eta.eta).epsilon(1e-3));
    CHECK(P.eval(c_minus) == doctest::Approx(-P.eta.eta).epsilon(1e-3));
}

TEST_CASE("plateau polynomial rejects bad inputs") {
    RotationSpec spec = plateau_spec();
    CHECK_THROWS_AS(build_P_mu_n(6, 0.3, spec), InvalidInput);  // mu >= 1/4
    CHECK_THROWS_AS(build_P_mu_n(0, 0.1, spec), InvalidInput);  // kernel index
    CHECK_THROWS_AS(build_P_mu_n(7, 0.1, spec), InvalidInput);  // q_{n+1} missing
}

TEST_CASE("mollified profile vs Fourier route (independent quadrature)") {
    RotationSpec spec = build_rotation({1, 1, 1, 1, 300}, {8, 300}, 64);
    const double mu = 0.06;
    PlateauPoly P = build_P_mu_n(4, mu, spec);
    EtaResult eta = P.eta;
    PiecewiseXi xi(P.qn, mu, eta.eta);
    BumpKernel kernel(16.0 * static_cast<double>(P.qn));
    Xoshiro256 rng(10);
    for (int i = 0; i < 25; ++i) {
        double x = rng.uniform01();
        double direct = mollified_eval(xi, kernel, x);
        // truncation tail bound e^{3q/4}/q_{n+1}
        double tol = std::exp(0.75 * 5.0) / static_cast<double>(spec.q(5));
        CHECK(std::abs(direct - P.eval(x)) <= tol);
    }
}

TEST_CASE("assemble_roof: constant, analytic terms, substitution") {
    RotationSpec spec = plateau_spec();

    RoofFunction flat = assemble_roof(spec, TrigPoly(2), {}, 0);
    CHECK(flat(0.3, 0.8) == doctest::Approx(1.0));
    CHECK(flat.average() == doctest::Approx(1.0));

    RoofFunction depth2 = assemble_roof(spec, TrigPoly(2), {}, 2);
    // term-by-term oracle
    Xoshiro256 rng(11);
    for (int i = 0; i < 200; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        double expect = 1.0;
        for (int k = 1; k <= 2; ++k) {
            expect += std::exp(-static_cast<double>(spec.q(k))) *
                      std::cos(kTwoPi * spec.q(k) * x);
            expect += std::exp(-static_cast<double>(spec.qp(k))) *
                      std::cos(kTwoPi * spec.qp(k) * y);
        }
        CHECK(std::abs(depth2(x, y) - expect) <= 1e-12 * 3.0);
    }
    CHECK(depth2.average() == doctest::Approx(1.0));

    // substitution at index 6 changes only modes of degree <= q_7
    PlateauPoly P = build_P_mu_n(6, 0.06, spec);
    std::map<int, PlateauPoly> subs{{6, P}};
    RoofFunction sub = assemble_roof(spec, TrigPoly(2), subs, 6);
    RoofFunction plain = assemble_roof(spec, TrigPoly(2), {}, 6);
    TrigPoly diff = P.as_trigpoly() -
                    TrigPoly::cosine(1, {21, 0}, std::exp(-21.0));
    CHECK(diff.degree() <= spec.q(7));
    for (int i = 0; i < 50; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        CHECK(std::abs((sub(x, y) - plain(x, y)) - diff.evaluate(x)) <= 1e-11);
    }
}

TEST_CASE("assemble_roof rejects bad substitutions and negative roofs") {
    RotationSpec spec = plateau_spec();
    PlateauPoly P = build_P_mu_n(6, 0.06, spec);
    std::map<int, PlateauPoly> subs{{6, P}};
    CHECK_THROWS_AS(assemble_roof(spec, TrigPoly(2), subs, 3), InvalidInput);

    TrigPoly sink(2);
    sink.set_coef({1, 0}, {-1.0, 0.0}); // -2 cos(2 pi x): roof dips below 0
    CHECK_THROWS_AS(assemble_roof(spec, sink, {}, 0), InvalidRoof);
}

TEST_CASE("roof bounds and positivity scan") {
    RotationSpec spec = plateau_spec();
    RoofFunction roof = assemble_roof(spec, TrigPoly(2), {}, 3);
    double lo = roof.min_on_grid(128);
    CHECK(lo > 0.0);
    CHECK(roof.sup_bound() >= roof(0.1, 0.2));
    CHECK(roof.inf_bound() <= lo + 1e-12);
    Xoshiro256 rng(12);
    for (int i = 0; i < 500; ++i) {
        double v = roof(rng.uniform01(), rng.uniform01());
        CHECK(v <= roof.sup_bound() + 1e-12);
        CHECK(v >= roof.inf_bound() - 1e-12);
    }
}

TEST_CASE("triangle inequality for multi-substitution roofs") {
    // q = (1, 1, 2, 3, 5, 1503): feasible eta at indices 3 (1/eta = 12) and
    // 4 (1/eta = 40); substitute both and compare norm bounds.
    RotationSpec spec = build_rotation({1, 1, 1, 1, 300}, {8, 1, 1, 300}, 64);
    PlateauPoly P3 = build_P_mu_n(3, 0.12, spec);
    PlateauPoly P4 = build_P_mu_n(4, 0.06, spec);
    std::map<int, PlateauPoly> subs{{3, P3}, {4, P4}};
    RoofFunction with = assemble_roof(spec, TrigPoly(2), subs, 4);
    RoofFunction without = assemble_roof(spec, TrigPoly(2), {}, 4);

    TrigPoly d3 = P3.as_trigpoly() -
                  TrigPoly::cosine(1, {static_cast<int>(spec.q(3)), 0},
                                   std::exp(-static_cast<double>(spec.q(3))));
    TrigPoly d4 = P4.as_trigpoly() -
                  TrigPoly::cosine(1, {static_cast<int>(spec.q(4)), 0},
                                   std::exp(-static_cast<double>(spec.q(4))));
    TrigPoly total = d3 + d4;
    for (int r = 0; r <= 2; ++r)
        CHECK(total.norm_bound(r) <=
              d3.norm_bound(r) + d4.norm_bound(r) + 1e-15);

    // the pointwise difference of the roofs is the coefficient difference
    Xoshiro256 rng(13);
    for (int i = 0; i < 50; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        CHECK(std::abs((with(x, y) - without(x, y)) - total.evaluate(x)) <=
              1e-11);
    }
}

TEST_CASE("sine series evaluation matches the naive term-by-term sum") {
    Xoshiro256 rng(14);
    std::vector<double> coeffs;
    for (int j = 0; j < 500; ++j)
        coeffs.push_back(rng.uniform(-1.0, 1.0) / ((j + 1.0) * (j + 1.0)));
    SineSeries s(7, coeffs);
    for (int i = 0; i < 50; ++i) {
        double x = rng.uniform01();
        double naive = 0, dnaive = 0;
        for (size_t j = 0; j < coeffs.size(); ++j) {
            double f = 7.0 * static_cast<double>(j + 1);
            naive += coeffs[j] * std::sin(kTwoPi * f * x);
            dnaive += coeffs[j] * kTwoPi * f * std::cos(kTwoPi * f * x);
        }
        CHECK(std::abs(s.eval(x) - naive) <= 1e-12);
        CHECK(std::abs(s.deriv(x) - dnaive) <= 1e-9 * (1.0 + std::abs(dnaive)));
    }
}

TEST_CASE("degenerate small index: margins are flagged, not rejected") {
    // Index 1 with q_1 = 1: the kernel is as wide as the whole period, so
    // the mollified profile keeps no plateau.  The construction still
    // succeeds with exact zero average; the failed properties are flagged.
    RotationSpec spec = build_rotation({1, 300}, {2, 5}, 64);
    PlateauPoly P = build_P_mu_n(1, 0.1, spec);
    CHECK(P.margins.zero_average_exact);
    CHECK(P.margins.inv_eta_multiple_exact);
    CHECK(P.eta.inv_eta == 4);
    CHECK(!P.margins.plateau_plus.pass);
    // slope regions are empty at mu = 0.1 (4 mu exceeds a quarter period)
    CHECK(!P.margins.slope_descending.applicable);
    CHECK(!P.margins.slope_descending.pass);
}

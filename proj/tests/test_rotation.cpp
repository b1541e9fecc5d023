#include <doctest.h>

#include <cmath>

#include "fbarlab/prng.hpp"
#include "fbarlab/rotation.hpp"

using namespace fbarlab;

namespace {

// Brute-force minimality oracle: first k > 0 with ||k Omega|| < ||q_n Omega||,
// distances computed exactly from the rational truncation.
long long first_improvement(const CircleRotation& rot, int n) {
    Rational ref = rot.dist_multiple(rot.q(n));
    for (long long k = 1;; ++k) {
        Rational d = rot.dist_multiple(k);
        if (d.num * ref.den < ref.num * d.den) return k;
        if (k > rot.denominator()) return -1;
    }
}

} // namespace

TEST_CASE("convergent recursion: golden-mean truncation gives Fibonacci") {
    CircleRotation rot({1, 1, 1, 1, 1});
    const long long expect[] = {1, 1, 2, 3, 5, 8};
    for (int n = 0; n <= 5; ++n) CHECK(rot.q(n) == expect[n]);
    CHECK(rot.numerator() == 5);
    CHECK(rot.denominator() == 8);
}

TEST_CASE("q_1 equals the first partial quotient") {
    CircleRotation rot({2});
    CHECK(rot.q(0) == 1);
    CHECK(rot.q(1) == 2);
}

TEST_CASE("brute-force minimality scan confirms the return times") {
    // Boundary effects of the rational truncation: with a_1 = 1 the step
    // q_0 -> q_1 is degenerate (q_1 = q_0 = 1), and with a_N = 1 the last
    // two betas coincide (beta_{N-2} = a_N / q_N = beta_{N-1}), so the scan
    // applies strictly inside the quotient list.
    CircleRotation golden({1, 1, 1, 1, 1, 1, 1});
    for (int n = 1; n + 2 < golden.depth(); ++n)
        CHECK(first_improvement(golden, n) == golden.q(n + 1));

    CircleRotation other({3, 2, 4, 5}); // a_N > 1: scan valid up to N-2
    for (int n = 0; n + 1 < other.depth(); ++n)
        CHECK(first_improvement(other, n) == other.q(n + 1));
}

TEST_CASE("beta is strictly decreasing with the classical brackets") {
    CircleRotation rot({2, 3, 1, 4, 2});
    int N = rot.depth();
    for (int n = 1; n < N; ++n) {
        Rational b = rot.beta(n);
        Rational prev = rot.beta(n - 1);
        CHECK(b.num * prev.den < prev.num * b.den); // strict decrease
    }
    // beta_n q_{n+1} < 1 away from the truncation; at n = N-1 the
    // determinant identity gives beta_{N-1} q_N = 1 exactly.
    for (int n = 0; n + 2 < N + 1; ++n) {
        Rational b = rot.beta(n);
        CHECK(b.num * rot.q(n + 1) < b.den);
    }
    Rational last = rot.beta(N - 1);
    CHECK(last.num * rot.q(N) == last.den);
    // best-approximation bracket: beta_n (q_{n+1} + q_n) >= 1
    for (int n = 0; n + 1 < N; ++n) {
        Rational b = rot.beta(n);
        CHECK(b.num * (rot.q(n + 1) + rot.q(n)) >= b.den);
    }
    CHECK(rot.beta(N).num == 0); // exact at the truncation
}

TEST_CASE("dist_to_integers basics and symmetry properties") {
    CHECK(dist_to_integers(0.5) == doctest::Approx(0.5));
    CHECK(dist_to_integers(3.25) == doctest::Approx(0.25));
    CHECK(dist_to_integers(-0.9) == doctest::Approx(0.1).epsilon(1e-12));

    Xoshiro256 rng(7);
    for (int i = 0; i < 10000; ++i) {
        double x = rng.uniform(-50.0, 50.0);
        double d = dist_to_integers(x);
        CHECK(d >= 0.0);
        CHECK(d <= 0.5);
        CHECK(dist_to_integers(x + 1.0) == doctest::Approx(d).epsilon(1e-9));
        CHECK(dist_to_integers(-x) == doctest::Approx(d).epsilon(1e-9));
    }
}

TEST_CASE("rotate: identity, exact period and beta displacement") {
    RotationSpec spec = build_rotation({1, 1, 1, 1, 1, 1, 1, 1},
                                       {2, 1, 1, 1, 1}, 128);
    std::array<double, 2> p{0.3, 0.7};
    auto same = spec.rotate(p, 0);
    CHECK(same[0] == doctest::Approx(0.3));
    CHECK(same[1] == doctest::Approx(0.7));

    // m = full denominator: exact period in x
    auto period = spec.x().rotate(0.3, spec.x().denominator());
    CHECK(period == doctest::Approx(0.3).epsilon(1e-15));

    // m = q_n: x-displacement has distance-to-integer equal to beta_n
    for (int n = 1; n + 1 < spec.x().depth(); ++n) {
        long long qn = spec.q(n);
        Rational disp = spec.x().dist_multiple(qn);
        Rational beta = spec.x().beta(n);
        CHECK(disp.num * beta.den == beta.num * disp.den);
    }
}

TEST_CASE("rotate matches high-precision direct multiplication") {
    RotationSpec spec = build_rotation({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}, 128);
    long long qx = spec.x().denominator();
    long long px = spec.x().numerator();
    Xoshiro256 rng(11);
    for (int i = 0; i < 200; ++i) {
        long long m = static_cast<long long>(rng.below(1000000000ULL));
        double got = spec.x().rotate(0.0, m);
        // long double direct route for comparison
        long double frac_part =
            std::fmod(static_cast<long double>(m % qx) * px,
                      static_cast<long double>(qx)) /
            static_cast<long double>(qx);
        CHECK(got == doctest::Approx(static_cast<double>(frac_part))
                         .epsilon(1e-12));
    }
}

TEST_CASE("growth report: paper and surrogate modes") {
    // q = (1, 2), q' = (1, 500): pass iff 500 >= e^{3*2} ~ 403.4
    RotationSpec spec = build_rotation({2}, {500}, 64);
    GrowthReport rep = check_growth(spec, GrowthModel::paper(), 1);
    REQUIRE(rep.levels.size() == 1);
    CHECK(rep.levels[0].x_to_y_ok);
    CHECK(!rep.levels[0].has_next);
    CHECK(rep.all_pass());

    // y too small: 400 < e^6
    RotationSpec bad = build_rotation({2}, {400}, 64);
    CHECK(!check_growth(bad, GrowthModel::paper(), 1).all_pass());

    // surrogate g = 10 with q'_1 = 5 q_1 fails
    RotationSpec sur = build_rotation({2}, {10}, 64);
    CHECK(!check_growth(sur, GrowthModel::surrogate(10.0), 1).all_pass());
    CHECK(check_growth(sur, GrowthModel::surrogate(4.0), 1).all_pass());

    // depth 0 is an empty report
    CHECK(check_growth(spec, GrowthModel::paper(), 0).levels.empty());
    CHECK(check_growth(spec, GrowthModel::paper(), 0).all_pass());
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(build_rotation({}, {1}, 64), InvalidInput);
    CHECK_THROWS_AS(build_rotation({0, 2}, {1}, 64), InvalidInput);
    CHECK_THROWS_AS(build_rotation({1}, {1}, 32), InvalidInput);
    CHECK_THROWS_AS(dist_to_integers(std::nan("")), InvalidInput);
}

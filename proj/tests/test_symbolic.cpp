#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fbarlab/flow.hpp"
#include "fbarlab/symbolic.hpp"

using namespace fbarlab;

namespace {

// Exhaustive matching oracle over all index pairs (exponential recursion,
// structurally independent of the row DP).
long long lcs_brute(const Word& v, const Word& w, size_t i = 0, size_t j = 0) {
    if (i == v.length() || j == w.length()) return 0;
    long long best = std::max(lcs_brute(v, w, i + 1, j),
                              lcs_brute(v, w, i, j + 1));
    if (v.symbols[i] == w.symbols[j])
        best = std::max(best, 1 + lcs_brute(v, w, i + 1, j + 1));
    return best;
}

Word make_word(std::initializer_list<uint32_t> syms) {
    Word w;
    w.symbols = syms;
    return w;
}

Word random_word(Xoshiro256& rng, size_t n, uint32_t alphabet) {
    Word w;
    w.symbols.reserve(n);
    for (size_t i = 0; i < n; ++i)
        w.symbols.push_back(1 + static_cast<uint32_t>(rng.below(alphabet)));
    return w;
}

} // namespace

TEST_CASE("classify: trivial levels and the floor oracle") {
    CubePartition p0(0), p1(1), p3(3);
    CHECK(p0.classify({0.9, 0.1, 0.5}) == 1);
    CHECK(p1.classify({0.0, 0.0, 0.0}) == 1); // lower-closed convention
    CHECK(p1.cell_count() == 8);

    Xoshiro256 rng(42);
    for (int i = 0; i < 5000; ++i) {
        Vec3 q{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        auto side = 1u << 3;
        auto ix = static_cast<uint32_t>(q.x * side);
        auto iy = static_cast<uint32_t>(q.y * side);
        auto iz = static_cast<uint32_t>(q.z * side);
        CHECK(p3.classify(q) == (ix * side + iy) * side + iz + 1);
    }
}

TEST_CASE("classify: level n refines level n-1") {
    CubePartition fine(4), coarse(3);
    Xoshiro256 rng(43);
    for (int i = 0; i < 2000; ++i) {
        Vec3 q{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        Box3 fb = fine.cell_box(fine.classify(q));
        Box3 cb = coarse.cell_box(coarse.classify(q));
        CHECK(fb.x0 >= cb.x0);
        CHECK(fb.x1 <= cb.x1);
        CHECK(fb.y0 >= cb.y0);
        CHECK(fb.y1 <= cb.y1);
        CHECK(fb.z0 >= cb.z0);
        CHECK(fb.z1 <= cb.z1);
    }
}

TEST_CASE("p_name: identity map gives a constant word") {
    IdentityMap id;
    CubePartition part(2);
    Word w = p_name(id, part, {0.3, 0.6, 0.9}, 12);
    CHECK(w.length() == 12);
    for (auto s : w.symbols) CHECK(s == w.symbols[0]);

    Word one = p_name(id, part, {0.3, 0.6, 0.9}, 1);
    CHECK(one.length() == 1);
    CHECK(one.symbols[0] == part.classify({0.3, 0.6, 0.9}));
}

TEST_CASE("p_name: product rotation matches the explicit translation orbit") {
    RotationSpec spec = build_rotation({1, 1, 1, 1, 1, 1, 1, 1},
                                       {2, 1, 1, 1, 1, 1}, 64);
    TranslationMap map(spec);
    CubePartition part(2);
    Vec3 q{0.15, 0.45, 0.75};
    Word w = p_name(map, part, q, 200);
    for (long long i = 0; i < 200; ++i) {
        auto b = spec.rotate({q.x, q.y}, i);
        CHECK(w.symbols[static_cast<size_t>(i)] ==
              part.classify({b[0], b[1], q.z}));
    }
}

TEST_CASE("hamming: examples and the positionwise oracle") {
    CHECK(hamming(make_word({1, 2, 1}), make_word({1, 2, 1})) == 0.0);
    CHECK(hamming(make_word({1, 2, 1}), make_word({1, 2, 2})) ==
          doctest::Approx(1.0 / 3));
    CHECK_THROWS_AS(hamming(make_word({1}), make_word({1, 2})), InvalidInput);

    Xoshiro256 rng(44);
    for (int t = 0; t < 200; ++t) {
        Word v = random_word(rng, 40, 4), w = random_word(rng, 40, 4);
        size_t mism = 0;
        for (size_t i = 0; i < 40; ++i)
            if (v.symbols[i] != w.symbols[i]) ++mism;
        CHECK(hamming(v, w) == doctest::Approx(mism / 40.0));
    }
}

TEST_CASE("fbar: examples") {
    Word v = make_word({1, 2}), w = make_word({2, 1});
    CHECK(fbar(v, v) == 0.0);
    CHECK(fbar(v, w) == doctest::Approx(0.5)); // exhaustive matching: l = 1
    CHECK(lcs_brute(v, w) == 1);
    CHECK(fbar(make_word({1, 1, 1}), make_word({2, 2, 2})) == 1.0);
}

TEST_CASE("match_count: examples and brute-force agreement") {
    Word empty;
    CHECK(match_count(empty, make_word({1, 2})) == 0);
    CHECK(match_count(make_word({1, 1, 1}), make_word({1, 1})) == 2);

    Xoshiro256 rng(45);
    for (int t = 0; t < 300; ++t) {
        size_t n = 1 + rng.below(8), m = 1 + rng.below(8);
        Word v = random_word(rng, n, 3), w = random_word(rng, m, 3);
        CHECK(match_count(v, w) == lcs_brute(v, w));
    }
}

TEST_CASE("fbar metric axioms hold exactly (integer arithmetic)") {
    Xoshiro256 rng(46);
    const size_t n = 60;
    for (int t = 0; t < 500; ++t) {
        Word u = random_word(rng, n, 5), v = random_word(rng, n, 5),
             w = random_word(rng, n, 5);
        long long luv = match_count(u, v);
        long long lvw = match_count(v, w);
        long long luw = match_count(u, w);
        // triangle inequality in match form: luv + lvw <= n + luw
        CHECK(luv + lvw <= static_cast<long long>(n) + luw);
        // symmetry and identity
        CHECK(match_count(v, u) == luv);
        CHECK(fbar(u, u) == 0.0);
        // fbar <= hamming
        CHECK(fbar(u, v) <= hamming(u, v) + 1e-15);
    }
}

TEST_CASE("fbar invariant under simultaneous symbol permutation") {
    Xoshiro256 rng(47);
    uint32_t perm[6] = {0, 4, 2, 5, 1, 3}; // permutation of {1..5}
    for (int t = 0; t < 100; ++t) {
        Word v = random_word(rng, 30, 5), w = random_word(rng, 30, 5);
        Word pv = v, pw = w;
        for (auto& s : pv.symbols) s = perm[s];
        for (auto& s : pw.symbols) s = perm[s];
        CHECK(fbar(v, w) == fbar(pv, pw));
    }
}

TEST_CASE("banded fbar: certified exact when the band is not saturated") {
    Xoshiro256 rng(48);
    for (int t = 0; t < 200; ++t) {
        const size_t n = 100;
        // words with controlled disagreement: copy plus a few edits
        Word v = random_word(rng, n, 4);
        Word w = v;
        int edits = 1 + static_cast<int>(rng.below(6));
        for (int e = 0; e < edits; ++e)
            w.symbols[rng.below(n)] = 1 + static_cast<uint32_t>(rng.below(4));
        double exact = fbar(v, w);
        BandedFbar fast = fbar_banded(v, w, 2 * edits + 2);
        if (fast.exact) CHECK(fast.value == exact);
        // saturated or not, the banded value never beats the true LCS
        CHECK(fast.value >= exact - 1e-15);
    }
    // saturation: disjoint alphabets with a tiny band
    Word a = make_word({1, 1, 1, 1, 1, 1}), b = make_word({2, 2, 2, 2, 2, 2});
    BandedFbar r = fbar_banded(a, b, 2);
    CHECK(!r.exact);
}

TEST_CASE("fbar_diameter: single pair and identical points") {
    IdentityMap id;
    CubePartition part(1);
    std::vector<Vec3> pts{{0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}};
    Word a = p_name(id, part, pts[0], 5), b = p_name(id, part, pts[1], 5);
    CHECK(fbar_diameter(pts, id, part, 5) == doctest::Approx(fbar(a, b)));
    std::vector<Vec3> same{{0.2, 0.2, 0.2}, {0.2, 0.2, 0.2}};
    CHECK(fbar_diameter(same, id, part, 5) == 0.0);
    // k points: max over all pairs, by direct enumeration
    Xoshiro256 rng(49);
    std::vector<Vec3> many;
    for (int i = 0; i < 6; ++i)
        many.push_back({rng.uniform01(), rng.uniform01(), rng.uniform01()});
    std::vector<Word> names;
    for (const auto& p : many) names.push_back(p_name(id, part, p, 7));
    double expect = 0;
    for (size_t i = 0; i < names.size(); ++i)
        for (size_t j = i + 1; j < names.size(); ++j)
            expect = std::max(expect, fbar(names[i], names[j]));
    CHECK(fbar_diameter(many, id, part, 7) == doctest::Approx(expect));
}

TEST_CASE("property P: alpha = 0 passes trivially, constant partition passes") {
    RotationSpec spec = build_rotation({1, 1, 1, 1, 1, 1}, {2, 1, 1, 1}, 64);
    TranslationMap map(spec);
    LebesgueMeasure leb;
    CubePartition part(1);

    PropertyPReport r0 =
        estimate_property_P(map, part, leb, 0.0, 0.1, 16, 2, 200, 7);
    CHECK(r0.pass);
    CHECK(r0.trivial_alpha_zero);

    CubePartition constant(0); // every name is constant
    PropertyPReport rc =
        estimate_property_P(map, constant, leb, 0.9, 0.05, 16, 2, 200, 7);
    CHECK(rc.pass);
    CHECK(rc.best_fraction == 1.0);
}

TEST_CASE("property P: fraction matches an exhaustive grid oracle") {
    RotationSpec spec = build_rotation({1, 1, 1, 1, 1, 1, 1},
                                       {2, 1, 1, 1, 1}, 64);
    TranslationMap map(spec);
    LebesgueMeasure leb;
    CubePartition part(1);
    const long long n = 8;
    const double alpha = 0.4;
    const double radius = (1.0 - alpha) / 2.0;

    PropertyPReport rep =
        estimate_property_P(map, part, leb, alpha, 0.9, n, 1, 20000, 12345);

    // reproduce the center name: the center stream draws one Lebesgue point
    Xoshiro256 crng = stream_for(12345, "property_p/centers");
    Vec3 center{crng.uniform01(), crng.uniform01(), crng.uniform01()};
    Word cname = p_name(map, part, center, n);

    // exhaustive 64^3 lattice oracle for the Lebesgue fraction
    const int g = 64;
    long long hits = 0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k) {
                Vec3 y{(i + 0.5) / g, (j + 0.5) / g, (k + 0.5) / g};
                if (fbar(cname, p_name(map, part, y, n)) < radius) ++hits;
            }
    double oracle = static_cast<double>(hits) / (g * g * g);
    CHECK(std::abs(rep.center_fractions[0] - oracle) <= 0.02);
}

TEST_CASE("property P: input validation") {
    RotationSpec spec = build_rotation({2}, {3}, 64);
    TranslationMap map(spec);
    LebesgueMeasure leb;
    CubePartition part(1);
    CHECK_THROWS_AS(
        estimate_property_P(map, part, leb, 0.5, 0.5, 0, 1, 10, 1),
        InvalidInput);
    CHECK_THROWS_AS(
        estimate_property_P(map, part, leb, 0.5, 0.5, 4, 1, 0, 1),
        InvalidInput);
    CHECK_THROWS_AS(
        estimate_property_P(map, part, leb, 1.0, 0.5, 4, 1, 10, 1),
        InvalidInput);
}

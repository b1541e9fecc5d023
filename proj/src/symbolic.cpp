#include "fbarlab/symbolic.hpp"

#include <algorithm>
#include <cmath>

namespace fbarlab {

CubePartition::CubePartition(int level) : level_(level) {
    if (level < 0 || level > 9)
        throw InvalidInput("cube partition level must be in [0, 9]");
}

uint32_t CubePartition::classify(const Vec3& p) const {
    const uint32_t side = 1u << level_;
    auto idx = [&](double c) -> uint32_t {
        double f = frac(c);
        auto i = static_cast<uint32_t>(f * side);
        return i >= side ? side - 1 : i;
    };
    uint32_t ix = idx(p.x), iy = idx(p.y), iz = idx(p.z);
    return (ix * side + iy) * side + iz + 1;
}

Box3 CubePartition::cell_box(uint32_t index) const {
    if (index < 1 || index > cell_count())
        throw InvalidInput("cell index out of range");
    const uint32_t side = 1u << level_;
    uint32_t i = index - 1;
    uint32_t iz = i % side;
    uint32_t iy = (i / side) % side;
    uint32_t ix = i / (side * side);
    double w = 1.0 / side;
    return {ix * w, (ix + 1) * w, iy * w, (iy + 1) * w, iz * w, (iz + 1) * w};
}

Word p_name(const MapT3& map, const CubePartition& part, const Vec3& q,
            long long n) {
    if (n < 1) throw InvalidInput("p_name: length must be >= 1");
    Word w;
    w.symbols.reserve(static_cast<size_t>(n));
    w.symbols.push_back(part.classify(q));
    if (n > 1)
        map.orbit_run(q, n - 1, [&](long long, const Vec3& p) {
            w.symbols.push_back(part.classify(p));
        });
    return w;
}

double hamming(const Word& v, const Word& w) {
    if (v.length() != w.length() || v.length() == 0)
        throw InvalidInput("hamming: words must have equal positive length");
    size_t mism = 0;
    for (size_t i = 0; i < v.length(); ++i)
        if (v.symbols[i] != w.symbols[i]) ++mism;
    return static_cast<double>(mism) / static_cast<double>(v.length());
}

long long match_count(const Word& v, const Word& w) {
    const size_t n = v.length(), m = w.length();
    if (n == 0 || m == 0) return 0;
    // Two-row DP, O(n m) time, O(min) memory.
    const std::vector<uint32_t>& a = n >= m ? v.symbols : w.symbols;
    const std::vector<uint32_t>& b = n >= m ? w.symbols : v.symbols;
    std::vector<uint32_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        const uint32_t ai = a[i - 1];
        for (size_t j = 1; j <= b.size(); ++j) {
            cur[j] = ai == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double fbar(const Word& v, const Word& w) {
    if (v.length() != w.length() || v.length() == 0)
        throw InvalidInput("fbar: words must have equal positive length");
    long long n = static_cast<long long>(v.length());
    return static_cast<double>(n - match_count(v, w)) / static_cast<double>(n);
}

BandedFbar fbar_banded(const Word& v, const Word& w, long long band) {
    if (v.length() != w.length() || v.length() == 0)
        throw InvalidInput("fbar_banded: words must have equal positive length");
    if (band < 1) throw InvalidInput("fbar_banded: band must be >= 1");
    const long long n = static_cast<long long>(v.length());
    if (band >= n) {
        BandedFbar r;
        r.lcs = match_count(v, w);
        r.value = static_cast<double>(n - r.lcs) / static_cast<double>(n);
        r.exact = true;
        return r;
    }
    // DP over the diagonal band |i - j| <= band, rows i = 0..n.
    const long long width = 2 * band + 1;
    std::vector<uint32_t> prev(static_cast<size_t>(width), 0),
        cur(static_cast<size_t>(width), 0);
    for (long long i = 1; i <= n; ++i) {
        const uint32_t vi = v.symbols[static_cast<size_t>(i - 1)];
        for (long long off = -band; off <= band; ++off) {
            long long j = i + off;
            uint32_t best = 0;
            if (j < 1 || j > n) {
                cur[static_cast<size_t>(off + band)] = 0;
                continue;
            }
            // prev row holds j' = (i-1) + off': diag j-1 -> off, up j -> off+1,
            // left in current row: j-1 -> off-1.
            uint32_t diag = prev[static_cast<size_t>(off + band)];
            if (vi == w.symbols[static_cast<size_t>(j - 1)]) {
                best = diag + 1;
            } else {
                if (off + 1 <= band)
                    best = std::max(best, prev[static_cast<size_t>(off + 1 + band)]);
                if (off - 1 >= -band)
                    best = std::max(best, cur[static_cast<size_t>(off - 1 + band)]);
            }
            cur[static_cast<size_t>(off + band)] = best;
        }
        std::swap(prev, cur);
    }
    BandedFbar r;
    r.lcs = prev[static_cast<size_t>(band)]; // i = n, j = n
    r.value = static_cast<double>(n - r.lcs) / static_cast<double>(n);
    r.exact = (n - r.lcs) < band;
    return r;
}

double fbar_diameter(const std::vector<Vec3>& points, const MapT3& map,
                     const CubePartition& part, long long n) {
    if (points.size() < 2)
        throw InvalidInput("fbar_diameter: need at least two points");
    std::vector<Word> names;
    names.reserve(points.size());
    for (const auto& p : points) names.push_back(p_name(map, part, p, n));
    double best = 0;
    for (size_t i = 0; i < names.size(); ++i)
        for (size_t j = i + 1; j < names.size(); ++j)
            best = std::max(best, fbar(names[i], names[j]));
    return best;
}

PropertyPReport estimate_property_P(const MapT3& map,
                                    const CubePartition& part,
                                    const MeasureModel& measure, double alpha,
                                    double delta, long long n, int centers,
                                    long long samples, uint64_t seed) {
    if (alpha < 0 || alpha >= 1 || delta < 0 || delta >= 1)
        throw InvalidInput("estimate_property_P: alpha, delta must be in [0,1)");
    if (n < 1) throw InvalidInput("estimate_property_P: n must be >= 1");
    if (centers < 1 || samples < 1)
        throw InvalidInput("estimate_property_P: need centers and samples");

    PropertyPReport rep;
    rep.radius = (1.0 - alpha) / 2.0;
    rep.samples = samples;
    rep.seed = seed;

    Xoshiro256 center_rng = stream_for(seed, "property_p/centers");
    Xoshiro256 sample_rng = stream_for(seed, "property_p/samples");

    std::vector<Word> center_names;
    center_names.reserve(static_cast<size_t>(centers));
    for (int c = 0; c < centers; ++c)
        center_names.push_back(
            p_name(map, part, measure.sample(center_rng), n));

    std::vector<long long> hits(static_cast<size_t>(centers), 0);
    for (long long s = 0; s < samples; ++s) {
        Word yname = p_name(map, part, measure.sample(sample_rng), n);
        for (int c = 0; c < centers; ++c)
            if (fbar(center_names[static_cast<size_t>(c)], yname) < rep.radius)
                ++hits[static_cast<size_t>(c)];
    }

    rep.center_fractions.resize(static_cast<size_t>(centers));
    for (int c = 0; c < centers; ++c) {
        double f = static_cast<double>(hits[static_cast<size_t>(c)]) /
                   static_cast<double>(samples);
        rep.center_fractions[static_cast<size_t>(c)] = f;
        if (f > rep.best_fraction ||
            (rep.witness_center < 0 && c == 0)) {
            rep.best_fraction = f;
            rep.witness_center = c;
        }
    }
    rep.best_fraction_se = std::sqrt(
        rep.best_fraction * (1.0 - rep.best_fraction) /
        static_cast<double>(samples));
    rep.pass = rep.best_fraction > 1.0 - delta;
    if (alpha == 0.0) {
        // Radius 1/2 is sufficient but not necessary for diameter < 1: a
        // single shared symbol already gives fbar < 1, so the property holds.
        rep.trivial_alpha_zero = true;
        rep.pass = true;
    }
    return rep;
}

} // namespace fbarlab

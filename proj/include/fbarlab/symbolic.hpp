// Dyadic cube partitions of T^3, P-names, Hamming and fbar (LCS) metrics,
// and Monte Carlo estimation of the P(alpha, delta, n) property.

#pragma once

#include <cstdint>
#include <vector>

#include "fbarlab/common.hpp"
#include "fbarlab/prng.hpp"
#include "fbarlab/system.hpp"

namespace fbarlab {

// Partition of T^3 into 2^{3n} half-open dyadic cubes (lower-closed), cells
// indexed 1..2^{3n} in lexicographic (ix, iy, iz) order.  Boundaries carry
// zero Lebesgue measure and land in the cube below them.
class CubePartition {
  public:
    explicit CubePartition(int level);
    int level() const { return level_; }
    uint32_t cell_count() const { return 1u << (3 * level_); }
    uint32_t classify(const Vec3& p) const;
    // Closed bounding box of a cell (1-based index).
    Box3 cell_box(uint32_t index) const;

  private:
    int level_;
};

struct Word {
    std::vector<uint32_t> symbols;
    size_t length() const { return symbols.size(); }
    bool operator==(const Word& o) const = default;
};

// Name of q under `map` and `part`: symbol i = classify(T^i q), 0 <= i < n.
Word p_name(const MapT3& map, const CubePartition& part, const Vec3& q,
            long long n);

// Fraction of positions where the words disagree.
double hamming(const Word& v, const Word& w);

// Longest common subsequence length (lengths may differ).
long long match_count(const Word& v, const Word& w);

// fbar(v, w) = (n - LCS(v, w)) / n for words of equal length n.
double fbar(const Word& v, const Word& w);

// Banded LCS restricted to |i - j| <= band.  `exact` is set when the result
// is certified: every common subsequence of length l stays within band n - l,
// so n - lcs < band proves nothing outside the band can do better.
struct BandedFbar {
    double value = 0;
    long long lcs = 0;
    bool exact = false;
};
BandedFbar fbar_banded(const Word& v, const Word& w, long long band);

// Max pairwise fbar over the sampled points (a lower bound for the true sup).
double fbar_diameter(const std::vector<Vec3>& points, const MapT3& map,
                     const CubePartition& part, long long n);

// Center-ball certificate for property P(alpha, delta, n): if some sampled
// center x has mu({y : fbar(x,y) < (1-alpha)/2}) > 1 - delta, the triangle
// inequality upgrades the ball to a set of pairwise diameter < 1 - alpha.
struct PropertyPReport {
    bool pass = false;
    bool trivial_alpha_zero = false; // alpha == 0: fbar < 1 needs one match
    double radius = 0;               // (1 - alpha) / 2
    int witness_center = -1;
    double best_fraction = 0;
    double best_fraction_se = 0;
    std::vector<double> center_fractions;
    long long samples = 0;
    uint64_t seed = 0;
};

PropertyPReport estimate_property_P(const MapT3& map,
                                    const CubePartition& part,
                                    const MeasureModel& measure, double alpha,
                                    double delta, long long n, int centers,
                                    long long samples, uint64_t seed);

} // namespace fbarlab

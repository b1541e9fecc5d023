// Rokhlin towers and their statistical diagnostics: disjointness and
// precision certificates, monochromaticity against cube partitions, product
// towers on the cartesian square, the explicit towers of the roof
// construction, loose-Bernoullicity schedules and tower-assisted matching.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fbarlab/common.hpp"
#include "fbarlab/flow.hpp"
#include "fbarlab/prng.hpp"
#include "fbarlab/symbolic.hpp"
#include "fbarlab/system.hpp"

namespace fbarlab {

struct SystemT3 {
    const MapT3* map = nullptr;
    const MeasureModel* measure = nullptr;
};

struct RokhlinTower {
    Box3 base;
    long long height = 1;
    SystemT3 system;
};

// mu(F) via the closed form when available, otherwise Monte Carlo.
double measure_of_box(const SystemT3& system, const Box3& box,
                      long long samples, Xoshiro256& rng);

// Samples a point of F distributed per the invariant measure restricted to F.
Vec3 sample_in_box(const SystemT3& system, const Box3& box, Xoshiro256& rng);

struct DisjointnessCertificate {
    bool refuted = false;
    Vec3 witness;
    long long witness_step = 0;
    long long samples = 0;
    uint64_t seed = 0;
};

// Samples the base and looks for a return T^k p in F with 0 < k < h.  A
// refutation is a proof; a clean pass is only statistical evidence.
DisjointnessCertificate verify_disjointness(const RokhlinTower& tower,
                                            long long samples, uint64_t seed);

struct PrecisionEstimate {
    double rho = 0; // mu(F delta T^h F)
    double se = 0;
    double mu_base = 0;
    long long samples = 0;
    uint64_t seed = 0;
};

PrecisionEstimate precision(const RokhlinTower& tower, long long samples,
                            uint64_t seed);

struct MonochromReport {
    std::vector<uint32_t> labels;  // I(k) per level, 1-based cell indices
    double delta = 0;              // sum of per-level escape measures
    double delta_se = 0;
    double mu_base = 0;
    double diff_set_measure = 0;   // independent global estimate of mu(D)
    double diff_set_se = 0;
    long long samples = 0;
    uint64_t seed = 0;
};

// Estimates per-level label distributions, assigns I(k) by the smallest index
// attaining the minimal escape measure, sums Delta and cross-checks it with
// an independent Monte Carlo estimate of the difference set.
MonochromReport monochromaticity(const RokhlinTower& tower,
                                 const CubePartition& part, long long samples,
                                 uint64_t seed);

// Name of a point under the partition Q = {levels of T} u P|_{T^c}: symbols
// 1..h are tower levels, h + j is cell j outside the support.
Word q_name(const RokhlinTower& tower, const CubePartition& part,
            const Vec3& q, long long n);

struct ProductTowerResult {
    long long height = 0;       // h+ h-
    double size_estimate = 0;   // h+ h- mu(E+) mu(E-)
    double size_se = 0;
    double required_size = 0;   // c^2 mu+ mu-
    bool size_ok = false;
    double mu_plus = 0, mu_minus = 0;
    double rho_plus = 0, rho_minus = 0;
    double mu_E_plus = 0, mu_E_minus = 0;
    double mono_bound = 0;      // Delta+ mu- + Delta- mu+ when deltas given
    long long samples = 0;
    uint64_t seed = 0;
};

// Product tower T(E+ x E-, h+ h-) on the cartesian square.  Requires
// relatively prime heights and the precision condition
// (h_mp - 1) rho_pm < (1 - c) mu_pm / h_pm; membership in E+- is decided by
// iterating T^{-k h} per sampled point.
ProductTowerResult product_tower(const RokhlinTower& plus,
                                 const RokhlinTower& minus, double c,
                                 long long samples, uint64_t seed,
                                 std::optional<double> delta_plus = {},
                                 std::optional<double> delta_minus = {});

// Membership test for E^pm = intersection of T^{-k h} F over 0 < k < reps.
bool product_base_member(const RokhlinTower& tower, long long reps,
                         const Vec3& p);

struct BirkhoffMarginRow {
    long long l = 0;
    double worst_error = 0; // max over samples of |S_{l q_m} - l q_m +- l q_m eta|
    double required = 0;    // e^{-2 q_m}
    bool pass = false;
};

struct PaperTowersReport {
    RokhlinTower plus, minus;
    std::shared_ptr<const MeasureModel> measure_owner; // towers point into it
    EtaResult eta;
    long long q_m = 0;
    int m_index = 0;
    double mu = 0;
    bool height_relation_ok = false; // h+ == h- + 2
    DisjointnessCertificate disjoint_plus, disjoint_minus;
    double size_plus = 0, size_minus = 0, size_required = 0;
    bool size_plus_ok = false, size_minus_ok = false;
    PrecisionEstimate rho_plus, rho_minus;
    double rho_required = 0; // mu / (2 (h+)^2)
    bool rho_plus_ok = false, rho_minus_ok = false;
    std::vector<BirkhoffMarginRow> birkhoff_plus, birkhoff_minus;
    std::vector<std::string> diagnostics; // inequalities that failed
    bool core_pass() const {
        return height_relation_ok && !disjoint_plus.refuted &&
               !disjoint_minus.refuted && size_plus_ok && size_minus_ok;
    }
};

// Builds the explicit towers with bases I^pm x T x [q eta/4, 3 q eta/4] and
// heights 1/eta +- 1 for the map G of a roof containing the plateau
// substitution at index m, then runs all the checks.  Failures at small m
// are reported as diagnostics, not exceptions.
PaperTowersReport build_paper_towers(const NormalizedFlowMap& map, int m_index,
                                     double mu, long long samples,
                                     uint64_t seed);

// ---------------------------------------------------------------------------
// Loose-Bernoullicity schedules

struct SizeLaw {
    enum class Kind { power, geometric, constant, explicit_list };
    Kind kind = Kind::constant;
    double offset = 1, exponent = 0; // (n + offset)^exponent
    double ratio = 0.5;              // ratio^n
    double value = 1;                // constant
    std::vector<double> list;

    static SizeLaw power_law(double offset, double exponent);
    static SizeLaw geometric(double ratio);
    static SizeLaw constant_law(double v);
    static SizeLaw explicit_sizes(std::vector<double> sizes);
    // Parses "(n+1)^-0.25", "2^-n", or a plain constant.
    static SizeLaw parse(const std::string& text);

    double at(long long n) const;
    // Does sum mu_n^2 (single) resp. sum (mu+ mu-)^2 (product) diverge?
    std::optional<bool> sum_squares_diverges(bool product) const;
};

struct LBSchedule {
    enum class Mode { single, product };
    Mode mode = Mode::single;
    std::vector<double> alpha; // alpha[0..steps]
    std::vector<double> delta; // delta[0..steps-1]
    std::optional<long long> crossing_step; // first n with alpha_n >= 1/2
    bool plateaued = false;
    double final_alpha = 0;
    std::optional<bool> diverges;
};

// Runs alpha_0 = 0, alpha_{n+1} = alpha_n + delta_n with
//   single:  delta_n = mu_{n+1}^2 ((1 - alpha_n)/10)^2
//   product: delta_n = (mu+_{n+1} mu-_{n+1} / 2)^2 ((1 - alpha_n)/10)^2
LBSchedule lb_schedule(const SizeLaw& law, LBSchedule::Mode mode,
                       long long steps);
LBSchedule lb_schedule(const SizeLaw& law_plus, const SizeLaw& law_minus,
                       LBSchedule::Mode mode, long long steps);

// ---------------------------------------------------------------------------
// Tower-assisted matching

struct MatchingParams {
    double alpha = 0.0;
    double c() const {
        return alpha > 0.0 ? std::min(0.9, (1.0 - alpha) / alpha) : 0.9;
    }
};

struct MatchingBound {
    long long bound = 0;       // certified lower bound on match_count(v, w)
    long long even_credit = 0; // aligned positionwise matches in even blocks
    long long odd_credit = 0;  // LCS over odd block pairs
    long long pairs = 0;       // number of paired base hits
    double c_used = 0.9;
};

// Splits both names at paired base hits into 2L+1 blocks, credits aligned
// matches on the h-long even blocks (a full credit of h per pair when both
// points cross a monochromatic tower) and exact LCS on the odd blocks.
MatchingBound tower_matching_bound(const Word& v, const Word& w,
                                   const std::vector<long long>& hits_v,
                                   const std::vector<long long>& hits_w,
                                   long long h,
                                   const MatchingParams& params = {});

} // namespace fbarlab

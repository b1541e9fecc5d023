#include "fbarlab/towers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

namespace fbarlab {

double measure_of_box(const SystemT3& system, const Box3& box,
                      long long samples, Xoshiro256& rng) {
    box.validate();
    if (auto exact = system.measure->box_measure_exact(box)) return *exact;
    MeanAccumulator acc;
    for (long long i = 0; i < samples; ++i) {
        Vec3 p{rng.uniform(box.x0, box.x1), rng.uniform(box.y0, box.y1),
               rng.uniform(box.z0, box.z1)};
        acc.add(system.measure->density(p));
    }
    return acc.mean() * box.volume();
}

Vec3 sample_in_box(const SystemT3& system, const Box3& box, Xoshiro256& rng) {
    // Rejection against the density restricted to the box; the global
    // density is bounded, so scanning a few corners plus interior samples
    // for a majorant is unnecessary -- use an adaptive ceiling.
    double ceiling = 1.0;
    for (int trial = 0;; ++trial) {
        Vec3 p{rng.uniform(box.x0, box.x1), rng.uniform(box.y0, box.y1),
               rng.uniform(box.z0, box.z1)};
        double d = system.measure->density(p);
        if (d > ceiling) ceiling = d * 1.5; // restart-free majorant growth
        if (rng.uniform01() * ceiling <= d) return p;
        if (trial > 100000)
            throw NumericFailure("sample_in_box: rejection stalled");
    }
}

DisjointnessCertificate verify_disjointness(const RokhlinTower& tower,
                                            long long samples, uint64_t seed) {
    if (samples < 1) throw InvalidInput("verify_disjointness: samples >= 1");
    tower.base.validate();
    DisjointnessCertificate cert;
    cert.samples = samples;
    cert.seed = seed;
    Xoshiro256 rng = stream_for(seed, "tower/disjointness");
    for (long long i = 0; i < samples; ++i) {
        Vec3 p{rng.uniform(tower.base.x0, tower.base.x1),
               rng.uniform(tower.base.y0, tower.base.y1),
               rng.uniform(tower.base.z0, tower.base.z1)};
        bool hit = false;
        tower.system.map->orbit_run(
            p, tower.height - 1, [&](long long step, const Vec3& q) {
                if (!hit && tower.base.contains(q)) {
                    cert.refuted = true;
                    cert.witness = p;
                    cert.witness_step = step;
                    hit = true;
                }
            });
        if (cert.refuted) break;
    }
    return cert;
}

PrecisionEstimate precision(const RokhlinTower& tower, long long samples,
                            uint64_t seed) {
    if (samples < 1) throw InvalidInput("precision: samples >= 1");
    PrecisionEstimate est;
    est.samples = samples;
    est.seed = seed;
    Xoshiro256 rng = stream_for(seed, "tower/precision");
    est.mu_base = measure_of_box(tower.system, tower.base, samples, rng);
    long long stay = 0;
    for (long long i = 0; i < samples; ++i) {
        Vec3 p = sample_in_box(tower.system, tower.base, rng);
        Vec3 q = tower.system.map->iterate(p, tower.height);
        if (tower.base.contains(q)) ++stay;
    }
    double frac_stay = static_cast<double>(stay) / static_cast<double>(samples);
    // mu(F delta T^h F) = 2 mu(F) (1 - mu(F cap T^h F)/mu(F))
    est.rho = 2.0 * est.mu_base * (1.0 - frac_stay);
    est.se = 2.0 * est.mu_base *
             std::sqrt(frac_stay * (1.0 - frac_stay) /
                       static_cast<double>(samples));
    return est;
}

MonochromReport monochromaticity(const RokhlinTower& tower,
                                 const CubePartition& part, long long samples,
                                 uint64_t seed) {
    if (samples < 1) throw InvalidInput("monochromaticity: samples >= 1");
    if (part.cell_count() > (1u << 20))
        throw InvalidInput("monochromaticity: per-level label histograms need "
                           "partition level <= 6");
    MonochromReport rep;
    rep.samples = samples;
    rep.seed = seed;
    Xoshiro256 rng = stream_for(seed, "tower/monochromaticity");
    rep.mu_base = measure_of_box(tower.system, tower.base, samples, rng);

    const auto h = static_cast<size_t>(tower.height);
    const uint32_t cells = part.cell_count();
    std::vector<std::vector<long long>> counts(
        h, std::vector<long long>(cells + 1, 0));
    for (long long i = 0; i < samples; ++i) {
        Vec3 p = sample_in_box(tower.system, tower.base, rng);
        ++counts[0][part.classify(p)];
        if (tower.height > 1)
            tower.system.map->orbit_run(
                p, tower.height - 1, [&](long long step, const Vec3& q) {
                    ++counts[static_cast<size_t>(step)][part.classify(q)];
                });
    }
    rep.labels.resize(h);
    double var_sum = 0;
    KahanSum delta_sum;
    for (size_t k = 0; k < h; ++k) {
        long long best_count = -1;
        uint32_t best_label = 1;
        for (uint32_t j = 1; j <= cells; ++j) {
            if (counts[k][j] > best_count) { // strict: smallest index on ties
                best_count = counts[k][j];
                best_label = j;
            }
        }
        rep.labels[k] = best_label;
        double p_escape = 1.0 - static_cast<double>(best_count) /
                                    static_cast<double>(samples);
        delta_sum.add(rep.mu_base * p_escape);
        var_sum += p_escape * (1.0 - p_escape) / static_cast<double>(samples);
    }
    rep.delta = delta_sum.value();
    rep.delta_se = rep.mu_base * std::sqrt(var_sum);

    // Independent route: global samples, locate the level by backward
    // iteration, compare labels.
    Xoshiro256 rng2 = stream_for(seed, "tower/difference_set");
    long long in_diff = 0;
    for (long long i = 0; i < samples; ++i) {
        Vec3 p = tower.system.measure->sample(rng2);
        Vec3 q = p;
        for (long long k = 0; k < tower.height; ++k) {
            if (tower.base.contains(q)) {
                if (part.classify(p) != rep.labels[static_cast<size_t>(k)])
                    ++in_diff;
                break;
            }
            q = tower.system.map->apply_inverse(q);
        }
    }
    double frac_diff =
        static_cast<double>(in_diff) / static_cast<double>(samples);
    rep.diff_set_measure = frac_diff;
    rep.diff_set_se = std::sqrt(frac_diff * (1.0 - frac_diff) /
                                static_cast<double>(samples));
    return rep;
}

Word q_name(const RokhlinTower& tower, const CubePartition& part,
            const Vec3& q, long long n) {
    if (n < 1) throw InvalidInput("q_name: length must be >= 1");
    Word w;
    w.symbols.reserve(static_cast<size_t>(n));
    auto symbol = [&](const Vec3& p) -> uint32_t {
        Vec3 r = p;
        for (long long k = 0; k < tower.height; ++k) {
            if (tower.base.contains(r))
                return static_cast<uint32_t>(k + 1);
            r = tower.system.map->apply_inverse(r);
        }
        return static_cast<uint32_t>(tower.height) + part.classify(p);
    };
    w.symbols.push_back(symbol(q));
    if (n > 1)
        tower.system.map->orbit_run(q, n - 1,
                                    [&](long long, const Vec3& p) {
                                        w.symbols.push_back(symbol(p));
                                    });
    return w;
}

bool product_base_member(const RokhlinTower& tower, long long reps,
                         const Vec3& p) {
    if (!tower.base.contains(p)) return false;
    Vec3 q = p;
    for (long long k = 1; k < reps; ++k) {
        for (long long s = 0; s < tower.height; ++s)
            q = tower.system.map->apply_inverse(q);
        if (!tower.base.contains(q)) return false;
    }
    return true;
}

ProductTowerResult product_tower(const RokhlinTower& plus,
                                 const RokhlinTower& minus, double c,
                                 long long samples, uint64_t seed,
                                 std::optional<double> delta_plus,
                                 std::optional<double> delta_minus) {
    if (!(c > 0.0 && c < 1.0))
        throw InvalidInput("product_tower: c must lie in (0, 1)");
    if (std::gcd(plus.height, minus.height) != 1)
        throw PreconditionFailed(
            "product_tower: heights are not relatively prime (h+ = " +
            std::to_string(plus.height) + ", h- = " +
            std::to_string(minus.height) + ")");

    ProductTowerResult res;
    res.samples = samples;
    res.seed = seed;
    res.height = plus.height * minus.height;

    PrecisionEstimate rp = precision(plus, samples, seed ^ 0x706c7573ULL);
    PrecisionEstimate rm = precision(minus, samples, seed ^ 0x6d696e75ULL);
    res.rho_plus = rp.rho;
    res.rho_minus = rm.rho;
    res.mu_plus = rp.mu_base * static_cast<double>(plus.height);
    res.mu_minus = rm.mu_base * static_cast<double>(minus.height);

    double lhs_p = static_cast<double>(minus.height - 1) * rp.rho;
    double rhs_p = (1.0 - c) * res.mu_plus / static_cast<double>(plus.height);
    if (!(lhs_p < rhs_p))
        throw PreconditionFailed(
            "product_tower: (h- - 1) rho+ = " + std::to_string(lhs_p) +
            " !< (1-c) mu+/h+ = " + std::to_string(rhs_p));
    double lhs_m = static_cast<double>(plus.height - 1) * rm.rho;
    double rhs_m = (1.0 - c) * res.mu_minus / static_cast<double>(minus.height);
    if (!(lhs_m < rhs_m))
        throw PreconditionFailed(
            "product_tower: (h+ - 1) rho- = " + std::to_string(lhs_m) +
            " !< (1-c) mu-/h- = " + std::to_string(rhs_m));

    // mu(E+-) by sampling mu|F and testing the intersection membership.
    Xoshiro256 rng = stream_for(seed, "tower/product");
    long long keep_p = 0, keep_m = 0;
    for (long long i = 0; i < samples; ++i) {
        Vec3 p = sample_in_box(plus.system, plus.base, rng);
        if (product_base_member(plus, minus.height, p)) ++keep_p;
        Vec3 q = sample_in_box(minus.system, minus.base, rng);
        if (product_base_member(minus, plus.height, q)) ++keep_m;
    }
    double fp = static_cast<double>(keep_p) / static_cast<double>(samples);
    double fm = static_cast<double>(keep_m) / static_cast<double>(samples);
    res.mu_E_plus = rp.mu_base * fp;
    res.mu_E_minus = rm.mu_base * fm;
    res.size_estimate =
        static_cast<double>(res.height) * res.mu_E_plus * res.mu_E_minus;
    double se_fp = std::sqrt(fp * (1 - fp) / static_cast<double>(samples));
    double se_fm = std::sqrt(fm * (1 - fm) / static_cast<double>(samples));
    res.size_se = static_cast<double>(res.height) * rp.mu_base * rm.mu_base *
                  std::sqrt(se_fp * se_fp * fm * fm + se_fm * se_fm * fp * fp);
    res.required_size = c * c * res.mu_plus * res.mu_minus;
    res.size_ok = res.size_estimate >= res.required_size - 3.0 * res.size_se;
    if (delta_plus && delta_minus)
        res.mono_bound = *delta_plus * res.mu_minus + *delta_minus * res.mu_plus;
    return res;
}

PaperTowersReport build_paper_towers(const NormalizedFlowMap& map, int m_index,
                                     double mu, long long samples,
                                     uint64_t seed) {
    const RotationSpec& spec = map.spec();
    const RoofFunction& roof = map.roof();
    if (!(mu > 0.0 && mu < 0.25))
        throw InvalidInput("build_paper_towers: mu must be in (0, 1/4)");
    bool have_sub = false;
    for (const auto& t : roof.x_plateau_terms())
        if (t.poly.n_index == m_index) have_sub = true;
    if (!have_sub)
        throw PreconditionFailed(
            "build_paper_towers: roof has no plateau substitution at index " +
            std::to_string(m_index));

    PaperTowersReport rep;
    rep.m_index = m_index;
    rep.mu = mu;
    rep.q_m = spec.q(m_index);
    rep.eta = select_eta(m_index, spec);
    const double q = static_cast<double>(rep.q_m);
    const double eta = rep.eta.eta;

    // I^+ around 1/(4 q_m), I^- around 3/(4 q_m), half-width 2 mu / q_m;
    // z-interval [q eta / 4, 3 q eta / 4].
    auto base_box = [&](double center) {
        Box3 b;
        b.x0 = center - 2.0 * mu / q;
        b.x1 = center + 2.0 * mu / q;
        b.y0 = 0.0;
        b.y1 = 1.0;
        b.z0 = q * eta / 4.0;
        b.z1 = 3.0 * q * eta / 4.0;
        return b;
    };

    rep.plus.base = base_box(1.0 / (4.0 * q));
    rep.plus.height = rep.eta.inv_eta + 1;
    rep.minus.base = base_box(3.0 / (4.0 * q));
    rep.minus.height = rep.eta.inv_eta - 1;
    rep.height_relation_ok = rep.plus.height == rep.minus.height + 2;

    rep.measure_owner = std::make_shared<FlowInvariantMeasure>(
        roof, spec, map.params().roof_argument);
    rep.plus.system = {&map, rep.measure_owner.get()};
    rep.minus.system = {&map, rep.measure_owner.get()};

    rep.disjoint_plus = verify_disjointness(rep.plus, samples, seed ^ 1);
    rep.disjoint_minus = verify_disjointness(rep.minus, samples, seed ^ 2);

    Xoshiro256 rng = stream_for(seed, "tower/paper_sizes");
    double muF_p = measure_of_box(rep.plus.system, rep.plus.base, samples, rng);
    double muF_m =
        measure_of_box(rep.minus.system, rep.minus.base, samples, rng);
    rep.size_plus = muF_p * static_cast<double>(rep.plus.height);
    rep.size_minus = muF_m * static_cast<double>(rep.minus.height);
    rep.size_required = mu;
    rep.size_plus_ok = rep.size_plus > mu;
    rep.size_minus_ok = rep.size_minus > mu;

    long long rho_samples = std::min<long long>(samples, 20000);
    rep.rho_plus = precision(rep.plus, rho_samples, seed ^ 3);
    rep.rho_minus = precision(rep.minus, rho_samples, seed ^ 4);
    rep.rho_required =
        mu / (2.0 * static_cast<double>(rep.plus.height) *
              static_cast<double>(rep.plus.height));
    rep.rho_plus_ok = rep.rho_plus.rho < rep.rho_required;
    rep.rho_minus_ok = rep.rho_minus.rho < rep.rho_required;

    // Birkhoff approximation margins: |S_{l q_m} psi - l q_m +- l q_m eta|
    // over base samples, per block count l.
    const double required = std::exp(-2.0 * q);
    long long l_cap = rep.plus.height / rep.q_m + 1;
    Xoshiro256 brng = stream_for(seed, "tower/birkhoff_margin");
    auto margin_rows = [&](const Box3& box, double sign) {
        std::vector<BirkhoffMarginRow> rows;
        const int pts = 64;
        std::vector<std::array<double, 2>> bases;
        for (int i = 0; i < pts; ++i)
            bases.push_back(
                {brng.uniform(box.x0, box.x1), brng.uniform(box.y0, box.y1)});
        for (long long l = 1; l <= l_cap; ++l) {
            BirkhoffMarginRow row;
            row.l = l;
            row.required = required;
            double worst = 0;
            for (const auto& b : bases) {
                double s = birkhoff_sum(
                    [&roof](double x, double y) { return roof(x, y); }, spec,
                    l * rep.q_m, {b[0], b[1]});
                double lq = static_cast<double>(l) * q;
                worst = std::max(worst, std::abs(s - lq + sign * lq * eta));
            }
            row.worst_error = worst;
            row.pass = worst < required;
            rows.push_back(row);
        }
        return rows;
    };
    rep.birkhoff_minus = margin_rows(rep.minus.base, +1.0); // S ~ lq(1 - eta)
    rep.birkhoff_plus = margin_rows(rep.plus.base, -1.0);   // S ~ lq(1 + eta)

    if (!rep.height_relation_ok)
        rep.diagnostics.push_back("height relation h+ = h- + 2 failed");
    if (rep.disjoint_plus.refuted)
        rep.diagnostics.push_back("tower+ disjointness refuted at step " +
                                  std::to_string(rep.disjoint_plus.witness_step));
    if (rep.disjoint_minus.refuted)
        rep.diagnostics.push_back("tower- disjointness refuted at step " +
                                  std::to_string(rep.disjoint_minus.witness_step));
    if (!rep.size_plus_ok)
        rep.diagnostics.push_back("size mu_T+ = " + std::to_string(rep.size_plus) +
                                  " not > mu = " + std::to_string(mu));
    if (!rep.size_minus_ok)
        rep.diagnostics.push_back("size mu_T- = " + std::to_string(rep.size_minus) +
                                  " not > mu = " + std::to_string(mu));
    if (!rep.rho_plus_ok)
        rep.diagnostics.push_back(
            "precision rho+ = " + std::to_string(rep.rho_plus.rho) +
            " not < mu/(2 h+^2) = " + std::to_string(rep.rho_required) +
            " (asymptotic inequality, expected to fail at small m)");
    if (!rep.rho_minus_ok)
        rep.diagnostics.push_back(
            "precision rho- = " + std::to_string(rep.rho_minus.rho) +
            " not < mu/(2 h+^2) = " + std::to_string(rep.rho_required) +
            " (asymptotic inequality, expected to fail at small m)");
    for (const auto& rows : {rep.birkhoff_plus, rep.birkhoff_minus})
        for (const auto& r : rows)
            if (!r.pass) {
                rep.diagnostics.push_back(
                    "Birkhoff approximation margin fails at l = " +
                    std::to_string(r.l) + ": " + std::to_string(r.worst_error) +
                    " !< e^{-2 q_m} = " + std::to_string(r.required));
                break;
            }
    return rep;
}

// ---------------------------------------------------------------------------
// Size laws and schedules

SizeLaw SizeLaw::power_law(double offset, double exponent) {
    SizeLaw l;
    l.kind = Kind::power;
    l.offset = offset;
    l.exponent = exponent;
    return l;
}

SizeLaw SizeLaw::geometric(double ratio) {
    SizeLaw l;
    l.kind = Kind::geometric;
    l.ratio = ratio;
    return l;
}

SizeLaw SizeLaw::constant_law(double v) {
    SizeLaw l;
    l.kind = Kind::constant;
    l.value = v;
    return l;
}

SizeLaw SizeLaw::explicit_sizes(std::vector<double> sizes) {
    SizeLaw l;
    l.kind = Kind::explicit_list;
    l.list = std::move(sizes);
    return l;
}

SizeLaw SizeLaw::parse(const std::string& text) {
    std::smatch m;
    static const std::regex power_re(
        R"(^\(n\+([0-9]*\.?[0-9]+)\)\^(-?[0-9]*\.?[0-9]+)$)");
    static const std::regex geom_re(R"(^([0-9]*\.?[0-9]+)\^-n$)");
    static const std::regex const_re(R"(^[0-9]*\.?[0-9]+$)");
    if (std::regex_match(text, m, power_re))
        return power_law(std::stod(m[1]), std::stod(m[2]));
    if (std::regex_match(text, m, geom_re))
        return geometric(1.0 / std::stod(m[1]));
    if (std::regex_match(text, const_re)) return constant_law(std::stod(text));
    throw InvalidInput("unrecognized size law: '" + text +
                       "' (expected \"(n+a)^b\", \"b^-n\" or a constant)");
}

double SizeLaw::at(long long n) const {
    switch (kind) {
        case Kind::power:
            return std::pow(static_cast<double>(n) + offset, exponent);
        case Kind::geometric:
            return std::pow(ratio, static_cast<double>(n));
        case Kind::constant:
            return value;
        case Kind::explicit_list:
            if (n < 0 || n >= static_cast<long long>(list.size()))
                throw InvalidInput("size law: index outside explicit list");
            return list[static_cast<size_t>(n)];
    }
    return 0;
}

std::optional<bool> SizeLaw::sum_squares_diverges(bool product) const {
    // single: terms mu_n^2; product with equal laws: (mu_n^2/2)^2.
    switch (kind) {
        case Kind::power: {
            double p = product ? 4.0 * exponent : 2.0 * exponent;
            return p >= -1.0;
        }
        case Kind::geometric:
            return ratio >= 1.0;
        case Kind::constant:
            return value > 0.0;
        case Kind::explicit_list:
            return std::nullopt; // finite data cannot decide
    }
    return std::nullopt;
}

LBSchedule lb_schedule(const SizeLaw& law, LBSchedule::Mode mode,
                       long long steps) {
    return lb_schedule(law, law, mode, steps);
}

LBSchedule lb_schedule(const SizeLaw& law_plus, const SizeLaw& law_minus,
                       LBSchedule::Mode mode, long long steps) {
    if (steps < 0) throw InvalidInput("lb_schedule: steps must be >= 0");
    LBSchedule sch;
    sch.mode = mode;
    sch.alpha.reserve(static_cast<size_t>(steps) + 1);
    sch.alpha.push_back(0.0);
    double alpha = 0.0;
    for (long long n = 0; n < steps; ++n) {
        double mu_next_p = law_plus.at(n + 1);
        double mu_next_m = law_minus.at(n + 1);
        if (!(mu_next_p > 0.0 && mu_next_p <= 1.0 && mu_next_m > 0.0 &&
              mu_next_m <= 1.0))
            throw InvalidInput("lb_schedule: sizes must lie in (0, 1]");
        double shrink = (1.0 - alpha) / 10.0;
        double delta;
        if (mode == LBSchedule::Mode::single)
            delta = mu_next_p * mu_next_p * shrink * shrink;
        else {
            double half_prod = mu_next_p * mu_next_m / 2.0;
            delta = half_prod * half_prod * shrink * shrink;
        }
        sch.delta.push_back(delta);
        alpha += delta;
        sch.alpha.push_back(alpha);
        if (!sch.crossing_step && alpha >= 0.5)
            sch.crossing_step = n + 1;
        if (delta == 0.0 || delta < 1e-18 * (1.0 - alpha)) {
            sch.plateaued = true;
            break;
        }
    }
    sch.final_alpha = sch.alpha.back();
    sch.diverges =
        law_plus.sum_squares_diverges(mode == LBSchedule::Mode::product);
    return sch;
}

// ---------------------------------------------------------------------------
// Tower-assisted matching

MatchingBound tower_matching_bound(const Word& v, const Word& w,
                                   const std::vector<long long>& hits_v,
                                   const std::vector<long long>& hits_w,
                                   long long h, const MatchingParams& params) {
    if (h < 1) throw InvalidInput("tower_matching_bound: height must be >= 1");
    auto validate = [&](const std::vector<long long>& hits, const Word& word,
                        const char* tag) {
        long long prev = -h;
        for (long long t : hits) {
            if (t < 0 || t + h > static_cast<long long>(word.length()))
                throw InvalidInput(std::string("tower_matching_bound: ") + tag +
                                   " hit does not fit inside the name");
            if (t - prev < h)
                throw InvalidInput(std::string("tower_matching_bound: ") + tag +
                                   " hits must be strictly increasing with "
                                   "gaps >= h");
            prev = t;
        }
    };
    validate(hits_v, v, "v");
    validate(hits_w, w, "w");

    MatchingBound res;
    res.c_used = params.c();
    const size_t pairs = std::min(hits_v.size(), hits_w.size());
    res.pairs = static_cast<long long>(pairs);

    auto slice = [](const Word& word, long long a, long long b) {
        Word s;
        s.symbols.assign(word.symbols.begin() + a, word.symbols.begin() + b);
        return s;
    };

    long long pv = 0, pw = 0; // cursor past the previous even block
    for (size_t k = 0; k < pairs; ++k) {
        long long av = hits_v[k], aw = hits_w[k];
        // odd blocks in front of the k-th even pair
        Word ov = slice(v, pv, av);
        Word ow = slice(w, pw, aw);
        res.odd_credit += match_count(ov, ow);
        // aligned positionwise agreement inside the even blocks; a full
        // credit of h per pair in the monochromatic case
        for (long long i = 0; i < h; ++i)
            if (v.symbols[static_cast<size_t>(av + i)] ==
                w.symbols[static_cast<size_t>(aw + i)])
                ++res.even_credit;
        pv = av + h;
        pw = aw + h;
    }
    Word tv = slice(v, pv, static_cast<long long>(v.length()));
    Word tw = slice(w, pw, static_cast<long long>(w.length()));
    res.odd_credit += match_count(tv, tw);
    res.bound = res.even_credit + res.odd_credit;
    return res;
}

} // namespace fbarlab

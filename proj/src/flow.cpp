#include "fbarlab/flow.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace fbarlab {

namespace {

long long mulmod_ll(long long a, long long b, long long m) {
    return static_cast<long long>(static_cast<__int128>(a) * b %
                                  static_cast<__int128>(m));
}

// Base orbit with exact integer residues: position after k steps is
// (x0 + (rx + k sx mod qx)/qx, ...).
struct RotOrbit {
    const RotationSpec* spec;
    double x0, y0;
    long long qx, qy, sx, sy;
    long long rx = 0, ry = 0;

    RotOrbit(const RotationSpec& s, double x, double y)
        : spec(&s), x0(x), y0(y) {
        qx = s.x().denominator();
        qy = s.y().denominator();
        sx = static_cast<long long>(s.x().frac_multiple(1).num);
        sy = static_cast<long long>(s.y().frac_multiple(1).num);
    }

    std::array<double, 2> point() const {
        return {frac(x0 + static_cast<double>(rx) / static_cast<double>(qx)),
                frac(y0 + static_cast<double>(ry) / static_cast<double>(qy))};
    }

    std::array<double, 2> point_at(long long k) const {
        long long ax = (rx + mulmod_ll(((k % qx) + qx) % qx, sx, qx)) % qx;
        long long ay = (ry + mulmod_ll(((k % qy) + qy) % qy, sy, qy)) % qy;
        return {frac(x0 + static_cast<double>(ax) / static_cast<double>(qx)),
                frac(y0 + static_cast<double>(ay) / static_cast<double>(qy))};
    }

    void advance(long long k) {
        rx = (rx + mulmod_ll(((k % qx) + qx) % qx, sx, qx)) % qx;
        ry = (ry + mulmod_ll(((k % qy) + qy) % qy, sy, qy)) % qy;
    }

    void step_forward() {
        rx += sx;
        if (rx >= qx) rx -= qx;
        ry += sy;
        if (ry >= qy) ry -= qy;
    }

    void step_backward() {
        rx -= sx;
        if (rx < 0) rx += qx;
        ry -= sy;
        if (ry < 0) ry += qy;
    }
};

double roof_at(const RoofFunction& roof, const std::array<double, 2>& p) {
    return roof(p[0], p[1]);
}

// Advances the orbit by pi(t, ., s) steps; returns the new height.
double flow_kernel(RotOrbit& orb, double s, double t, const RoofFunction& roof,
                   const FlowParams& params) {
    if (t >= 0) {
        double target = t + s;
        KahanSum partial; // S_n along the orbit
        long long n = 0;
        for (;;) {
            double phi = roof_at(roof, orb.point());
            if (target < partial.value() + phi) break;
            partial.add(phi);
            orb.step_forward();
            if (++n > params.step_cap)
                throw CapExceeded("flow: return count exceeded step cap " +
                                  std::to_string(params.step_cap));
        }
        double s2 = target - partial.value();
        if (s2 < 0) s2 = 0; // compensated-sum rounding guard
        // wrap heights that sit within tolerance of the roof
        double phi_here = roof_at(roof, orb.point());
        if (phi_here - s2 <= params.wrap_tolerance) {
            orb.step_forward();
            s2 = 0;
        }
        return s2;
    }
    // backward: least n >= 0 with s + t + sum_{k=1}^{n} phi(T^{-k}) >= 0
    double target = s + t;
    KahanSum partial;
    long long n = 0;
    while (target + partial.value() < 0) {
        orb.step_backward();
        partial.add(roof_at(roof, orb.point()));
        if (++n > params.step_cap)
            throw CapExceeded("flow: backward return count exceeded cap");
    }
    double s2 = target + partial.value();
    if (s2 < 0) s2 = 0;
    double phi_here = roof_at(roof, orb.point());
    if (phi_here - s2 <= params.wrap_tolerance) {
        orb.step_forward();
        s2 = 0;
    }
    return s2;
}

void check_canonical(const FlowPoint& p, const RoofFunction& roof) {
    double phi = roof(p.x, p.y);
    if (!(p.s >= 0.0) || !(p.s < phi))
        throw PreconditionFailed("flow point is not canonical: s = " +
                                 std::to_string(p.s) + ", phi = " +
                                 std::to_string(phi));
}

// One application of G starting from the orbit state (base at the current
// orbit position, normalized height z).  Mutates the orbit to the image base
// position and returns the image z.
double g_step(RotOrbit& orb, double z, const RoofFunction& roof,
              const FlowParams& params) {
    const bool translated =
        params.roof_argument == FlowParams::RoofArgument::translated;
    auto cur = orb.point();
    auto shifted = orb.point_at(1);
    double s;
    if (translated) {
        s = z * roof_at(roof, shifted);
    } else {
        s = z * roof_at(roof, cur);
    }
    orb.advance(1); // base of the flow representative
    // canonicalize the representative through the flow relation
    for (;;) {
        double phi = roof_at(roof, orb.point());
        if (s < phi) break;
        s -= phi;
        orb.step_forward();
    }
    double s2 = flow_kernel(orb, s, 1.0, roof, params);
    orb.advance(-1); // undo the normalization shift
    double denom = translated ? roof_at(roof, orb.point_at(1))
                              : roof_at(roof, orb.point());
    double z2 = s2 / denom;
    if (z2 >= 1.0) z2 = frac(z2); // printed reading can overflow the fiber
    return z2;
}

double g_step_inverse(RotOrbit& orb, double z, const RoofFunction& roof,
                      const FlowParams& params) {
    const bool translated =
        params.roof_argument == FlowParams::RoofArgument::translated;
    double s;
    if (translated) {
        s = z * roof_at(roof, orb.point_at(1));
    } else {
        s = z * roof_at(roof, orb.point());
    }
    orb.advance(1);
    for (;;) {
        double phi = roof_at(roof, orb.point());
        if (s < phi) break;
        s -= phi;
        orb.step_forward();
    }
    double s2 = flow_kernel(orb, s, -1.0, roof, params);
    orb.advance(-1);
    double denom = translated ? roof_at(roof, orb.point_at(1))
                              : roof_at(roof, orb.point());
    double z2 = s2 / denom;
    if (z2 >= 1.0) z2 = frac(z2);
    return z2;
}

} // namespace

long long return_count(double t, const FlowPoint& p, const RoofFunction& roof,
                       const RotationSpec& spec, const FlowParams& params) {
    if (t < 0) throw InvalidInput("return_count: t must be >= 0");
    check_canonical(p, roof);
    RotOrbit orb(spec, p.x, p.y);
    double target = t + p.s;
    KahanSum partial;
    long long n = 0;
    for (;;) {
        double phi = roof_at(roof, orb.point());
        if (target < partial.value() + phi) return n;
        partial.add(phi);
        orb.step_forward();
        if (++n > params.step_cap)
            throw CapExceeded("return_count: exceeded step cap");
    }
}

FlowPoint flow(double t, FlowPoint p, const RoofFunction& roof,
               const RotationSpec& spec, const FlowParams& params) {
    check_canonical(p, roof);
    RotOrbit orb(spec, p.x, p.y);
    double s2 = flow_kernel(orb, p.s, t, roof, params);
    auto b = orb.point();
    return {b[0], b[1], s2};
}

Vec3 time_one_normalized(const Vec3& q, const RoofFunction& roof,
                         const RotationSpec& spec, const FlowParams& params) {
    RotOrbit orb(spec, q.x, q.y);
    double z2 = g_step(orb, q.z, roof, params);
    auto b = orb.point();
    return {b[0], b[1], z2};
}

Vec3 time_one_normalized_inverse(const Vec3& q, const RoofFunction& roof,
                                 const RotationSpec& spec,
                                 const FlowParams& params) {
    RotOrbit orb(spec, q.x, q.y);
    double z2 = g_step_inverse(orb, q.z, roof, params);
    auto b = orb.point();
    return {b[0], b[1], z2};
}

NormalizedFlowMap::NormalizedFlowMap(const RoofFunction& roof,
                                     const RotationSpec& spec,
                                     FlowParams params)
    : roof_(&roof), spec_(&spec), params_(params) {
    double inf = roof.inf_bound();
    if (!(inf > 0.0) && !(roof.min_on_grid(64) > 0.0))
        throw InvalidRoof("normalized flow requires a strictly positive roof");
}

Vec3 NormalizedFlowMap::apply(const Vec3& p) const {
    return time_one_normalized(p, *roof_, *spec_, params_);
}

Vec3 NormalizedFlowMap::apply_inverse(const Vec3& p) const {
    return time_one_normalized_inverse(p, *roof_, *spec_, params_);
}

void NormalizedFlowMap::orbit_run(
    const Vec3& start, long long steps,
    const std::function<void(long long, const Vec3&)>& visit) const {
    RotOrbit orb(*spec_, start.x, start.y);
    double z = start.z;
    for (long long i = 1; i <= steps; ++i) {
        z = g_step(orb, z, *roof_, params_);
        auto b = orb.point();
        visit(i, {b[0], b[1], z});
    }
}

void TranslationMap::orbit_run(
    const Vec3& start, long long steps,
    const std::function<void(long long, const Vec3&)>& visit) const {
    RotOrbit orb(*spec_, start.x, start.y);
    for (long long i = 1; i <= steps; ++i) {
        orb.step_forward();
        auto b = orb.point();
        visit(i, {b[0], b[1], start.z});
    }
}

// --------------------------------------------------------------------------
// Invariant measure

namespace {

// int_a^b e^{2 pi i k u} du (antiderivative route; periodic integrand, so
// shifted bounds are fine).
std::complex<double> exp_integral(int k, double a, double b) {
    if (k == 0) return {b - a, 0.0};
    std::complex<double> den(0.0, kTwoPi * k);
    std::complex<double> eb = std::polar(1.0, kTwoPi * k * b);
    std::complex<double> ea = std::polar(1.0, kTwoPi * k * a);
    return (eb - ea) / den;
}

// Exact integral of the roof over [x0+dx, x1+dx] x [y0+dy, y1+dy].
double roof_box_integral(const RoofFunction& roof, double x0, double x1,
                         double y0, double y1, double dx, double dy) {
    double ax = x0 + dx, bx = x1 + dx;
    double ay = y0 + dy, by = y1 + dy;
    double lenx = x1 - x0, leny = y1 - y0;
    KahanSum s;
    s.add(lenx * leny); // the constant 1
    for (const auto& [k, c] : roof.base().coefficients()) {
        std::complex<double> v =
            c * exp_integral(k[0], ax, bx) * exp_integral(k[1], ay, by);
        s.add(v.real());
    }
    for (const auto& t : roof.x_cos_terms()) {
        // amp cos(2 pi f x): antiderivative amp sin(2 pi f x)/(2 pi f)
        double f = static_cast<double>(t.freq);
        s.add(leny * t.amp * (std::sin(kTwoPi * f * bx) - std::sin(kTwoPi * f * ax)) /
              (kTwoPi * f));
    }
    for (const auto& t : roof.y_cos_terms()) {
        double f = static_cast<double>(t.freq);
        s.add(lenx * t.amp * (std::sin(kTwoPi * f * by) - std::sin(kTwoPi * f * ay)) /
              (kTwoPi * f));
    }
    for (const auto& t : roof.x_plateau_terms()) {
        // sum b_j sin(2 pi j q x): antiderivative -b_j cos(..)/(2 pi j q)
        const auto& coeffs = t.poly.series.coeffs();
        long long base = t.poly.series.base_freq();
        KahanSum part;
        for (size_t j = 0; j < coeffs.size(); ++j) {
            double f = static_cast<double>(base) * static_cast<double>(j + 1);
            part.add(coeffs[j] *
                     (std::cos(kTwoPi * f * ax) - std::cos(kTwoPi * f * bx)) /
                     (kTwoPi * f));
        }
        s.add(leny * part.value());
    }
    return s.value();
}

} // namespace

FlowInvariantMeasure::FlowInvariantMeasure(const RoofFunction& roof,
                                           const RotationSpec& spec,
                                           FlowParams::RoofArgument arg)
    : roof_(&roof), spec_(&spec), arg_(arg) {
    avg_ = roof.average();
    sup_density_ = roof.sup_bound() / avg_;
}

double FlowInvariantMeasure::density(const Vec3& p) const {
    double x = p.x, y = p.y;
    if (arg_ == FlowParams::RoofArgument::translated) {
        auto b = spec_->rotate({x, y}, 1);
        x = b[0];
        y = b[1];
    }
    return (*roof_)(x, y) / avg_;
}

Vec3 FlowInvariantMeasure::sample(Xoshiro256& rng) const {
    for (;;) {
        Vec3 p{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        if (rng.uniform01() * sup_density_ <= density(p)) return p;
    }
}

std::optional<double> FlowInvariantMeasure::box_measure_exact(
    const Box3& b) const {
    double dx = 0, dy = 0;
    if (arg_ == FlowParams::RoofArgument::translated) {
        dx = spec_->omega_x();
        dy = spec_->omega_y();
    }
    double xy =
        roof_box_integral(*roof_, b.x0, b.x1, b.y0, b.y1, dx, dy);
    return (b.z1 - b.z0) * xy / avg_;
}

MeasureEstimate invariant_measure(const Box3& box, const RoofFunction& roof,
                                  const RotationSpec& spec, long long samples,
                                  uint64_t seed, const FlowParams& params) {
    if (samples <= 0) throw InvalidInput("invariant_measure: samples >= 1");
    box.validate();
    FlowInvariantMeasure measure(roof, spec, params.roof_argument);
    Xoshiro256 rng = stream_for(seed, "flow/invariant_measure");
    MeanAccumulator acc;
    for (long long i = 0; i < samples; ++i) {
        Vec3 p{rng.uniform(box.x0, box.x1), rng.uniform(box.y0, box.y1),
               rng.uniform(box.z0, box.z1)};
        acc.add(measure.density(p));
    }
    MeasureEstimate est;
    est.estimate = acc.mean() * box.volume();
    est.se = acc.stderr_of_mean() * box.volume();
    est.closed_form = measure.box_measure_exact(box);
    est.samples = samples;
    est.seed = seed;
    return est;
}

} // namespace fbarlab

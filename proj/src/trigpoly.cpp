#include "fbarlab/trigpoly.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace fbarlab {

namespace {

Freq negate(const Freq& k) { return {-k[0], -k[1]}; }

int l1(const Freq& k) { return std::abs(k[0]) + std::abs(k[1]); }

// Signed distance from an exact fraction r/den in [0,1) to the nearest
// integer, returned as a double.
double signed_frac_distance(const Rational& f) {
    __int128 twice = 2 * f.num;
    if (twice <= f.den) return f.to_double();
    return static_cast<double>(f.num - f.den) / static_cast<double>(f.den);
}

} // namespace

TrigPoly::TrigPoly(int dim) : dim_(dim) {
    if (dim < 1 || dim > 2) throw InvalidInput("TrigPoly dimension must be 1 or 2");
}

void TrigPoly::set_coef(Freq k, std::complex<double> c) {
    if (dim_ == 1 && k[1] != 0)
        throw InvalidInput("dim-1 polynomial cannot carry a second frequency");
    if (k[0] == 0 && k[1] == 0) {
        if (c.imag() != 0.0)
            throw InvalidInput("constant coefficient must be real");
        coef_[k] = c;
        prune(k);
        return;
    }
    coef_[k] = c;
    coef_[negate(k)] = std::conj(c);
    prune(k);
    prune(negate(k));
}

void TrigPoly::prune(Freq k) {
    auto it = coef_.find(k);
    if (it != coef_.end() && it->second == 0.0) coef_.erase(it);
}

std::complex<double> TrigPoly::coef(Freq k) const {
    auto it = coef_.find(k);
    return it == coef_.end() ? std::complex<double>(0.0) : it->second;
}

int TrigPoly::degree() const {
    int deg = 0;
    for (const auto& [k, c] : coef_) deg = std::max(deg, l1(k));
    return deg;
}

double TrigPoly::evaluate(std::array<double, 2> theta) const {
    double re = 0, im = 0;
    KahanSum sre, sim;
    for (const auto& [k, c] : coef_) {
        double phase = kTwoPi * (k[0] * theta[0] + k[1] * theta[1]);
        double cs = std::cos(phase), sn = std::sin(phase);
        sre.add(c.real() * cs - c.imag() * sn);
        sim.add(c.real() * sn + c.imag() * cs);
    }
    re = sre.value();
    im = sim.value();
    (void)im; // Hermitian symmetry makes it rounding noise
    return re;
}

TrigPoly TrigPoly::derivative(int axis) const {
    if (axis < 0 || axis >= dim_)
        throw InvalidInput("derivative axis out of range");
    TrigPoly d(dim_);
    for (const auto& [k, c] : coef_) {
        if (k[axis] == 0) continue;
        d.coef_[k] = std::complex<double>(0.0, kTwoPi * k[axis]) * c;
    }
    return d;
}

double TrigPoly::norm_bound(int r) const {
    KahanSum s;
    for (const auto& [k, c] : coef_) {
        if (k[0] == 0 && k[1] == 0) {
            if (r == 0) s.add(std::abs(c));
            continue;
        }
        s.add(std::pow(kTwoPi * l1(k), r) * std::abs(c));
    }
    return s.value();
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
    TrigPoly r(std::max(dim_, other.dim_));
    r.coef_ = coef_;
    for (const auto& [k, c] : other.coef_) {
        auto it = r.coef_.find(k);
        if (it == r.coef_.end())
            r.coef_[k] = c;
        else {
            it->second += c;
            if (it->second == 0.0) r.coef_.erase(it);
        }
    }
    return r;
}

TrigPoly TrigPoly::operator-(const TrigPoly& other) const {
    return *this + other.scaled(-1.0);
}

TrigPoly TrigPoly::scaled(double factor) const {
    TrigPoly r(dim_);
    if (factor == 0.0) return r;
    for (const auto& [k, c] : coef_) r.coef_[k] = factor * c;
    return r;
}

TrigPoly TrigPoly::cosine(int dim, Freq k, double amplitude) {
    TrigPoly p(dim);
    p.set_coef(k, {amplitude / 2.0, 0.0});
    return p;
}

TrigPoly TrigPoly::sine(int dim, Freq k, double amplitude) {
    TrigPoly p(dim);
    p.set_coef(k, {0.0, -amplitude / 2.0}); // a sin = a/(2i)(e^{i.} - e^{-i.})
    return p;
}

double bridge_constant(int dim, int r) {
    // sum_{k != 0} |k|_1^{-(d+1)}: pi^2/3 for d=1, 2 pi^2/3 for d=2.
    const double pi2_3 = 3.2898681336964528729;
    double s = dim == 1 ? pi2_3 : 2.0 * pi2_3;
    return std::ceil(std::pow(kTwoPi, r) * s);
}

double freq_distance(const Freq& k, const RotationSpec& spec) {
    // {k1 Omega} + {k2 Omega'} as an exact fraction over qx*qy, then the
    // distance of the sum to the nearest integer.
    Rational fx = spec.x().frac_multiple(k[0]);
    Rational fy = spec.y().frac_multiple(k[1]);
    __int128 den = fx.den * fy.den;
    __int128 num = fx.num * fy.den + fy.num * fx.den;
    if (num >= den) num -= den; // each part < den, so sum < 2 den
    __int128 alt = den - num;
    __int128 d = num <= alt ? num : alt;
    return static_cast<double>(d) / static_cast<double>(den);
}

std::complex<double> rotation_multiplier(const Freq& k,
                                         const RotationSpec& spec,
                                         double* abs_out) {
    Rational fx = spec.x().frac_multiple(k[0]);
    Rational fy = spec.y().frac_multiple(k[1]);
    __int128 den = fx.den * fy.den;
    __int128 num = fx.num * fy.den + fy.num * fx.den;
    if (num >= den) num -= den;
    double theta = signed_frac_distance({num, den}); // in (-1/2, 1/2]
    // e^{2 pi i theta} - 1 = (-2 sin^2(pi theta), sin(2 pi theta))
    double sp = std::sin(M_PI * theta);
    std::complex<double> mult(-2.0 * sp * sp, std::sin(kTwoPi * theta));
    if (abs_out) *abs_out = 2.0 * std::abs(sp);
    return mult;
}

TrigPoly solve_cohomological(const TrigPoly& P, const RotationSpec& spec,
                             double floor) {
    if (!P.zero_average())
        throw InvalidInput("solve_cohomological: polynomial has non-zero average");
    TrigPoly Q(P.dim());
    for (const auto& [k, c] : P.coefficients()) {
        if (k[0] == 0 && k[1] == 0) continue;
        double absmult = 0;
        std::complex<double> mult = rotation_multiplier(k, spec, &absmult);
        if (absmult < floor)
            throw NearResonance(
                "solve_cohomological: |e^{2 pi i <k,omega>} - 1| = " +
                std::to_string(absmult) + " below floor at k = (" +
                std::to_string(k[0]) + "," + std::to_string(k[1]) + ")");
        Q.set_coef(k, c / mult);
    }
    return Q;
}

double birkhoff_sum(const std::function<double(double, double)>& f,
                    const RotationSpec& spec, long long m,
                    std::array<double, 2> theta) {
    if (m < 0) throw InvalidInput("birkhoff_sum: m must be >= 0");
    const long long qx = spec.x().denominator();
    const long long qy = spec.y().denominator();
    const long long sx = static_cast<long long>(
        spec.x().frac_multiple(1).num); // step residues
    const long long sy = static_cast<long long>(spec.y().frac_multiple(1).num);
    long long rx = 0, ry = 0;
    KahanSum sum;
    for (long long j = 0; j < m; ++j) {
        double x = frac(theta[0] + static_cast<double>(rx) / static_cast<double>(qx));
        double y = frac(theta[1] + static_cast<double>(ry) / static_cast<double>(qy));
        sum.add(f(x, y));
        rx += sx;
        if (rx >= qx) rx -= qx;
        ry += sy;
        if (ry >= qy) ry -= qy;
    }
    return sum.value();
}

double birkhoff_sum(const TrigPoly& P, const RotationSpec& spec, long long m,
                    std::array<double, 2> theta) {
    return birkhoff_sum(
        [&P](double x, double y) { return P.evaluate({x, y}); }, spec, m,
        theta);
}

double birkhoff_bound(const TrigPoly& P, const RotationSpec& spec, long long m,
                      int r) {
    TrigPoly Q = solve_cohomological(P, spec);
    double displacement = P.dim() == 1
                              ? spec.x().dist_multiple(m).to_double()
                              : spec.dist_multiple_l1(m);
    return std::min(2.0 * Q.norm_bound(r), displacement * Q.norm_bound(r + 1));
}

} // namespace fbarlab

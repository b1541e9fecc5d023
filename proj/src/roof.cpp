#include "fbarlab/roof.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace fbarlab {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGL = 16;
constexpr double kGLnode[kGL] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
constexpr double kGLweight[kGL] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

template <typename F>
double gl_panel(const F& f, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (int i = 0; i < kGL; ++i)
        s += kGLweight[i] * f(mid + half * kGLnode[i]);
    return s * half;
}

template <typename F>
double gl_composite(const F& f, double a, double b, int panels) {
    KahanSum s;
    double w = (b - a) / panels;
    for (int i = 0; i < panels; ++i)
        s.add(gl_panel(f, a + i * w, a + (i + 1) * w));
    return s.value();
}

double raw_bump(double x) {
    double t = 1.0 - x * x;
    return t > 0 ? std::exp(-1.0 / t) : 0.0;
}

// int_{-1}^{1} exp(-1/(1-x^2)) dx, computed once.
double raw_bump_mass() {
    static const double mass =
        gl_composite(raw_bump, -1.0, 1.0, 64);
    return mass;
}

} // namespace

// --------------------------------------------------------------------------
// eta selection

EtaResult select_eta(int n_index, const RotationSpec& spec) {
    long long q = spec.q(n_index);
    long double eq = std::exp(static_cast<long double>(q));
    long double lo = (4.0L / 3.0L) * eq / static_cast<long double>(q);
    long double hi = 2.0L * eq / static_cast<long double>(q);
    if (hi > 4.0e18L)
        throw InvalidInput("select_eta: 1/eta window exceeds 63-bit range "
                           "(q_n too large)");
    long long step = 2 * q;
    auto first_multiple_at_least = [&](long double v) {
        auto k = static_cast<long long>(std::ceil(v / step));
        if (static_cast<long double>(k - 1) * step >= v) --k; // guard rounding
        while (static_cast<long double>(k) * step < v) ++k;
        return k * step;
    };
    long long candidate = first_multiple_at_least(lo);
    EtaResult r;
    r.q = q;
    r.window_lo = static_cast<double>(lo);
    r.window_hi = static_cast<double>(hi);
    if (static_cast<long double>(candidate) > hi)
        throw NoFeasibleEta(
            "select_eta: no multiple of " + std::to_string(step) +
            " inside [" + std::to_string(r.window_lo) + ", " +
            std::to_string(r.window_hi) + "] (q_n = " + std::to_string(q) +
            " too small)");
    r.inv_eta = candidate;
    r.eta = 1.0 / static_cast<double>(candidate);
    return r;
}

// --------------------------------------------------------------------------
// Piecewise-linear profile

PiecewiseXi::PiecewiseXi(long long qn, double mu, double eta)
    : qn_(qn), mu_(mu), eta_(eta) {
    if (!(mu > 0.0 && mu < 0.25))
        throw InvalidInput("xi profile requires 0 < mu < 1/4");
    if (qn < 1) throw InvalidInput("xi profile requires q_n >= 1");
    scale_ = 4.0 * static_cast<double>(qn) * eta / (1.0 - 4.0 * mu);
}

double PiecewiseXi::eval_profile(double x) const {
    double u = frac(x * static_cast<double>(qn_)); // position in the period
    double sign = 1.0;
    if (u > 0.5) { // odd extension: xi~(1 - u) = -xi~(u) within the period
        u = 1.0 - u;
        sign = -1.0;
    }
    double q = static_cast<double>(qn_);
    double v;
    if (u <= 0.25 - mu_)
        v = u / q;
    else if (u < 0.25 + mu_)
        v = (1.0 - 4.0 * mu_) / (4.0 * q);
    else
        v = (0.5 - u) / q;
    return sign * v;
}

double PiecewiseXi::eval(double x) const { return scale_ * eval_profile(x); }

double PiecewiseXi::sine_coefficient(long long j) const {
    // In period coordinates u the profile has slopes +-sigma_u with
    // sigma_u = 4 eta / (1 - 4 mu); integration by parts over the five
    // constant-slope segments gives the closed form below.
    double sigma = scale_ / static_cast<double>(qn_);
    double a = 0.25 - mu_, b = 0.25 + mu_, c = 0.75 - mu_, d = 0.75 + mu_;
    double jj = static_cast<double>(j);
    double s = std::sin(kTwoPi * jj * a) - std::sin(kTwoPi * jj * c) +
               std::sin(kTwoPi * jj * b) - std::sin(kTwoPi * jj * d);
    return sigma / (2.0 * M_PI * M_PI * jj * jj) * s;
}

std::vector<double> PiecewiseXi::corners_in(double lo, double hi) const {
    std::vector<double> out;
    double q = static_cast<double>(qn_);
    // corner offsets within one period, in u
    const double offs[6] = {0.0,        0.25 - mu_, 0.25 + mu_,
                            0.75 - mu_, 0.75 + mu_, 0.5};
    long long k0 = static_cast<long long>(std::floor(lo * q)) - 1;
    long long k1 = static_cast<long long>(std::ceil(hi * q)) + 1;
    for (long long k = k0; k <= k1; ++k)
        for (double off : offs) {
            double x = (static_cast<double>(k) + off) / q;
            if (x > lo && x < hi) out.push_back(x);
        }
    std::sort(out.begin(), out.end());
    return out;
}

// --------------------------------------------------------------------------
// Bump kernel

BumpKernel::BumpKernel(double scale) : scale_(scale) {
    if (!(scale >= 1.0)) throw InvalidInput("kernel scale must be >= 1");
}

double BumpKernel::eval(double x) const {
    return scale_ * raw_bump(scale_ * x) / raw_bump_mass();
}

double BumpKernel::fourier(double k) const {
    // int K_n(x) cos(2 pi k x) dx = int K(y) cos(2 pi (k/s) y) dy
    double t = k / scale_;
    auto f = [t](double y) { return raw_bump(y) * std::cos(kTwoPi * t * y); };
    int panels = std::max(16, static_cast<int>(std::ceil(std::abs(t))) * 4);
    double coarse = gl_composite(f, -1.0, 1.0, panels);
    double fine = gl_composite(f, -1.0, 1.0, 2 * panels);
    if (std::abs(fine - coarse) > 1e-11 * std::max(1.0, std::abs(fine)))
        throw NumericFailure(
            "kernel Fourier quadrature did not converge; achieved " +
            std::to_string(std::abs(fine - coarse)));
    return fine / raw_bump_mass();
}

double BumpKernel::integral_check() const {
    auto f = [](double y) { return raw_bump(y); };
    return gl_composite(f, -1.0, 1.0, 128) / raw_bump_mass();
}

// --------------------------------------------------------------------------
// Sine series

SineSeries::SineSeries(long long base_freq, std::vector<double> coeffs)
    : base_(base_freq), b_(std::move(coeffs)) {
    if (base_freq < 1) throw InvalidInput("sine series base frequency >= 1");
}

double SineSeries::eval(double x) const {
    // sum b_j sin(2 pi j base x) via rotation recurrence, re-synced
    // periodically to keep rounding flat.
    double phase = kTwoPi * frac(x * static_cast<double>(base_));
    std::complex<double> w(std::cos(phase), std::sin(phase));
    std::complex<double> z = w;
    double s = 0;
    for (size_t j = 0; j < b_.size(); ++j) {
        s += b_[j] * z.imag();
        z *= w;
        if ((j & 63u) == 63u)
            z = std::polar(1.0, phase * static_cast<double>(j + 2));
    }
    return s;
}

double SineSeries::deriv(double x) const {
    double phase = kTwoPi * frac(x * static_cast<double>(base_));
    std::complex<double> w(std::cos(phase), std::sin(phase));
    std::complex<double> z = w;
    double s = 0;
    for (size_t j = 0; j < b_.size(); ++j) {
        double freq = kTwoPi * static_cast<double>(base_) *
                      static_cast<double>(j + 1);
        s += b_[j] * freq * z.real();
        z *= w;
        if ((j & 63u) == 63u)
            z = std::polar(1.0, phase * static_cast<double>(j + 2));
    }
    return s;
}

TrigPoly SineSeries::as_trigpoly() const {
    TrigPoly p(1);
    for (size_t j = 0; j < b_.size(); ++j) {
        if (b_[j] == 0.0) continue;
        long long k = base_ * static_cast<long long>(j + 1);
        p.set_coef({static_cast<int>(k), 0}, {0.0, -b_[j] / 2.0});
    }
    return p;
}

double SineSeries::coeff_abs_sum() const {
    KahanSum s;
    for (double v : b_) s.add(std::abs(v));
    return s.value();
}

// --------------------------------------------------------------------------
// Mollified profile by direct quadrature

double mollified_eval(const PiecewiseXi& xi, const BumpKernel& kernel,
                      double x) {
    double w = kernel.support_halfwidth();
    auto f = [&](double t) { return kernel.eval(x - t) * xi.eval(t); };
    std::vector<double> cuts = xi.corners_in(x - w, x + w);
    cuts.insert(cuts.begin(), x - w);
    cuts.push_back(x + w);
    KahanSum s;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-300) continue;
        s.add(gl_panel(f, cuts[i], cuts[i + 1]));
        // one refinement per piece keeps corner pieces honest
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        double refined = gl_panel(f, cuts[i], mid) + gl_panel(f, mid, cuts[i + 1]);
        s.add(refined - gl_panel(f, cuts[i], cuts[i + 1]));
    }
    return s.value();
}

// --------------------------------------------------------------------------
// Plateau polynomial construction

PlateauPoly build_P_mu_n(int n_index, double mu, const RotationSpec& spec,
                         KernelChoice kernel_choice) {
    (void)kernel_choice; // single kernel implemented
    if (n_index < 1)
        throw InvalidInput("build_P_mu_n: index must be >= 1 (kernel scale)");
    if (n_index + 1 > spec.x().depth())
        throw InvalidInput("build_P_mu_n: q_{n+1} not available at this depth");
    if (!(mu > 0.0 && mu < 0.25))
        throw InvalidInput("build_P_mu_n: mu must be in (0, 1/4)");

    const long long qn = spec.q(n_index);
    const long long qn1 = spec.q(n_index + 1);
    EtaResult eta = select_eta(n_index, spec);
    PiecewiseXi xi(qn, mu, eta.eta);
    BumpKernel kernel(static_cast<double>(n_index) *
                      static_cast<double>(n_index) * static_cast<double>(qn));

    // Fourier coefficients: sine series at multiples of q_n, truncated to
    // degree q_{n+1} - 1, damped by the kernel transform.
    long long jmax = (qn1 - 1) / qn;
    std::vector<double> b(static_cast<size_t>(jmax), 0.0);
    for (long long j = 1; j <= jmax; ++j)
        b[static_cast<size_t>(j - 1)] =
            xi.sine_coefficient(j) *
            kernel.fourier(static_cast<double>(j * qn));

    PlateauPoly P;
    P.n_index = n_index;
    P.qn = qn;
    P.mu = mu;
    P.eta = eta;
    P.series = SineSeries(qn, std::move(b));

    // ---- margin measurements -------------------------------------------
    PlateauMargins& m = P.margins;
    m.zero_average_exact = true; // no j = 0 term exists in a sine series
    m.inv_eta_multiple_exact = (eta.inv_eta % (2 * qn)) == 0;

    const double tol_tail =
        std::exp(0.75 * static_cast<double>(qn)) / static_cast<double>(qn1);
    const double slope_required =
        static_cast<double>(qn) * static_cast<double>(qn) *
        std::exp(-static_cast<double>(qn));

    TrigPoly tp = P.series.as_trigpoly();
    m.norm_bounds.clear();
    for (int r = 0; r <= 3; ++r) m.norm_bounds.push_back(tp.norm_bound(r));
    m.norm_c0.measured = m.norm_bounds[0];
    m.norm_c0.required = std::exp(-0.75 * static_cast<double>(qn));
    m.norm_c0.pass = m.norm_c0.measured <= m.norm_c0.required;

    // Grid of >= 32 q_{n+1} points; margins for properties (3) and (4).
    long long grid = 32 * qn1;
    m.plateau_plus = {false, true, 0.0, tol_tail};
    m.plateau_minus = {false, true, 0.0, tol_tail};
    m.slope_descending = {false, true,
                          std::numeric_limits<double>::infinity(),
                          slope_required};
    m.slope_ascending = {false, true,
                         std::numeric_limits<double>::infinity(),
                         slope_required};
    for (long long i = 0; i < grid; ++i) {
        double x = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
        double u = frac(x * static_cast<double>(qn));
        double d_plus = std::abs(u - 0.25);   // plateau at +eta
        double d_minus = std::abs(u - 0.75);  // plateau at -eta
        if (d_plus < 3.0 * mu) {
            m.plateau_plus.applicable = true;
            m.plateau_plus.measured = std::max(
                m.plateau_plus.measured, std::abs(P.eval(x) - eta.eta));
        }
        if (d_minus < 3.0 * mu) {
            m.plateau_minus.applicable = true;
            m.plateau_minus.measured = std::max(
                m.plateau_minus.measured, std::abs(P.eval(x) + eta.eta));
        }
        // Constant-sign components of the region away from both plateaus:
        // descending arc through u = 1/2, ascending arc through u = 0.
        double center_dist = std::abs(u - 0.5);
        if (center_dist < 0.25 - 4.0 * mu) {
            m.slope_descending.applicable = true;
            m.slope_descending.measured =
                std::min(m.slope_descending.measured, -P.deriv(x));
        } else if (center_dist > 0.25 + 4.0 * mu) {
            m.slope_ascending.applicable = true;
            m.slope_ascending.measured =
                std::min(m.slope_ascending.measured, P.deriv(x));
        }
    }
    m.plateau_plus.pass =
        m.plateau_plus.applicable && m.plateau_plus.measured <= tol_tail;
    m.plateau_minus.pass =
        m.plateau_minus.applicable && m.plateau_minus.measured <= tol_tail;
    m.slope_descending.pass = m.slope_descending.applicable &&
                              m.slope_descending.measured >= slope_required;
    m.slope_ascending.pass = m.slope_ascending.applicable &&
                             m.slope_ascending.measured >= slope_required;

    m.kernel_integral.measured = std::abs(kernel.integral_check() - 1.0);
    m.kernel_integral.required = 1e-10;
    m.kernel_integral.pass =
        m.kernel_integral.measured <= m.kernel_integral.required;

    // Tail: compare the truncated polynomial against the mollified profile
    // on a probe grid (quadrature route, independent of the Fourier route).
    m.tail.required = tol_tail;
    m.tail.measured = 0;
    const int probes = 101;
    for (int i = 0; i < probes; ++i) {
        double x = (static_cast<double>(i) + 0.37) / probes;
        double direct = mollified_eval(xi, kernel, x);
        m.tail.measured =
            std::max(m.tail.measured, std::abs(direct - P.eval(x)));
    }
    m.tail.pass = m.tail.measured <= m.tail.required;
    return P;
}

// --------------------------------------------------------------------------
// Roof function

RoofFunction::RoofFunction(TrigPoly base) : base_(std::move(base)) {
    if (base_.dim() != 2) throw InvalidInput("roof base must be dim 2");
}

void RoofFunction::add_x_cos(int index, long long freq, double amp) {
    x_cos_.push_back({freq, amp, index});
}

void RoofFunction::add_y_cos(int index, long long freq, double amp) {
    y_cos_.push_back({freq, amp, index});
}

void RoofFunction::add_x_plateau(PlateauPoly poly) {
    x_plateau_.push_back({std::move(poly), 0});
    x_plateau_.back().index = x_plateau_.back().poly.n_index;
}

double RoofFunction::operator()(double x, double y) const {
    double s = 1.0 + base_.evaluate({x, y});
    for (const auto& t : x_cos_)
        s += t.amp * std::cos(kTwoPi * frac(x * static_cast<double>(t.freq)));
    for (const auto& t : y_cos_)
        s += t.amp * std::cos(kTwoPi * frac(y * static_cast<double>(t.freq)));
    for (const auto& t : x_plateau_) s += t.poly.eval(x);
    return s;
}

double RoofFunction::dx(double x, double y) const {
    double s = base_.derivative(0).evaluate({x, y});
    for (const auto& t : x_cos_)
        s -= t.amp * kTwoPi * static_cast<double>(t.freq) *
             std::sin(kTwoPi * frac(x * static_cast<double>(t.freq)));
    for (const auto& t : x_plateau_) s += t.poly.deriv(x);
    return s;
}

double RoofFunction::dy(double x, double y) const {
    double s = base_.derivative(1).evaluate({x, y});
    for (const auto& t : y_cos_)
        s -= t.amp * kTwoPi * static_cast<double>(t.freq) *
             std::sin(kTwoPi * frac(y * static_cast<double>(t.freq)));
    return s;
}

double RoofFunction::average() const {
    return 1.0 + base_.coef({0, 0}).real();
}

double RoofFunction::sup_bound() const {
    double s = 1.0 + base_.norm_bound(0);
    for (const auto& t : x_cos_) s += std::abs(t.amp);
    for (const auto& t : y_cos_) s += std::abs(t.amp);
    for (const auto& t : x_plateau_) s += t.poly.series.coeff_abs_sum();
    return s;
}

double RoofFunction::inf_bound() const {
    return 2.0 * average() - sup_bound();
}

double RoofFunction::min_on_grid(int points_per_axis) const {
    return argmin_on_grid(points_per_axis).z;
}

Vec3 RoofFunction::argmin_on_grid(int points_per_axis) const {
    double best = std::numeric_limits<double>::infinity();
    double bx = 0, by = 0;
    for (int i = 0; i < points_per_axis; ++i)
        for (int j = 0; j < points_per_axis; ++j) {
            double x = static_cast<double>(i) / points_per_axis;
            double y = static_cast<double>(j) / points_per_axis;
            double v = (*this)(x, y);
            if (v < best) {
                best = v;
                bx = x;
                by = y;
            }
        }
    return {bx, by, best};
}

RoofFunction assemble_roof(const RotationSpec& spec, const TrigPoly& base,
                           const std::map<int, PlateauPoly>& substitutions,
                           int depth) {
    if (depth < 0) throw InvalidInput("assemble_roof: depth must be >= 0");
    if (depth > 0 &&
        (depth > spec.x().depth() || depth > spec.y().depth()))
        throw InvalidInput("assemble_roof: depth exceeds available quotients");
    for (const auto& [k, poly] : substitutions) {
        if (k < 1 || k > depth)
            throw InvalidInput("assemble_roof: substitution index " +
                               std::to_string(k) + " outside 1..depth");
        if (poly.qn != spec.q(k))
            throw InvalidInput("assemble_roof: substitution at index " +
                               std::to_string(k) +
                               " was built for a different q_n");
    }
    RoofFunction roof(base);
    roof.set_depth(depth);
    for (int k = 1; k <= depth; ++k) {
        auto it = substitutions.find(k);
        if (it != substitutions.end()) {
            roof.add_x_plateau(it->second);
        } else {
            roof.add_x_cos(k, spec.q(k),
                           std::exp(-static_cast<double>(spec.q(k))));
        }
        roof.add_y_cos(k, spec.qp(k),
                       std::exp(-static_cast<double>(spec.qp(k))));
    }
    Vec3 low = roof.argmin_on_grid(128);
    if (!(low.z > 0.0))
        throw InvalidRoof("assembled roof is not strictly positive: value " +
                          std::to_string(low.z) + " at (" +
                          std::to_string(low.x) + ", " + std::to_string(low.y) +
                          ")");
    return roof;
}

RoofFunction constant_roof() { return RoofFunction(TrigPoly(2)); }

} // namespace fbarlab

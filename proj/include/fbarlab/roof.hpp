// Roof functions: the analytic base terms X_n(x) = e^{-q_n} cos(2 pi q_n x),
// Y_n(y) = e^{-q'_n} cos(2 pi q'_n y), and the plateau polynomials P_{mu,n}
// obtained by mollifying a 1/q_n-periodic piecewise-linear sawtooth with a
// scaled bump kernel and truncating the Fourier series at degree q_{n+1} - 1.

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "fbarlab/common.hpp"
#include "fbarlab/rotation.hpp"
#include "fbarlab/trigpoly.hpp"

namespace fbarlab {

struct InvalidRoof : InvalidInput {
    using InvalidInput::InvalidInput;
};

struct EtaResult {
    long long inv_eta = 0; // 1/eta, an integer multiple of 2 q_n
    double eta = 0;
    long long q = 0;       // q_n used
    double window_lo = 0;  // feasible window for 1/eta
    double window_hi = 0;
};

// Picks eta_n in [q_n e^{-q_n}/2, 3 q_n e^{-q_n}/4] with 1/eta in 2 q_n N,
// choosing the smallest feasible 1/eta.  Throws NoFeasibleEta when the
// window contains no multiple of 2 q_n.
EtaResult select_eta(int n_index, const RotationSpec& spec);

// xi_n = (4 q_n eta_n / (1 - 4 mu)) * xi~_n where xi~_n is the 1/q_n-periodic
// odd ramp/plateau/ramp profile: xi~(x) = x up to (1/4 - mu)/q_n, constant
// (1-4mu)/(4 q_n) around 1/(4 q_n), then descending; extended by oddness.
class PiecewiseXi {
  public:
    PiecewiseXi(long long qn, double mu, double eta);

    long long qn() const { return qn_; }
    double mu() const { return mu_; }
    double eta() const { return eta_; }
    double scale() const { return scale_; } // 4 q_n eta / (1 - 4 mu)

    double eval(double x) const;          // xi_n(x)
    double eval_profile(double x) const;  // xi~_n(x)

    // Sine coefficient of sin(2 pi j q_n x) in closed form.
    double sine_coefficient(long long j) const;

    // Corner abscissae of one period [0, 1/q_n), for quadrature splitting.
    std::vector<double> corners_in(double lo, double hi) const;

  private:
    long long qn_;
    double mu_, eta_, scale_;
};

enum class KernelChoice { standard_bump };

// K(x) = c exp(-1/(1-x^2)) on (-1,1), unit integral; K_n(x) = s K(s x) with
// s = n^2 q_n.
class BumpKernel {
  public:
    explicit BumpKernel(double scale); // scale = n^2 q_n
    double scale() const { return scale_; }
    double support_halfwidth() const { return 1.0 / scale_; }
    double eval(double x) const;           // K_n(x)
    double fourier(double k) const;        // int K_n(x) cos(2 pi k x) dx
    double integral_check() const;         // quadrature of int K_n, ~1
  private:
    double scale_;
};

struct MarginCheck {
    bool applicable = true;
    bool pass = false;
    double measured = 0;
    double required = 0;
};

struct PlateauMargins {
    bool zero_average_exact = false;
    bool inv_eta_multiple_exact = false;
    MarginCheck norm_c0;             // ||P||_{C^0} <= e^{-3 q_n / 4}
    std::vector<double> norm_bounds; // reported C^r bounds, r = 0..3
    MarginCheck plateau_plus;        // |P - eta| on |{q_n x} - 1/4| < 3 mu
    MarginCheck plateau_minus;       // |P + eta| on |{q_n x} - 3/4| < 3 mu
    MarginCheck slope_descending;    // -P' >= q^2 e^{-q} between plateaus
    MarginCheck slope_ascending;     // +P' >= q^2 e^{-q} across 0
    MarginCheck kernel_integral;     // |int K_n - 1| <= 1e-10
    MarginCheck tail;                // sup |X - P| on probe grid vs e^{3q/4}/q_{n+1}
};

// Zero-average sine series P(x) = sum_j b_j sin(2 pi j q_n x).
class SineSeries {
  public:
    SineSeries() = default;
    SineSeries(long long base_freq, std::vector<double> coeffs);
    long long base_freq() const { return base_; }
    const std::vector<double>& coeffs() const { return b_; }
    double eval(double x) const;
    double deriv(double x) const;
    long long degree() const {
        return base_ * static_cast<long long>(b_.size());
    }
    TrigPoly as_trigpoly() const;
    double coeff_abs_sum() const;

  private:
    long long base_ = 1;
    std::vector<double> b_;
};

struct PlateauPoly {
    int n_index = 0;
    long long qn = 0;
    double mu = 0;
    EtaResult eta;
    SineSeries series;
    PlateauMargins margins;

    double eval(double x) const { return series.eval(x); }
    double deriv(double x) const { return series.deriv(x); }
    TrigPoly as_trigpoly() const { return series.as_trigpoly(); }
};

// Mollifies xi_n with K_n, truncates the Fourier series to degree
// q_{n+1} - 1 and measures the plateau/slope margins on a grid of at least
// 32 q_{n+1} points.
PlateauPoly build_P_mu_n(int n_index, double mu, const RotationSpec& spec,
                         KernelChoice kernel = KernelChoice::standard_bump);

// Direct quadrature evaluation of the mollified profile (K_n * xi_n)(x),
// independent of the Fourier route.
double mollified_eval(const PiecewiseXi& xi, const BumpKernel& kernel,
                      double x);

// ---------------------------------------------------------------------------

// Roof function 1 + P(x,y) + sum of x-terms + sum of y-terms.  Each x-term is
// either the analytic X_k or a plateau substitution; y-terms are the Y_k.
class RoofFunction {
  public:
    struct CosTerm {
        long long freq = 1;
        double amp = 0;
        int index = 0; // construction index k
    };
    struct PlateauTerm {
        PlateauPoly poly;
        int index = 0;
    };

    explicit RoofFunction(TrigPoly base = TrigPoly(2));

    void add_x_cos(int index, long long freq, double amp);
    void add_y_cos(int index, long long freq, double amp);
    void add_x_plateau(PlateauPoly poly);

    double operator()(double x, double y) const;
    double dx(double x, double y) const;
    double dy(double x, double y) const;

    double average() const; // 1 + constant coefficient of the base
    double sup_bound() const;
    double inf_bound() const; // 2 average - sup (coefficient route)
    double min_on_grid(int points_per_axis) const;
    Vec3 argmin_on_grid(int points_per_axis) const; // (x, y, value)

    const TrigPoly& base() const { return base_; }
    const std::vector<CosTerm>& x_cos_terms() const { return x_cos_; }
    const std::vector<CosTerm>& y_cos_terms() const { return y_cos_; }
    const std::vector<PlateauTerm>& x_plateau_terms() const {
        return x_plateau_;
    }
    int depth() const { return depth_; }
    void set_depth(int d) { depth_ = d; }

  private:
    TrigPoly base_;
    std::vector<CosTerm> x_cos_, y_cos_;
    std::vector<PlateauTerm> x_plateau_;
    int depth_ = 0;
};

// 1 + P + sum_{k <= depth} (X_k or substitution)(x) + Y_k(y); verifies
// strict positivity on a grid and throws InvalidRoof otherwise.
RoofFunction assemble_roof(const RotationSpec& spec, const TrigPoly& base,
                           const std::map<int, PlateauPoly>& substitutions,
                           int depth);

// Constant roof (phi == 1).
RoofFunction constant_roof();

} // namespace fbarlab

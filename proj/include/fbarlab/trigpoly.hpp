// Finite Fourier series on T^d, d <= 2: evaluation, derivatives, coefficient
// norm bounds, Birkhoff sums along a rotation orbit, and the solver for the
// cohomological equation P = Q o R_omega - Q.

#pragma once

#include <array>
#include <complex>
#include <functional>
#include <map>

#include "fbarlab/common.hpp"
#include "fbarlab/rotation.hpp"

namespace fbarlab {

using Freq = std::array<int, 2>; // k[1] == 0 for dim-1 polynomials

// Real-valued trigonometric polynomial stored as a finitely supported
// Hermitian coefficient map k -> p_k with p_{-k} = conj(p_k).
class TrigPoly {
  public:
    explicit TrigPoly(int dim = 1);

    int dim() const { return dim_; }
    const std::map<Freq, std::complex<double>>& coefficients() const {
        return coef_;
    }

    // Sets p_k = c and p_{-k} = conj(c); k = 0 requires a real value.
    void set_coef(Freq k, std::complex<double> c);
    std::complex<double> coef(Freq k) const;
    void add_coef(Freq k, std::complex<double> c) {
        set_coef(k, coef(k) + c);
    }

    bool zero_average() const { return coef({0, 0}) == 0.0; }
    int degree() const; // max |k|_1 over the support, 0 for the zero poly

    // Real part of sum p_k e^{2 pi i k.theta}; the imaginary residue of the
    // Hermitian sum is pure rounding noise.
    double evaluate(std::array<double, 2> theta) const;
    double evaluate(double x) const { return evaluate({x, 0.0}); }

    TrigPoly derivative(int axis) const;

    // Sum_k (2 pi |k|_1)^r |p_k|, an upper bound for the C^r norm.
    double norm_bound(int r) const;

    TrigPoly operator+(const TrigPoly& other) const;
    TrigPoly operator-(const TrigPoly& other) const;
    TrigPoly scaled(double factor) const;

    static TrigPoly zero(int dim) { return TrigPoly(dim); }
    // a * cos(2 pi k.theta): coefficients a/2 at +-k.
    static TrigPoly cosine(int dim, Freq k, double amplitude);
    static TrigPoly sine(int dim, Freq k, double amplitude);

  private:
    int dim_;
    std::map<Freq, std::complex<double>> coef_;
    void prune(Freq k);
};

// Bridge constant C(d, r) between coefficient-sum bounds and C^r norms:
// ceil((2 pi)^r * sum_{k != 0} |k|_1^{-(d+1)}).
double bridge_constant(int dim, int r);

// exp(2 pi i <k, omega>) - 1 evaluated without cancellation; the distance
// ||<k, omega>|| is computed exactly from the rational rotation data.
std::complex<double> rotation_multiplier(const Freq& k,
                                         const RotationSpec& spec,
                                         double* abs_out = nullptr);

// Exact ||<k, omega>|| as a double.
double freq_distance(const Freq& k, const RotationSpec& spec);

// Solves P = Q o R_omega - Q for zero-average P via
// q_k = p_k / (e^{2 pi i <k, omega>} - 1).
// Throws InvalidInput when p_0 != 0 and NearResonance when some denominator
// falls below `floor`.
TrigPoly solve_cohomological(const TrigPoly& P, const RotationSpec& spec,
                             double floor = 1e-30);

// Compensated Birkhoff sum  sum_{j=0}^{m-1} f(theta + j omega); the orbit is
// advanced with exact integer residues so positions never drift.
double birkhoff_sum(const std::function<double(double, double)>& f,
                    const RotationSpec& spec, long long m,
                    std::array<double, 2> theta);

double birkhoff_sum(const TrigPoly& P, const RotationSpec& spec, long long m,
                    std::array<double, 2> theta);

// min{ 2 ||Q||_{C^r}, ||m omega|| * ||Q||_{C^{r+1}} } with norm-bound values;
// for dim-1 polynomials the displacement uses the x coordinate only.
double birkhoff_bound(const TrigPoly& P, const RotationSpec& spec, long long m,
                      int r);

} // namespace fbarlab

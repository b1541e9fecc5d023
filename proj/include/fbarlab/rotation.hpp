// Circle-rotation arithmetic.  A rotation vector (Omega, Omega') is specified
// by the partial quotients of each coordinate and materialized as the exact
// rational truncation p_N / q_N.  Return times q_n, the approximation errors
// beta_n = |q_n Omega - p_n| and all orbit displacements m*Omega mod 1 are
// then exact integer computations, so experiments indexed by q_n reproduce
// the intended combinatorics instead of drifting with floating error.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fbarlab/common.hpp"

namespace fbarlab {

// Nonnegative rational r/den with exact comparisons, den > 0.
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    double to_double() const {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

// Distance from x to the nearest integer, in [0, 1/2].
double dist_to_integers(double x);

// One coordinate of the rotation vector: quotients, convergents, exact value.
class CircleRotation {
  public:
    CircleRotation() = default;
    explicit CircleRotation(std::vector<long long> quotients);

    int depth() const { return static_cast<int>(quotients_.size()); }
    const std::vector<long long>& quotients() const { return quotients_; }

    // Convergents: q(0) = 1, q(n+1) = a_{n+1} q(n) + q(n-1); value() = p_N/q_N.
    long long q(int n) const { return q_.at(static_cast<size_t>(n)); }
    long long p(int n) const { return p_.at(static_cast<size_t>(n)); }
    long long denominator() const { return q_.back(); }
    long long numerator() const { return p_.back(); }
    double value() const { return value_; }

    // beta_n = |q_n * value - p_n| as an exact rational over q_N.
    Rational beta(int n) const;

    // Exact fractional part {m * value} returned as residue/denominator.
    // Works for any signed m (reduced mod q_N first).
    Rational frac_multiple(long long m) const;

    // Exact distance ||m * value|| to the nearest integer.
    Rational dist_multiple(long long m) const;

    // x + m*value mod 1, displacement computed exactly before rounding.
    double rotate(double x, long long m) const;

  private:
    std::vector<long long> quotients_;
    std::vector<long long> q_, p_;
    double value_ = 0;
    long long p_mod_q_ = 0; // numerator reduced mod denominator
};

class RotationSpec {
  public:
    RotationSpec() = default;
    RotationSpec(CircleRotation x, CircleRotation y, int precision_bits);

    const CircleRotation& x() const { return x_; }
    const CircleRotation& y() const { return y_; }
    int precision_bits() const { return precision_bits_; }

    double omega_x() const { return x_.value(); }
    double omega_y() const { return y_.value(); }

    // Return times of Omega and Omega'.
    long long q(int n) const { return x_.q(n); }
    long long qp(int n) const { return y_.q(n); }

    // x + m*omega on T^2, each coordinate exact before rounding.
    std::array<double, 2> rotate(std::array<double, 2> point,
                                 long long m) const;

    // ||m omega|| in the l^1 vector sense: ||m Omega|| + ||m Omega'||.
    double dist_multiple_l1(long long m) const;

  private:
    CircleRotation x_, y_;
    int precision_bits_ = 64;
};

RotationSpec build_rotation(const std::vector<long long>& pq_x,
                            const std::vector<long long>& pq_y,
                            int precision_bits);

struct GrowthModel {
    enum class Mode { paper, surrogate };
    Mode mode = Mode::surrogate;
    double g = 2.0; // surrogate multiplicative factor, > 1

    static GrowthModel paper() { return {Mode::paper, 0.0}; }
    static GrowthModel surrogate(double g) { return {Mode::surrogate, g}; }
};

// Per-level report of the growth inequalities
//   paper:     q'_n >= e^{3 q_n}   and   q_{n+1} >= e^{3 q'_n}
//   surrogate: q'_n >= g q_n       and   q_{n+1} >= g q'_n
// The second inequality is only checked when q_{n+1} is available.
// Comparisons run in log space so paper mode never overflows.
struct GrowthReport {
    struct Level {
        int n = 0;
        bool x_to_y_ok = false;     // q'_n vs threshold(q_n)
        bool y_to_next_ok = false;  // q_{n+1} vs threshold(q'_n)
        bool has_next = false;
        double log_required_xy = 0; // log of e^{3 q_n} resp. g q_n
        double log_required_yn = 0;
        bool pass() const { return x_to_y_ok && (!has_next || y_to_next_ok); }
    };
    std::vector<Level> levels;
    bool all_pass() const {
        for (const auto& l : levels)
            if (!l.pass()) return false;
        return true;
    }
};

GrowthReport check_growth(const RotationSpec& spec, const GrowthModel& model,
                          int depth);

} // namespace fbarlab

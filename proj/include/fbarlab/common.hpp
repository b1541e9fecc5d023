// Shared basic types: points and boxes on the 3-torus, error taxonomy,
// compensated summation.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fbarlab {

// ---------------------------------------------------------------------------
// Error taxonomy.  CLI maps InvalidInput/PreconditionFailed to exit code 2
// and NumericFailure (plus subclasses) to exit code 3.

struct InvalidInput : std::domain_error {
    using std::domain_error::domain_error;
};

struct PreconditionFailed : std::domain_error {
    using std::domain_error::domain_error;
};

struct NumericFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NearResonance : NumericFailure {
    using NumericFailure::NumericFailure;
};

struct CapExceeded : NumericFailure {
    using NumericFailure::NumericFailure;
};

struct NoFeasibleEta : InvalidInput {
    using InvalidInput::InvalidInput;
};

// ---------------------------------------------------------------------------

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fractional part in [0, 1).  frac(-0.25) == 0.75.
inline double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0; // floor rounding at negative epsilons
    return f;
}

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

// Axis-aligned closed box in T^3.  Intervals must satisfy lo <= hi and live
// inside [0, 1]; wrap-around boxes are not supported (every base the source
// constructions use is a plain product of intervals).
struct Box3 {
    double x0 = 0, x1 = 1;
    double y0 = 0, y1 = 1;
    double z0 = 0, z1 = 1;

    bool contains(const Vec3& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1 && p.z >= z0 &&
               p.z <= z1;
    }
    double volume() const { return (x1 - x0) * (y1 - y0) * (z1 - z0); }
    void validate() const {
        if (!(x0 <= x1 && y0 <= y1 && z0 <= z1))
            throw InvalidInput("box intervals must satisfy lo <= hi");
        if (x0 < 0 || x1 > 1 || y0 < 0 || y1 > 1 || z0 < 0 || z1 > 1)
            throw InvalidInput("box must lie inside [0,1]^3");
    }
};

// Kahan compensated accumulator.
class KahanSum {
  public:
    void add(double v) {
        double y = v - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0, c_ = 0;
};

// Mean / standard-error accumulator for Monte Carlo estimators.
class MeanAccumulator {
  public:
    void add(double v) {
        ++n_;
        double d = v - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (v - mean_);
    }
    long long count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double stderr_of_mean() const {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

  private:
    long long n_ = 0;
    double mean_ = 0, m2_ = 0;
};

} // namespace fbarlab

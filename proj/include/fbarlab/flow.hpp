// Special flow over the torus translation R_omega with roof phi, its
// time-one map, and the normalized homeomorphism G of T^3 together with its
// invariant measure.  Base orbits are advanced with exact integer residues of
// the rational rotation numbers, so long orbits never drift.
//
// Entropy note: the time-one map inherits the entropy of the base rotation
// scaled by 1/average(phi), and a circle rotation has entropy zero, so G has
// zero entropy identically.  No entropy estimator is provided; mixing is
// probed through correlations and derivative growth instead.

#pragma once

#include <optional>

#include "fbarlab/common.hpp"
#include "fbarlab/prng.hpp"
#include "fbarlab/roof.hpp"
#include "fbarlab/rotation.hpp"
#include "fbarlab/system.hpp"

namespace fbarlab {

struct FlowParams {
    // The printed normalization evaluates the roof at the pre-translation
    // base point; the translated reading evaluates it at the translated one.
    // Only the translated reading yields a bijection for non-constant roofs,
    // so it is the default; `printed` applies the formula mechanically and
    // wraps the output height into [0, 1).
    enum class RoofArgument { translated, printed };
    RoofArgument roof_argument = RoofArgument::translated;
    double wrap_tolerance = 1e-14; // heights this close to the roof wrap
    long long step_cap = 200'000'000;
};

struct FlowPoint {
    double x = 0, y = 0; // base point on T^2
    double s = 0;        // height in [0, phi(x, y))
};

// pi(t, x, s): least n >= 0 with t + s < S_{n+1} phi(x, y).
long long return_count(double t, const FlowPoint& p, const RoofFunction& roof,
                       const RotationSpec& spec, const FlowParams& params = {});

// Special flow by time t (any sign); input must be canonical.
FlowPoint flow(double t, FlowPoint p, const RoofFunction& roof,
               const RotationSpec& spec, const FlowParams& params = {});

// G = Phi^{-1} o Psi^1 o Phi on T^3 and its inverse.
Vec3 time_one_normalized(const Vec3& q, const RoofFunction& roof,
                         const RotationSpec& spec,
                         const FlowParams& params = {});
Vec3 time_one_normalized_inverse(const Vec3& q, const RoofFunction& roof,
                                 const RotationSpec& spec,
                                 const FlowParams& params = {});

// G as a MapT3, with drift-free orbit iteration.
class NormalizedFlowMap final : public MapT3 {
  public:
    NormalizedFlowMap(const RoofFunction& roof, const RotationSpec& spec,
                      FlowParams params = {});
    Vec3 apply(const Vec3& p) const override;
    Vec3 apply_inverse(const Vec3& p) const override;
    void orbit_run(const Vec3& start, long long steps,
                   const std::function<void(long long, const Vec3&)>& visit)
        const override;
    const RoofFunction& roof() const { return *roof_; }
    const RotationSpec& spec() const { return *spec_; }
    const FlowParams& params() const { return params_; }

  private:
    const RoofFunction* roof_;
    const RotationSpec* spec_;
    FlowParams params_;
};

// Rotation by omega on the (x, y) coordinates, z fixed: G for phi == 1.
class TranslationMap final : public MapT3 {
  public:
    explicit TranslationMap(const RotationSpec& spec) : spec_(&spec) {}
    Vec3 apply(const Vec3& p) const override {
        auto b = spec_->rotate({p.x, p.y}, 1);
        return {b[0], b[1], p.z};
    }
    Vec3 apply_inverse(const Vec3& p) const override {
        auto b = spec_->rotate({p.x, p.y}, -1);
        return {b[0], b[1], p.z};
    }
    void orbit_run(const Vec3& start, long long steps,
                   const std::function<void(long long, const Vec3&)>& visit)
        const override;

  private:
    const RotationSpec* spec_;
};

// Invariant measure of G: density proportional to the roof evaluated at the
// (configured) base point, z-independent, normalized by the roof average.
class FlowInvariantMeasure final : public MeasureModel {
  public:
    FlowInvariantMeasure(const RoofFunction& roof, const RotationSpec& spec,
                         FlowParams::RoofArgument arg =
                             FlowParams::RoofArgument::translated);
    double density(const Vec3& p) const override;
    Vec3 sample(Xoshiro256& rng) const override;
    std::optional<double> box_measure_exact(const Box3& b) const override;

  private:
    const RoofFunction* roof_;
    const RotationSpec* spec_;
    FlowParams::RoofArgument arg_;
    double avg_, sup_density_;
};

struct MeasureEstimate {
    double estimate = 0;
    double se = 0;
    std::optional<double> closed_form;
    long long samples = 0;
    uint64_t seed = 0;
};

// Monte Carlo estimate of mu(A) for an axis-aligned box, with the exact
// closed-form value attached (the roof integrates in closed form over boxes).
MeasureEstimate invariant_measure(const Box3& box, const RoofFunction& roof,
                                  const RotationSpec& spec, long long samples,
                                  uint64_t seed,
                                  const FlowParams& params = {});

} // namespace fbarlab

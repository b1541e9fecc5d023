// Abstract measure-preserving system on T^3: a map, its inverse, and its
// invariant measure (sampler + density + exact box measures when available).

#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fbarlab/common.hpp"
#include "fbarlab/prng.hpp"

namespace fbarlab {

class MapT3 {
  public:
    virtual ~MapT3() = default;
    virtual Vec3 apply(const Vec3& p) const = 0;
    virtual Vec3 apply_inverse(const Vec3& p) const = 0;

    Vec3 iterate(Vec3 p, long long n) const {
        for (; n > 0; --n) p = apply(p);
        for (; n < 0; ++n) p = apply_inverse(p);
        return p;
    }

    // Runs `steps` forward steps, invoking visit(step_index, point) after each
    // step (step_index from 1 to steps).  Implementations with exact internal
    // bookkeeping override this to avoid per-call drift on long orbits.
    virtual void orbit_run(
        const Vec3& start, long long steps,
        const std::function<void(long long, const Vec3&)>& visit) const {
        Vec3 p = start;
        for (long long i = 1; i <= steps; ++i) {
            p = apply(p);
            visit(i, p);
        }
    }
};

class MeasureModel {
  public:
    virtual ~MeasureModel() = default;
    // Density w.r.t. Lebesgue on T^3 (normalized to integrate to 1).
    virtual double density(const Vec3& p) const = 0;
    // Draws a point distributed per the invariant measure.
    virtual Vec3 sample(Xoshiro256& rng) const = 0;
    // Exact measure of an axis-aligned box when a closed form exists.
    virtual std::optional<double> box_measure_exact(const Box3& b) const = 0;
};

class IdentityMap final : public MapT3 {
  public:
    Vec3 apply(const Vec3& p) const override { return p; }
    Vec3 apply_inverse(const Vec3& p) const override { return p; }
};

class LebesgueMeasure final : public MeasureModel {
  public:
    double density(const Vec3&) const override { return 1.0; }
    Vec3 sample(Xoshiro256& rng) const override {
        return {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    }
    std::optional<double> box_measure_exact(const Box3& b) const override {
        return b.volume();
    }
};

} // namespace fbarlab

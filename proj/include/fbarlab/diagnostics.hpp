// Mixing diagnostics: correlation decay estimation for box pairs and the
// derivative lower-bound checks of the mixing criterion.

#pragma once

#include <string>
#include <vector>

#include "fbarlab/common.hpp"
#include "fbarlab/roof.hpp"
#include "fbarlab/rotation.hpp"
#include "fbarlab/system.hpp"

namespace fbarlab {

struct CorrelationSeries {
    struct Entry {
        long long lag = 0;
        double joint = 0;    // mu(A cap T^{-lag} B)
        double estimate = 0; // |joint - mu(A) mu(B)|
        double se = 0;       // propagated standard error
    };
    double mu_A = 0, mu_B = 0;
    double mu_A_se = 0, mu_B_se = 0;
    std::vector<Entry> entries;
    long long samples = 0;
    uint64_t seed = 0;
};

// Monte Carlo correlations: samples x ~ mu once, iterates forward to the
// largest lag and records indicator products at each requested lag.
CorrelationSeries correlation(const MapT3& map, const MeasureModel& measure,
                              const Box3& A, const Box3& B,
                              std::vector<long long> lags, long long samples,
                              uint64_t seed);

struct CriterionConfig {
    double r_n_override = -1.0; // excluded half-length; < 0 picks the default
    int x_grid = 128;           // grid on the x factor (filtered by I_n)
    int y_grid = 8;             // secondary-coordinate grid
    long long step_cap = 50'000'000;
};

struct CriterionReport {
    int n_index = 0;
    double r_n_x = 0, r_n_y = 0; // excluded interval half-lengths
    bool substituted = false;    // x-term at n is a plateau polynomial
    struct Entry {
        long long m = 0;
        bool in_x_range = false; // m in [e^{2 q_n}/2, 2 e^{2 q'_n}]
        bool in_y_range = false; // m in [e^{2 q_n}/2, 2 e^{2 q_{n+1}}]
        double min_abs_dx = 0;   // min over the I_n grid of |d_x S_m phi|
        double required_x = 0;   // (m / e^{q_n}) (q_n / n)
        double min_abs_dy = 0;
        double required_y = 0;   // (m / e^{q'_n}) (q'_n / n)
        bool x_ok = false, y_ok = false;
    };
    std::vector<Entry> entries;
    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.x_ok || !e.y_ok) return false;
        return !entries.empty();
    }
};

// Evaluates |d_x S_m phi| on grid points with {q_n x} in I_n (the circle
// minus two intervals of half-length r_n around the plateau centers 1/4 and
// 3/4) against (m/e^{q_n})(q_n/n), and the analogous y-check with I'_n and
// (m/e^{q'_n})(q'_n/n).  The default r_n is 5 mu when the roof substitutes a
// plateau polynomial at index n and 1/n otherwise.
CriterionReport check_mixing_criterion(const RoofFunction& roof,
                                       const RotationSpec& spec, int n_index,
                                       const std::vector<long long>& m_list,
                                       const CriterionConfig& config = {});

} // namespace fbarlab

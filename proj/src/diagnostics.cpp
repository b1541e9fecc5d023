#include "fbarlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "fbarlab/trigpoly.hpp"

namespace fbarlab {

CorrelationSeries correlation(const MapT3& map, const MeasureModel& measure,
                              const Box3& A, const Box3& B,
                              std::vector<long long> lags, long long samples,
                              uint64_t seed) {
    A.validate();
    B.validate();
    if (samples < 1) throw InvalidInput("correlation: samples >= 1");
    if (!std::is_sorted(lags.begin(), lags.end()))
        throw InvalidInput("correlation: lags must be sorted");
    for (long long l : lags)
        if (l < 0) throw InvalidInput("correlation: lags must be >= 0");

    CorrelationSeries series;
    series.samples = samples;
    series.seed = seed;
    Xoshiro256 rng = stream_for(seed, "diag/correlation");

    const long long max_lag = lags.empty() ? 0 : lags.back();
    std::vector<long long> joint(lags.size(), 0);
    long long inA = 0, inB = 0;
    for (long long s = 0; s < samples; ++s) {
        Vec3 p = measure.sample(rng);
        bool a = A.contains(p);
        if (a) ++inA;
        if (B.contains(p)) ++inB;
        if (!a) continue; // joint indicator needs x in A
        size_t li = 0;
        while (li < lags.size() && lags[li] == 0) {
            if (B.contains(p)) ++joint[li];
            ++li;
        }
        if (li >= lags.size()) continue;
        Vec3 q = p;
        long long reached = 0;
        map.orbit_run(p, max_lag, [&](long long step, const Vec3& r) {
            q = r;
            reached = step;
            while (li < lags.size() && lags[li] == step) {
                if (B.contains(r)) ++joint[li];
                ++li;
            }
        });
        (void)reached;
    }
    const double n = static_cast<double>(samples);
    series.mu_A = static_cast<double>(inA) / n;
    series.mu_B = static_cast<double>(inB) / n;
    series.mu_A_se = std::sqrt(series.mu_A * (1 - series.mu_A) / n);
    series.mu_B_se = std::sqrt(series.mu_B * (1 - series.mu_B) / n);
    for (size_t i = 0; i < lags.size(); ++i) {
        CorrelationSeries::Entry e;
        e.lag = lags[i];
        e.joint = static_cast<double>(joint[i]) / n;
        double joint_se = std::sqrt(e.joint * (1 - e.joint) / n);
        e.estimate = std::abs(e.joint - series.mu_A * series.mu_B);
        e.se = std::sqrt(joint_se * joint_se +
                         series.mu_B * series.mu_B * series.mu_A_se *
                             series.mu_A_se +
                         series.mu_A * series.mu_A * series.mu_B_se *
                             series.mu_B_se);
        series.entries.push_back(e);
    }
    return series;
}

CriterionReport check_mixing_criterion(const RoofFunction& roof,
                                       const RotationSpec& spec, int n_index,
                                       const std::vector<long long>& m_list,
                                       const CriterionConfig& config) {
    if (n_index < 1 || n_index > spec.x().depth() ||
        n_index > spec.y().depth())
        throw InvalidInput("check_mixing_criterion: index outside depth");

    CriterionReport rep;
    rep.n_index = n_index;
    const double qn = static_cast<double>(spec.q(n_index));
    const double qpn = static_cast<double>(spec.qp(n_index));
    const double nn = static_cast<double>(n_index);

    double mu_sub = 0;
    for (const auto& t : roof.x_plateau_terms())
        if (t.poly.n_index == n_index) {
            rep.substituted = true;
            mu_sub = t.poly.mu;
        }
    rep.r_n_x = config.r_n_override >= 0
                    ? config.r_n_override
                    : (rep.substituted ? 5.0 * mu_sub : 1.0 / nn);
    rep.r_n_y = config.r_n_override >= 0 ? config.r_n_override : 1.0 / nn;

    // Grid points with {q_n x} outside the two excluded intervals around the
    // plateau centers 1/4 and 3/4.
    auto admissible = [](double u, double r) {
        auto circ = [](double a) { return std::min(frac(a), 1.0 - frac(a)); };
        return circ(u - 0.25) > r && circ(u - 0.75) > r;
    };
    std::vector<double> xs, ys;
    for (int i = 0; i < config.x_grid; ++i) {
        double x = (static_cast<double>(i) + 0.5) / config.x_grid;
        if (admissible(frac(x * qn), rep.r_n_x)) xs.push_back(x);
    }
    for (int i = 0; i < config.x_grid; ++i) {
        double y = (static_cast<double>(i) + 0.5) / config.x_grid;
        if (admissible(frac(y * qpn), rep.r_n_y)) ys.push_back(y);
    }
    std::vector<double> secondary;
    for (int i = 0; i < config.y_grid; ++i)
        secondary.push_back((static_cast<double>(i) + 0.5) / config.y_grid);

    for (long long m : m_list) {
        if (m < 1) throw InvalidInput("check_mixing_criterion: m must be >= 1");
        if (m > config.step_cap)
            throw CapExceeded("check_mixing_criterion: m exceeds step cap");
        CriterionReport::Entry e;
        e.m = m;
        double logm = std::log(static_cast<double>(m));
        e.in_x_range = logm >= 2.0 * qn - std::log(2.0) &&
                       logm <= std::log(2.0) + 2.0 * qpn;
        e.in_y_range = logm >= 2.0 * qn - std::log(2.0) &&
                       (n_index + 1 <= spec.x().depth()
                            ? logm <= std::log(2.0) +
                                          2.0 * static_cast<double>(
                                                    spec.q(n_index + 1))
                            : true);
        e.required_x = static_cast<double>(m) * std::exp(-qn) * qn / nn;
        e.required_y = static_cast<double>(m) * std::exp(-qpn) * qpn / nn;

        double min_dx = std::numeric_limits<double>::infinity();
        for (double x : xs)
            for (double y : secondary) {
                double s = birkhoff_sum(
                    [&roof](double a, double b) { return roof.dx(a, b); },
                    spec, m, {x, y});
                min_dx = std::min(min_dx, std::abs(s));
            }
        double min_dy = std::numeric_limits<double>::infinity();
        for (double y : ys)
            for (double x : secondary) {
                double s = birkhoff_sum(
                    [&roof](double a, double b) { return roof.dy(a, b); },
                    spec, m, {x, y});
                min_dy = std::min(min_dy, std::abs(s));
            }
        e.min_abs_dx = xs.empty() ? 0.0 : min_dx;
        e.min_abs_dy = ys.empty() ? 0.0 : min_dy;
        e.x_ok = !xs.empty() && e.min_abs_dx >= e.required_x;
        e.y_ok = !ys.empty() && e.min_abs_dy >= e.required_y;
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace fbarlab

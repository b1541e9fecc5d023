#include "fbarlab/rotation.hpp"

#include <cmath>
#include <limits>

namespace fbarlab {

namespace {

constexpr long long kConvergentCap = 1LL << 62;

long long mod_ll(long long a, long long m) {
    long long r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

double dist_to_integers(double x) {
    if (!std::isfinite(x)) throw InvalidInput("dist_to_integers: x not finite");
    double f = frac(x);
    return f <= 0.5 ? f : 1.0 - f;
}

CircleRotation::CircleRotation(std::vector<long long> quotients)
    : quotients_(std::move(quotients)) {
    if (quotients_.empty())
        throw InvalidInput("partial quotient list must be non-empty");
    for (long long a : quotients_)
        if (a < 1) throw InvalidInput("partial quotients must be >= 1");

    // q_0 = 1, p_0 = 0; q_1 = a_1, p_1 = 1.
    q_ = {1};
    p_ = {0};
    long long qm1 = 0, pm1 = 1; // virtual index -1 values
    for (long long a : quotients_) {
        long long qn = q_.back(), pn = p_.back();
        if (qn > (kConvergentCap - qm1) / a)
            throw InvalidInput("convergents overflow 63-bit range; "
                               "reduce partial quotients");
        q_.push_back(a * qn + qm1);
        p_.push_back(a * pn + pm1);
        qm1 = qn;
        pm1 = pn;
    }
    value_ = static_cast<double>(p_.back()) / static_cast<double>(q_.back());
    p_mod_q_ = mod_ll(p_.back(), q_.back());
}

Rational CircleRotation::beta(int n) const {
    if (n < 0 || n >= static_cast<int>(q_.size()))
        throw InvalidInput("beta: level out of range");
    __int128 num = static_cast<__int128>(q_[static_cast<size_t>(n)]) *
                       p_.back() -
                   static_cast<__int128>(p_[static_cast<size_t>(n)]) * q_.back();
    if (num < 0) num = -num;
    return {num, static_cast<__int128>(q_.back())};
}

Rational CircleRotation::frac_multiple(long long m) const {
    long long q = q_.back();
    long long mm = mod_ll(m, q);
    __int128 r = static_cast<__int128>(mm) * p_mod_q_ %
                 static_cast<__int128>(q);
    return {r, static_cast<__int128>(q)};
}

Rational CircleRotation::dist_multiple(long long m) const {
    Rational f = frac_multiple(m);
    __int128 alt = f.den - f.num;
    return {f.num <= alt ? f.num : alt, f.den};
}

double CircleRotation::rotate(double x, long long m) const {
    return frac(x + frac_multiple(m).to_double());
}

RotationSpec::RotationSpec(CircleRotation x, CircleRotation y,
                           int precision_bits)
    : x_(std::move(x)), y_(std::move(y)), precision_bits_(precision_bits) {
    if (precision_bits_ < 64)
        throw InvalidInput("precision_bits must be >= 64");
}

std::array<double, 2> RotationSpec::rotate(std::array<double, 2> point,
                                           long long m) const {
    return {x_.rotate(point[0], m), y_.rotate(point[1], m)};
}

double RotationSpec::dist_multiple_l1(long long m) const {
    return x_.dist_multiple(m).to_double() + y_.dist_multiple(m).to_double();
}

RotationSpec build_rotation(const std::vector<long long>& pq_x,
                            const std::vector<long long>& pq_y,
                            int precision_bits) {
    return RotationSpec(CircleRotation(pq_x), CircleRotation(pq_y),
                        precision_bits);
}

GrowthReport check_growth(const RotationSpec& spec, const GrowthModel& model,
                          int depth) {
    if (model.mode == GrowthModel::Mode::surrogate && !(model.g > 1.0))
        throw InvalidInput("surrogate growth factor must exceed 1");
    int max_x = spec.x().depth();
    int max_y = spec.y().depth();
    if (depth > max_x || depth > max_y)
        throw InvalidInput("check_growth: depth exceeds available quotients");

    GrowthReport report;
    for (int n = 1; n <= depth; ++n) {
        GrowthReport::Level lvl;
        lvl.n = n;
        double log_qn = std::log(static_cast<double>(spec.q(n)));
        double log_qpn = std::log(static_cast<double>(spec.qp(n)));
        if (model.mode == GrowthModel::Mode::paper) {
            lvl.log_required_xy = 3.0 * static_cast<double>(spec.q(n));
            lvl.log_required_yn = 3.0 * static_cast<double>(spec.qp(n));
        } else {
            lvl.log_required_xy = std::log(model.g) + log_qn;
            lvl.log_required_yn = std::log(model.g) + log_qpn;
        }
        lvl.x_to_y_ok = log_qpn >= lvl.log_required_xy;
        lvl.has_next = n + 1 <= max_x;
        if (lvl.has_next) {
            double log_qn1 = std::log(static_cast<double>(spec.q(n + 1)));
            lvl.y_to_next_ok = log_qn1 >= lvl.log_required_yn;
        }
        report.levels.push_back(lvl);
    }
    return report;
}

} // namespace fbarlab

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "hompol/detection.hpp"
#include "hompol/errors.hpp"
#include "hompol/hom.hpp"

namespace hompol {

enum class EstimateFlag : std::uint8_t {
    Ok = 0,
    ClampedLowV = 1,       // visibility below zero, angle set to pi/2
    ClampedHighV = 2,      // V / alpha above one, angle set to 0
    DegenerateFisher = 3,  // zero or singular Fisher information at the estimate
    Invalid = 4,           // no single or coincidence events in a frame
};

inline std::string_view to_string(EstimateFlag flag) {
    switch (flag) {
        case EstimateFlag::Ok: return "ok";
        case EstimateFlag::ClampedLowV: return "clamped_low_v";
        case EstimateFlag::ClampedHighV: return "clamped_high_v";
        case EstimateFlag::DegenerateFisher: return "degenerate_fisher";
        case EstimateFlag::Invalid: return "invalid";
    }
    return "unknown";
}

template <typename Scalar>
struct FisherValue {
    Scalar value;
    bool degenerate;  // singular denominator; value is +inf
};

template <typename Scalar>
struct AngleEstimate {
    Scalar theta_hat;     // principal value, or the clamp value when flagged
    Scalar mirror_theta;  // pi/2 - theta_hat, indistinguishable from one visibility
    Scalar visibility;
    Scalar crb_std;       // +inf unless flag == Ok
    EstimateFlag flag;
};

template <typename Scalar>
struct CalibrationResult {
    Scalar gamma_hat = Scalar(0);
    Scalar alpha_hat = Scalar(1);
    Scalar raw_gamma = Scalar(0);
    Scalar raw_alpha = Scalar(1);
    bool gamma_clamped = false;
    bool alpha_clamped = false;
};

using AngleEstimated = AngleEstimate<double>;
using CalibrationResultd = CalibrationResult<double>;

namespace detail {

// True when theta is a multiple of pi/4 up to rounding of the input.
template <typename Scalar>
bool at_quarter_period(Scalar theta) {
    using std::abs;
    using std::round;
    const Scalar q = theta * Scalar(4) / std::numbers::pi_v<Scalar>;
    const Scalar tol = Scalar(4) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), abs(q));
    return abs(q - round(q)) <= tol;
}

}  // namespace detail

/// Per-trial Fisher information about the fast-axis angle:
///   16 a^2 (g-1)^2 (g+1) sin^2 2t cos^2 2t
///   / [(a cos^2 2t - E)(a cos^2 2t (g-1) - E (3g+1))],   E = exp(dz^2/lc^2).
template <typename Scalar>
FisherValue<Scalar> fisher_information(Scalar theta, const LossModel<Scalar>& loss,
                                       const InterferometerConfig<Scalar>& cfg, Scalar dz) {
    using std::cos;
    using std::exp;
    using std::sin;
    cfg.validate();
    loss.validate();
    detail::require_finite(theta, "angle must be finite");
    detail::require_finite(dz, "delay must be finite");

    const Scalar a = cfg.max_visibility;
    const Scalar g = loss.gamma;
    const Scalar lc = cfg.coherence_length_mm;
    const Scalar e = exp((dz * dz) / (lc * lc));
    const Scalar c = cos(Scalar(2) * theta);
    const Scalar s = sin(Scalar(2) * theta);
    const Scalar c2 = c * c;

    const Scalar first = a * c2 - e;
    const Scalar second = a * c2 * (g - Scalar(1)) - e * (Scalar(3) * g + Scalar(1));
    if (first == Scalar(0) || second == Scalar(0)) {
        return {std::numeric_limits<Scalar>::infinity(), true};
    }
    if (detail::at_quarter_period(theta)) {
        return {Scalar(0), false};
    }
    const Scalar numerator = Scalar(16) * a * a * (g - Scalar(1)) * (g - Scalar(1)) * (g + Scalar(1)) * s * s * c2;
    return {numerator / (first * second), false};
}

/// Cramér–Rao variance bound 1/(N F).
template <typename Scalar>
Scalar crb_variance(std::uint64_t n_trials, Scalar fisher) {
    using std::isfinite;
    if (n_trials == 0) {
        throw DomainError("number of trials must be positive");
    }
    if (!(fisher > Scalar(0)) || !isfinite(fisher)) {
        throw DegenerateBound("Cramér-Rao bound needs finite positive Fisher information");
    }
    return Scalar(1) / (static_cast<Scalar>(n_trials) * fisher);
}

template <typename Scalar>
struct FisherSample {
    Scalar theta;
    Scalar fisher;
};

template <typename Scalar>
std::vector<FisherSample<Scalar>> fisher_scan(std::span<const Scalar> theta_values, const LossModel<Scalar>& loss,
                                              const InterferometerConfig<Scalar>& cfg, Scalar dz) {
    if (theta_values.empty()) {
        throw DomainError("Fisher scan needs at least one angle");
    }
    std::vector<FisherSample<Scalar>> out;
    out.reserve(theta_values.size());
    for (Scalar theta : theta_values) {
        out.push_back({theta, fisher_information(theta, loss, cfg, dz).value});
    }
    return out;
}

/// Loss calibration from a frame far from the dip, where pc = 1/2:
/// gamma = (N1 - N2) / (N1 + 3 N2), clamped to [0, 1 - 1e-9].
template <typename Count, typename Scalar = double>
CalibrationResult<Scalar> estimate_gamma(const BasicCountTriple<Count>& baseline) {
    const auto n1 = static_cast<Scalar>(baseline.n1);
    const auto n2 = static_cast<Scalar>(baseline.n2);
    if (!(n1 + n2 > Scalar(0))) {
        throw InsufficientCounts("baseline frame has no single or coincidence events");
    }
    constexpr Scalar upper = Scalar(1) - Scalar(1e-9);
    CalibrationResult<Scalar> result;
    result.raw_gamma = (n1 - n2) / (n1 + Scalar(3) * n2);
    result.gamma_hat = std::clamp(result.raw_gamma, Scalar(0), upper);
    result.gamma_clamped = result.gamma_hat != result.raw_gamma;
    return result;
}

/// Setup visibility from dip-frame visibilities of a sample-free region,
/// clamped to (0, 1].
template <typename Scalar>
CalibrationResult<Scalar> estimate_alpha(std::span<const Scalar> blank_visibilities) {
    if (blank_visibilities.empty()) {
        throw InsufficientCounts("no blank pixels to calibrate the visibility");
    }
    Scalar sum = Scalar(0);
    for (Scalar v : blank_visibilities) {
        sum += v;
    }
    CalibrationResult<Scalar> result;
    result.raw_alpha = sum / static_cast<Scalar>(blank_visibilities.size());
    result.alpha_hat = std::clamp(result.raw_alpha, std::numeric_limits<Scalar>::min(), Scalar(1));
    result.alpha_clamped = result.alpha_hat != result.raw_alpha;
    return result;
}

/// Dip visibility from the counts, [N1 - N2 (1+3g)/(1-g)] / (N1 + N2).
/// Not clamped; noise can push it outside [0, 1].
template <typename Count, typename Scalar>
Scalar visibility(const BasicCountTriple<Count>& dip, Scalar gamma) {
    const auto n1 = static_cast<Scalar>(dip.n1);
    const auto n2 = static_cast<Scalar>(dip.n2);
    if (!(n1 + n2 > Scalar(0))) {
        throw InsufficientCounts("dip frame has no single or coincidence events");
    }
    LossModel<Scalar>{gamma}.validate();
    return (n1 * gamma - n1 + Scalar(3) * n2 * gamma + n2) / ((gamma - Scalar(1)) * (n1 + n2));
}

/// Closed-form maximum-likelihood angle at the dip centre, solving
/// alpha cos^2(2 theta) = V on the principal branch [0, pi/4].
template <typename Count, typename Scalar>
AngleEstimate<Scalar> estimate_theta(const BasicCountTriple<Count>& dip, Scalar gamma, Scalar alpha) {
    using std::acos;
    using std::sqrt;
    if (!(alpha > Scalar(0) && alpha <= Scalar(1))) {
        throw DomainError("max visibility must lie in (0, 1]");
    }
    constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / Scalar(2);
    constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();

    const Scalar v = visibility(dip, gamma);
    if (v < Scalar(0)) {
        return {half_pi, Scalar(0), v, inf, EstimateFlag::ClampedLowV};
    }
    const Scalar ratio = v / alpha;
    if (ratio > Scalar(1)) {
        return {Scalar(0), half_pi, v, inf, EstimateFlag::ClampedHighV};
    }

    AngleEstimate<Scalar> est{acos(sqrt(ratio)) / Scalar(2), Scalar(0), v, inf, EstimateFlag::Ok};
    est.mirror_theta = half_pi - est.theta_hat;

    InterferometerConfig<Scalar> cfg;
    cfg.max_visibility = alpha;
    const auto fisher = fisher_information(est.theta_hat, LossModel<Scalar>{gamma}, cfg, Scalar(0));
    if (fisher.degenerate || !(fisher.value > Scalar(0))) {
        est.flag = EstimateFlag::DegenerateFisher;
        return est;
    }
    // Same as sqrt(crb_variance(N, F)) but keeps fractional expected totals.
    est.crb_std = sqrt(Scalar(1) / (static_cast<Scalar>(dip.total()) * fisher.value));
    return est;
}

/// Picks the representative of {+-theta_hat + k pi/2} closest to `hint`.
/// Used when the true angle is known to lie near `hint`.
template <typename Scalar>
Scalar resolve_branch(Scalar theta_hat, Scalar hint) {
    using std::abs;
    using std::round;
    constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / Scalar(2);
    Scalar best = theta_hat;
    Scalar best_distance = std::numeric_limits<Scalar>::infinity();
    for (Scalar sign : {Scalar(1), Scalar(-1)}) {
        const Scalar base = sign * theta_hat;
        const Scalar k = round((hint - base) / half_pi);
        const Scalar candidate = base + k * half_pi;
        if (abs(candidate - hint) < best_distance) {
            best_distance = abs(candidate - hint);
            best = candidate;
        }
    }
    return best;
}

}  // namespace hompol

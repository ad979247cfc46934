#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hompol/detection.hpp"
#include "hompol/hom.hpp"
#include "hompol/inference.hpp"
#include "hompol/random.hpp"

namespace hompol {

/// Pair-generation events per frame and an optional per-trial probability
/// that a non-coincidence outcome is recorded as an accidental coincidence.
struct TrialPlan {
    std::uint64_t n_trials = 1;
    double accidental_rate = 0.0;

    void validate() const;
};

/// Draws one multinomial sample of plan.n_trials outcomes, then promotes
/// each no-click or single-click trial to a coincidence with probability
/// plan.accidental_rate.
CountTriple sample_counts(const OutcomeProbabilitiesd& probs, const TrialPlan& plan, RandomStream stream);

/// Simulate-then-estimate cycles for a half-wave retarder at `theta_true`.
/// Repeat r uses stream index stream.stream_index + r. Away from the dip
/// centre the estimator is given the effective visibility alpha * overlap(dz).
std::vector<AngleEstimated> repeat_experiment(double theta_true, const LossModeld& loss,
                                              const InterferometerConfigd& cfg, double dz, const TrialPlan& plan,
                                              std::uint32_t n_repeats, RandomStream stream);

struct EstimateSummary {
    std::size_t count = 0;       // estimates used for the moments
    std::size_t flagged = 0;     // estimates with flag != Ok
    std::size_t clamped_high = 0;
    std::size_t clamped_low = 0;
    double mean = 0.0;
    double variance = 0.0;       // unbiased sample variance, 0 for a single estimate
};

/// Moments of theta_hat over every estimate (clamped ones included).
EstimateSummary summarize(std::span<const AngleEstimated> estimates);

}  // namespace hompol

#include "hompol/montecarlo.hpp"

#include <cmath>

#include "hompol/errors.hpp"

namespace hompol {

void TrialPlan::validate() const {
    if (n_trials < 1) {
        throw DomainError("a frame needs at least one trial");
    }
    if (!(accidental_rate >= 0.0 && accidental_rate <= 1.0)) {
        throw DomainError("accidental rate must lie in [0, 1]");
    }
}

namespace {

void validate_probabilities(const OutcomeProbabilitiesd& probs) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(probs.p0) || !in_unit(probs.p1) || !in_unit(probs.p2) ||
        std::abs(probs.p0 + probs.p1 + probs.p2 - 1.0) > 1e-12) {
        throw DomainError("outcome probabilities must be a distribution");
    }
}

}  // namespace

CountTriple sample_counts(const OutcomeProbabilitiesd& probs, const TrialPlan& plan, RandomStream stream) {
    plan.validate();
    validate_probabilities(probs);
    StreamGenerator gen(stream);
    CountTriple counts = sample_multinomial(gen, plan.n_trials, probs);
    if (plan.accidental_rate > 0.0) {
        const std::uint64_t from_none = sample_binomial(gen, counts.n0, plan.accidental_rate);
        const std::uint64_t from_single = sample_binomial(gen, counts.n1, plan.accidental_rate);
        counts.n0 -= from_none;
        counts.n1 -= from_single;
        counts.n2 += from_none + from_single;
    }
    return counts;
}

std::vector<AngleEstimated> repeat_experiment(double theta_true, const LossModeld& loss,
                                              const InterferometerConfigd& cfg, double dz, const TrialPlan& plan,
                                              std::uint32_t n_repeats, RandomStream stream) {
    if (n_repeats < 1) {
        throw DomainError("at least one repetition is required");
    }
    const auto probs = outcome_probabilities(coincidence_probability(theta_true, dz, cfg), loss);
    const double effective_alpha = cfg.max_visibility * overlap_probability(dz, cfg.coherence_length_mm);

    std::vector<AngleEstimated> estimates;
    estimates.reserve(n_repeats);
    for (std::uint32_t r = 0; r < n_repeats; ++r) {
        const CountTriple counts = sample_counts(probs, plan, {stream.master_seed, stream.stream_index + r});
        if (counts.n1 + counts.n2 == 0) {
            constexpr double inf = std::numeric_limits<double>::infinity();
            estimates.push_back({0.0, 0.0, 0.0, inf, EstimateFlag::Invalid});
            continue;
        }
        estimates.push_back(estimate_theta(counts, loss.gamma, effective_alpha));
    }
    return estimates;
}

EstimateSummary summarize(std::span<const AngleEstimated> estimates) {
    EstimateSummary s;
    double sum = 0.0;
    for (const auto& e : estimates) {
        if (e.flag == EstimateFlag::Invalid) {
            ++s.flagged;
            continue;
        }
        ++s.count;
        sum += e.theta_hat;
        if (e.flag != EstimateFlag::Ok) {
            ++s.flagged;
        }
        if (e.flag == EstimateFlag::ClampedHighV) {
            ++s.clamped_high;
        } else if (e.flag == EstimateFlag::ClampedLowV) {
            ++s.clamped_low;
        }
    }
    if (s.count == 0) {
        return s;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (const auto& e : estimates) {
            if (e.flag != EstimateFlag::Invalid) {
                ss += (e.theta_hat - s.mean) * (e.theta_hat - s.mean);
            }
        }
        s.variance = ss / static_cast<double>(s.count - 1);
    }
    return s;
}

}  // namespace hompol

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "hompol/errors.hpp"
#include "hompol/hom.hpp"

namespace hompol {

/// Probabilities of no click, a single click, and a coincidence.
template <typename Scalar>
struct OutcomeProbabilities {
    Scalar p0;
    Scalar p1;
    Scalar p2;
};

/// Single-photon loss probability, identical for both photons.
template <typename Scalar>
struct LossModel {
    Scalar gamma = Scalar(0);

    void validate() const {
        if (!(gamma >= Scalar(0) && gamma < Scalar(1))) {
            throw DomainError("loss probability must lie in [0, 1)");
        }
    }

    bool operator==(const LossModel&) const = default;
};

/// Event counts (no click, single click, coincidence). Real-valued triples
/// carry expected counts.
template <typename Count>
struct BasicCountTriple {
    Count n0 = 0;
    Count n1 = 0;
    Count n2 = 0;

    Count total() const { return n0 + n1 + n2; }
    bool operator==(const BasicCountTriple&) const = default;
};

using CountTriple = BasicCountTriple<std::uint64_t>;
using ExpectedCounts = BasicCountTriple<double>;
using OutcomeProbabilitiesd = OutcomeProbabilities<double>;
using LossModeld = LossModel<double>;

/// Lossy three-outcome detection. Bunched pairs register as one click:
///   p0 = g^2
///   p1 = 2g(1-g) pc + (1-g^2)(1-pc)
///   p2 = (1-g)^2 pc
template <typename Scalar>
OutcomeProbabilities<Scalar> outcome_probabilities(Scalar pc, const LossModel<Scalar>& loss) {
    if (!(pc >= Scalar(0) && pc <= Scalar(1))) {
        throw DomainError("coincidence probability must lie in [0, 1]");
    }
    loss.validate();
    const Scalar g = loss.gamma;
    const Scalar kept = Scalar(1) - g;
    return {g * g, Scalar(2) * g * kept * pc + (Scalar(1) - g * g) * (Scalar(1) - pc), kept * kept * pc};
}

template <typename Scalar, typename Count>
BasicCountTriple<Scalar> expected_counts(const OutcomeProbabilities<Scalar>& probs, Count n_trials) {
    const auto n = static_cast<Scalar>(n_trials);
    return {n * probs.p0, n * probs.p1, n * probs.p2};
}

/// Multinomial log-likelihood without the multinomial coefficient.
/// Returns -inf when an observed outcome has zero probability.
template <typename Scalar, typename Count>
Scalar log_likelihood(const BasicCountTriple<Count>& counts, Scalar theta, const LossModel<Scalar>& loss,
                      const InterferometerConfig<Scalar>& cfg, Scalar dz) {
    using std::log;
    const auto probs = outcome_probabilities(coincidence_probability(theta, dz, cfg), loss);
    Scalar total = Scalar(0);
    auto add = [&total](Count n, Scalar p) {
        if (n == Count(0)) {
            return;
        }
        if (p <= Scalar(0)) {
            total = -std::numeric_limits<Scalar>::infinity();
            return;
        }
        total += static_cast<Scalar>(n) * log(p);
    };
    add(counts.n0, probs.p0);
    add(counts.n1, probs.p1);
    add(counts.n2, probs.p2);
    return total;
}

}  // namespace hompol

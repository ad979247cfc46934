#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hompol/errors.hpp"
#include "hompol/polarization.hpp"

namespace hompol {

/// Two-port beam splitter with amplitude transmission t and reflection r.
template <typename Scalar>
struct BeamSplitter {
    std::complex<Scalar> t{Scalar(1) / std::sqrt(Scalar(2)), Scalar(0)};
    std::complex<Scalar> r{Scalar(0), Scalar(1) / std::sqrt(Scalar(2))};

    void validate() const {
        using std::abs;
        if (abs(std::norm(t) + std::norm(r) - Scalar(1)) > detail::unit_tolerance<Scalar>()) {
            throw DomainError("beam splitter must satisfy |t|^2 + |r|^2 = 1");
        }
    }

    // Coincidence probability for fully distinguishable photons.
    Scalar distinguishable_coincidence() const { return std::norm(t) * std::norm(t) + std::norm(r) * std::norm(r); }

    bool operator==(const BeamSplitter&) const = default;
};

template <typename Scalar>
struct InterferometerConfig {
    Scalar coherence_length_mm = Scalar(1);
    Scalar max_visibility = Scalar(1);
    BeamSplitter<Scalar> splitter{};

    void validate() const {
        using std::isfinite;
        if (!isfinite(coherence_length_mm) || !(coherence_length_mm > Scalar(0))) {
            throw DomainError("coherence length must be positive");
        }
        if (!(max_visibility > Scalar(0) && max_visibility <= Scalar(1))) {
            throw DomainError("max visibility must lie in (0, 1]");
        }
        splitter.validate();
    }

    bool operator==(const InterferometerConfig&) const = default;
};

using BeamSplitterd = BeamSplitter<double>;
using InterferometerConfigd = InterferometerConfig<double>;

/// Probability that two Gaussian wavepackets separated by `dz` are
/// indistinguishable: exp(-dz^2 / lc^2).
template <typename Scalar>
Scalar overlap_probability(Scalar dz, Scalar lc) {
    using std::exp;
    using std::isfinite;
    if (!(lc > Scalar(0)) || !isfinite(lc)) {
        throw DomainError("coherence length must be positive");
    }
    detail::require_finite(dz, "delay must be finite");
    return exp(-(dz * dz) / (lc * lc));
}

/// Brute-force two-photon coincidence probability for perfectly
/// indistinguishable wavepackets.
///
/// The symmetric input state |phi1>_S |phi2>_I + |phi2>_S |phi1>_I (phi1 =
/// `input_pol`, phi2 = `reference_pol`) is written as a first-quantized
/// two-photon amplitude over the four single-photon modes (path x
/// polarization), symmetrized under exchange, propagated by the sample
/// (signal path only) and the beam splitter, and the weight of every
/// configuration with one photon per output port is summed.
template <typename Scalar>
Scalar coincidence_indistinguishable(const JonesMatrix<Scalar>& sample,
                                     const PolarizationVector<Scalar>& reference_pol,
                                     const PolarizationVector<Scalar>& input_pol,
                                     const BeamSplitter<Scalar>& bs = {}) {
    using Complex = std::complex<Scalar>;
    using Mode = Eigen::Matrix<Complex, 4, 1>;
    using Operator = Eigen::Matrix<Complex, 4, 4>;
    bs.validate();

    // Mode index = 2 * path + polarization; path 0 is the signal arm
    // (and output port 0), path 1 the idler arm (output port 1).
    auto in_path = [](int path, const JonesVector<Scalar>& pol) {
        Mode m = Mode::Zero();
        m.template segment<2>(2 * path) = pol;
        return m;
    };
    const auto& phi1 = input_pol.components();
    const auto& phi2 = reference_pol.components();

    Operator amplitude = in_path(0, phi1) * in_path(1, phi2).transpose() +
                         in_path(0, phi2) * in_path(1, phi1).transpose();
    amplitude = (amplitude + amplitude.transpose()).eval();

    Operator sample_op = Operator::Identity();
    sample_op.template topLeftCorner<2, 2>() = sample;

    Operator splitter = Operator::Zero();
    const auto eye = JonesMatrix<Scalar>::Identity();
    splitter.template block<2, 2>(0, 0) = bs.t * eye;
    splitter.template block<2, 2>(0, 2) = bs.r * eye;
    splitter.template block<2, 2>(2, 0) = bs.r * eye;
    splitter.template block<2, 2>(2, 2) = bs.t * eye;

    const Operator evolution = splitter * sample_op;
    const Operator out = evolution * amplitude * evolution.transpose();

    const Scalar total = out.cwiseAbs2().sum();
    const Scalar split = out.template block<2, 2>(0, 2).cwiseAbs2().sum() +
                         out.template block<2, 2>(2, 0).cwiseAbs2().sum();
    return split / total;
}

/// Closed-form coincidence probability behind a half-wave retarder:
/// 1/2 [1 - alpha exp(-dz^2/lc^2) cos^2(2 theta)].
template <typename Scalar>
Scalar coincidence_probability(Scalar theta, Scalar dz, const InterferometerConfig<Scalar>& cfg) {
    using std::cos;
    cfg.validate();
    detail::require_finite(theta, "angle must be finite");
    const Scalar c = cos(Scalar(2) * theta);
    const Scalar p = overlap_probability(dz, cfg.coherence_length_mm);
    return (Scalar(1) - cfg.max_visibility * p * c * c) / Scalar(2);
}

/// Mixture of the indistinguishable and distinguishable limits, weighted
/// by alpha * overlap(dz).
template <typename Scalar>
Scalar coincidence_mixture(const JonesMatrix<Scalar>& sample, Scalar dz, const InterferometerConfig<Scalar>& cfg) {
    cfg.validate();
    const Scalar weight = cfg.max_visibility * overlap_probability(dz, cfg.coherence_length_mm);
    const auto h = PolarizationVector<Scalar>::horizontal();
    const Scalar indist = coincidence_indistinguishable(sample, h, h, cfg.splitter);
    return weight * indist + (Scalar(1) - weight) * cfg.splitter.distinguishable_coincidence();
}

template <typename Scalar>
struct DipPoint {
    Scalar dz;
    Scalar probability;
};

template <typename Scalar>
std::vector<DipPoint<Scalar>> dip_curve(const JonesMatrix<Scalar>& sample, std::span<const Scalar> dz_values,
                                        const InterferometerConfig<Scalar>& cfg) {
    if (dz_values.empty()) {
        throw DomainError("dip curve needs at least one delay");
    }
    std::vector<DipPoint<Scalar>> curve;
    curve.reserve(dz_values.size());
    for (Scalar dz : dz_values) {
        curve.push_back({dz, coincidence_mixture(sample, dz, cfg)});
    }
    return curve;
}

}  // namespace hompol

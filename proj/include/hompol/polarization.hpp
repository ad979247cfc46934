#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "hompol/errors.hpp"

namespace hompol {

template <typename Scalar>
using JonesMatrix = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
using JonesVector = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

using JonesMatrixd = JonesMatrix<double>;
using JonesVectord = JonesVector<double>;

namespace detail {

template <typename Scalar>
constexpr Scalar unit_tolerance() {
    return std::max<Scalar>(Scalar(1e-12), Scalar(64) * std::numeric_limits<Scalar>::epsilon());
}

template <typename Scalar>
void require_finite(Scalar value, const char* message) {
    using std::isfinite;
    if (!isfinite(value)) {
        throw DomainError(message);
    }
}

}  // namespace detail

/// Unit-norm Jones vector (H, V amplitudes).
template <typename Scalar>
class PolarizationVector {
public:
    using Vector = JonesVector<Scalar>;

    explicit PolarizationVector(const Vector& components) : components_(components) {
        using std::abs;
        if (!components.allFinite() ||
            abs(components.squaredNorm() - Scalar(1)) > detail::unit_tolerance<Scalar>()) {
            throw DomainError("polarization vector must have unit norm");
        }
    }

    static PolarizationVector horizontal() { return PolarizationVector(Vector(Scalar(1), Scalar(0))); }
    static PolarizationVector vertical() { return PolarizationVector(Vector(Scalar(0), Scalar(1))); }

    // Linear polarization at `angle` from horizontal.
    static PolarizationVector linear(Scalar angle) {
        using std::cos;
        using std::sin;
        detail::require_finite(angle, "polarization angle must be finite");
        return PolarizationVector(Vector(cos(angle), sin(angle)));
    }

    const Vector& components() const { return components_; }

private:
    Vector components_;
};

using PolarizationVectord = PolarizationVector<double>;

/// Active rotation [[c, s], [-s, c]].
template <typename Scalar>
JonesMatrix<Scalar> rotation(Scalar theta) {
    using std::cos;
    using std::sin;
    detail::require_finite(theta, "rotation angle must be finite");
    const Scalar c = cos(theta);
    const Scalar s = sin(theta);
    JonesMatrix<Scalar> r;
    r << c, s, -s, c;
    return r;
}

/// Linear retarder with fast axis at `theta` and retardance `delta`:
/// R(-theta) diag(e^{i delta/2}, e^{-i delta/2}) R(theta).
template <typename Scalar>
JonesMatrix<Scalar> retarder(Scalar theta, Scalar delta) {
    detail::require_finite(theta, "retarder angle must be finite");
    detail::require_finite(delta, "retardance must be finite");
    JonesMatrix<Scalar> phase = JonesMatrix<Scalar>::Zero();
    phase(0, 0) = std::polar(Scalar(1), delta / Scalar(2));
    phase(1, 1) = std::polar(Scalar(1), -delta / Scalar(2));
    return rotation(-theta) * phase * rotation(theta);
}

/// Product of a stack of elements; the first element acts first.
template <typename Scalar>
JonesMatrix<Scalar> compose(std::span<const JonesMatrix<Scalar>> elements) {
    if (elements.empty()) {
        throw DomainError("cannot compose an empty element list");
    }
    JonesMatrix<Scalar> total = elements.front();
    for (const auto& element : elements.subspan(1)) {
        total = (element * total).eval();
    }
    return total;
}

template <typename Scalar>
bool is_unitary(const JonesMatrix<Scalar>& m, Scalar tolerance = detail::unit_tolerance<Scalar>()) {
    return (m.adjoint() * m - JonesMatrix<Scalar>::Identity()).cwiseAbs().maxCoeff() <= tolerance;
}

/// |<H|J|H>|^2, the fraction of a horizontal photon that stays horizontal.
template <typename Scalar>
Scalar copolarized_transmission(const JonesMatrix<Scalar>& m) {
    return std::norm(m(0, 0));
}

/// Fast-axis angle of the half-wave retarder that reproduces the
/// copolarized transmission of `m`; principal value in [0, pi/4].
template <typename Scalar>
Scalar effective_angle(const JonesMatrix<Scalar>& m) {
    using std::acos;
    using std::sqrt;
    const Scalar t = std::clamp(copolarized_transmission(m), Scalar(0), Scalar(1));
    return acos(sqrt(t)) / Scalar(2);
}

}  // namespace hompol

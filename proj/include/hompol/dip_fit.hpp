#pragma once

#include <span>

namespace hompol {

/// Least-squares fit of y(dz) = c0 - c1 exp(-(dz - dz0)^2 / lc^2) with lc
/// held fixed.
struct DipFit {
    double c0 = 0.0;
    double c1 = 0.0;
    double dz0 = 0.0;
    double dz0_stderr = 0.0;
    double c1_stderr = 0.0;
    double rss = 0.0;
    bool converged = false;  // minimum found strictly inside the sweep
    bool flat = false;       // dip depth not distinguishable from zero

    bool ok() const { return converged && !flat; }
};

/// Variable projection: c0 and c1 are solved linearly for each trial centre,
/// the centre is located by a grid search refined with golden-section search.
DipFit fit_gaussian_dip(std::span<const double> dz, std::span<const double> y, double lc);

}  // namespace hompol

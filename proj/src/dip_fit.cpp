#include "hompol/dip_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hompol/errors.hpp"

namespace hompol {

namespace {

struct LinearSolution {
    double c0;
    double c1;
    double rss;
};

class DipModel {
public:
    DipModel(std::span<const double> dz, std::span<const double> y, double lc)
        : dz_(Eigen::Map<const Eigen::VectorXd>(dz.data(), static_cast<Eigen::Index>(dz.size()))),
          y_(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))),
          lc_(lc) {}

    Eigen::VectorXd gaussian(double centre) const {
        return (-((dz_.array() - centre) / lc_).square()).exp().matrix();
    }

    LinearSolution solve(double centre) const {
        Eigen::MatrixXd design(dz_.size(), 2);
        design.col(0).setOnes();
        design.col(1) = -gaussian(centre);
        const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y_);
        return {coef(0), coef(1), (design * coef - y_).squaredNorm()};
    }

    const Eigen::VectorXd& dz() const { return dz_; }
    double lc() const { return lc_; }

private:
    Eigen::VectorXd dz_;
    Eigen::VectorXd y_;
    double lc_;
};

}  // namespace

DipFit fit_gaussian_dip(std::span<const double> dz, std::span<const double> y, double lc) {
    if (dz.size() != y.size()) {
        throw DomainError("dip fit needs matching delay and signal arrays");
    }
    if (dz.size() < 4) {
        throw DomainError("dip fit needs at least four points");
    }
    if (!(lc > 0.0)) {
        throw DomainError("coherence length must be positive");
    }
    const DipModel model(dz, y, lc);
    const auto [lo_it, hi_it] = std::minmax_element(dz.begin(), dz.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    constexpr int grid_points = 401;
    const double step = (hi - lo) / (grid_points - 1);
    int best = 0;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double rss = model.solve(lo + i * step).rss;
        if (rss < best_rss) {
            best_rss = rss;
            best = i;
        }
    }

    // Golden-section refinement on the bracketing grid cells.
    double a = lo + std::max(0, best - 1) * step;
    double b = lo + std::min(grid_points - 1, best + 1) * step;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - ratio * (b - a);
    double x2 = a + ratio * (b - a);
    double f1 = model.solve(x1).rss;
    double f2 = model.solve(x2).rss;
    while (b - a > 1e-12 * std::max(1.0, lc)) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = model.solve(x1).rss;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = model.solve(x2).rss;
        }
    }

    DipFit fit;
    fit.dz0 = (a + b) / 2.0;
    const LinearSolution sol = model.solve(fit.dz0);
    fit.c0 = sol.c0;
    fit.c1 = sol.c1;
    fit.rss = sol.rss;
    fit.converged = best > 0 && best < grid_points - 1;

    // Asymptotic standard errors from the Jacobian at the optimum.
    const auto n = model.dz().size();
    const Eigen::VectorXd g = model.gaussian(fit.dz0);
    Eigen::MatrixXd jac(n, 3);
    jac.col(0).setOnes();
    jac.col(1) = -g;
    jac.col(2) = (-fit.c1 * 2.0 / (lc * lc)) * (g.array() * (model.dz().array() - fit.dz0)).matrix();
    const double sigma2 = fit.rss / static_cast<double>(n - 3);
    const Eigen::Matrix3d normal = jac.transpose() * jac;
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    if (lu.isInvertible()) {
        const Eigen::Matrix3d cov = sigma2 * lu.inverse();
        fit.c1_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
        fit.dz0_stderr = std::sqrt(std::max(0.0, cov(2, 2)));
    } else {
        fit.c1_stderr = std::numeric_limits<double>::infinity();
        fit.dz0_stderr = std::numeric_limits<double>::infinity();
    }
    const double floor = std::max(1e-12, std::abs(fit.c0) * 1e-9);
    fit.flat = !(fit.c1 > floor) || !(fit.c1 > 5.0 * fit.c1_stderr);
    return fit;
}

}  // namespace hompol

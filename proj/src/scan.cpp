#include "hompol/scan.hpp"

#include <cmath>
#include <limits>

#include "hompol/errors.hpp"
#include "hompol/montecarlo.hpp"
#include "hompol/parallel.hpp"

namespace hompol {

Region Region::resolved(const PhantomGrid& grid) const {
    Region r = *this;
    if (r.width == 0) {
        r.width = grid.width() - r.x;
    }
    if (r.height == 0) {
        r.height = grid.height() - r.y;
    }
    if (r.x < 0 || r.y < 0 || r.width < 1 || r.height < 1 || r.x + r.width > grid.width() ||
        r.y + r.height > grid.height()) {
        throw DomainError("scan region lies outside the phantom");
    }
    return r;
}

void ScanPlan::validate(const InterferometerConfigd& cfg) const {
    cfg.validate();
    if (!std::isfinite(dip_dz_mm) || !std::isfinite(baseline_dz_mm)) {
        throw DomainError("delay settings must be finite");
    }
    if (std::abs(baseline_dz_mm) < 3.0 * cfg.coherence_length_mm) {
        throw DomainError("baseline delay must be at least 3 coherence lengths from the dip");
    }
    TrialPlan{trials_per_frame, accidental_rate}.validate();
}

OutcomeProbabilitiesd pixel_probabilities(const PhantomGrid& grid, int x, int y, double dz_setting,
                                          const InterferometerConfigd& cfg) {
    const PixelTruth& truth = grid.truth(x, y);
    const double dz = dz_setting - truth.delay_shift_mm();
    const double pc = std::clamp(coincidence_mixture(grid.jones(x, y), dz, cfg), 0.0, 1.0);
    return outcome_probabilities(pc, LossModeld{truth.gamma});
}

ScanFrame acquire_frame(const PhantomGrid& grid, double dz_setting, const ScanPlan& plan,
                        const InterferometerConfigd& cfg, RandomStream stream, unsigned threads) {
    plan.validate(cfg);
    const Region region = plan.region.resolved(grid);
    ScanFrame frame(region, dz_setting);
    const TrialPlan trials{plan.trials_per_frame, plan.accidental_rate};
    const auto n = static_cast<std::size_t>(region.width) * region.height;
    parallel_for(n, threads, [&](std::size_t i) {
        const int row = static_cast<int>(i / region.width);
        const int col = static_cast<int>(i % region.width);
        const int x = region.x + col;
        const int y = region.y + row;
        const auto probs = pixel_probabilities(grid, x, y, dz_setting, cfg);
        const RandomStream pixel_stream{stream.master_seed, stream.stream_index + grid.linear_index(x, y)};
        frame.set(row, col, sample_counts(probs, trials, pixel_stream));
    });
    return frame;
}

ExpectedFrame expected_frame(const PhantomGrid& grid, double dz_setting, const ScanPlan& plan,
                             const InterferometerConfigd& cfg) {
    plan.validate(cfg);
    const Region region = plan.region.resolved(grid);
    ExpectedFrame frame(region, dz_setting);
    for (int row = 0; row < region.height; ++row) {
        for (int col = 0; col < region.width; ++col) {
            const auto probs = pixel_probabilities(grid, region.x + col, region.y + row, dz_setting, cfg);
            frame.set(row, col, expected_counts(probs, plan.trials_per_frame));
        }
    }
    return frame;
}

template <typename Count>
EstimateMap build_maps(const BasicScanFrame<Count>& dip, const BasicScanFrame<Count>& baseline, double alpha) {
    if (!(dip.region == baseline.region)) {
        throw DomainError("dip and baseline frames cover different regions");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("max visibility must lie in (0, 1]");
    }
    const Region& region = dip.region;
    const int rows = region.height;
    const int cols = region.width;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    EstimateMap map;
    map.region = region;
    map.alpha = alpha;
    map.gamma.setConstant(rows, cols, nan);
    map.visibility.setConstant(rows, cols, nan);
    map.theta.setConstant(rows, cols, nan);
    map.mirror_theta.setConstant(rows, cols, nan);
    map.crb.setConstant(rows, cols, nan);
    map.flags.setConstant(rows, cols, static_cast<std::uint8_t>(EstimateFlag::Invalid));
    map.gamma_clamped.setZero(rows, cols);

    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            const auto base = baseline.at(row, col);
            const auto counts = dip.at(row, col);
            if (base.n1 + base.n2 == Count(0) || counts.n1 + counts.n2 == Count(0)) {
                continue;
            }
            const auto cal = estimate_gamma(base);
            const auto est = estimate_theta(counts, cal.gamma_hat, alpha);
            map.gamma(row, col) = cal.gamma_hat;
            map.gamma_clamped(row, col) = cal.gamma_clamped ? 1 : 0;
            map.visibility(row, col) = est.visibility;
            map.theta(row, col) = est.theta_hat;
            map.mirror_theta(row, col) = est.mirror_theta;
            map.crb(row, col) = est.crb_std;
            map.flags(row, col) = static_cast<std::uint8_t>(est.flag);
        }
    }
    return map;
}

template EstimateMap build_maps(const ScanFrame&, const ScanFrame&, double);
template EstimateMap build_maps(const ExpectedFrame&, const ExpectedFrame&, double);

template <typename Count>
std::optional<CalibrationResultd> calibrate_alpha(const PhantomGrid& grid, const BasicScanFrame<Count>& dip,
                                                  const BasicScanFrame<Count>& baseline) {
    const Region& region = dip.region;
    std::vector<double> blank;
    for (int row = 0; row < region.height; ++row) {
        for (int col = 0; col < region.width; ++col) {
            if (grid.truth(region.x + col, region.y + row).layer_count != 0) {
                continue;
            }
            const auto base = baseline.at(row, col);
            const auto counts = dip.at(row, col);
            if (base.n1 + base.n2 == Count(0) || counts.n1 + counts.n2 == Count(0)) {
                continue;
            }
            blank.push_back(visibility(counts, estimate_gamma(base).gamma_hat));
        }
    }
    if (blank.empty()) {
        return std::nullopt;
    }
    return estimate_alpha<double>(blank);
}

template std::optional<CalibrationResultd> calibrate_alpha(const PhantomGrid&, const ScanFrame&, const ScanFrame&);
template std::optional<CalibrationResultd> calibrate_alpha(const PhantomGrid&, const ExpectedFrame&,
                                                           const ExpectedFrame&);

Grid<double> classical_reference(const PhantomGrid& grid) {
    Grid<double> map(grid.height(), grid.width());
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            map(y, x) = copolarized_transmission(grid.jones(x, y));
        }
    }
    return map;
}

std::vector<DipStudy> dip_position_study(const PhantomGrid& grid, std::span<const std::pair<int, int>> pixels,
                                         std::span<const double> dz_sweep, const ScanPlan& plan,
                                         const InterferometerConfigd& cfg, RandomStream stream, unsigned threads) {
    cfg.validate();
    if (dz_sweep.size() < 4) {
        throw DomainError("dip sweep needs at least four delays");
    }
    const TrialPlan trials{plan.trials_per_frame, plan.accidental_rate};
    trials.validate();
    for (const auto& [x, y] : pixels) {
        if (!grid.in_bounds(x, y)) {
            throw DomainError("dip study pixel outside the phantom");
        }
    }

    std::vector<DipStudy> studies(pixels.size());
    parallel_for(pixels.size(), threads, [&](std::size_t p) {
        const auto [x, y] = pixels[p];
        DipStudy& s = studies[p];
        s.x = x;
        s.y = y;
        s.layer_count = grid.truth(x, y).layer_count;
        s.expected_shift_mm = pixel_delay_shift(grid, x, y);
        s.dz_mm.assign(dz_sweep.begin(), dz_sweep.end());
        for (std::size_t k = 0; k < dz_sweep.size(); ++k) {
            const auto probs = pixel_probabilities(grid, x, y, dz_sweep[k], cfg);
            const RandomStream point{stream.master_seed,
                                     stream.stream_index + stream_index(StreamPurpose::DipSweep,
                                                                        static_cast<std::uint32_t>(p),
                                                                        static_cast<std::uint32_t>(k))};
            const CountTriple c = sample_counts(probs, trials, point);
            s.counts.push_back(c);
            s.coincidence_fraction.push_back(static_cast<double>(c.n2) / static_cast<double>(c.total()));
        }
        s.fit = fit_gaussian_dip(s.dz_mm, s.coincidence_fraction, cfg.coherence_length_mm);
    });
    return studies;
}

}  // namespace hompol

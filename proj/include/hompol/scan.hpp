#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hompol/detection.hpp"
#include "hompol/dip_fit.hpp"
#include "hompol/hom.hpp"
#include "hompol/inference.hpp"
#include "hompol/phantom.hpp"
#include "hompol/random.hpp"

namespace hompol {

/// Rectangle of pixels; width or height of 0 means "to the grid edge".
struct Region {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    Region resolved(const PhantomGrid& grid) const;
    bool operator==(const Region&) const = default;
};

/// Two-frame acquisition: a dip frame near zero delay and a baseline frame
/// far outside the coherence length, with equal trials per frame.
struct ScanPlan {
    double dip_dz_mm = 0.0;
    double baseline_dz_mm = 5.0;
    std::uint64_t trials_per_frame = 100000;
    double accidental_rate = 0.0;
    Region region;

    // Requires |baseline_dz| >= 3 lc.
    void validate(const InterferometerConfigd& cfg) const;
    bool operator==(const ScanPlan&) const = default;
};

template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Counts over a scan region at one delay setting, indexed (row = y, col = x)
/// relative to the region origin.
template <typename Count>
struct BasicScanFrame {
    Region region;
    double dz_mm = 0.0;
    Grid<Count> n0;
    Grid<Count> n1;
    Grid<Count> n2;

    BasicScanFrame() = default;
    BasicScanFrame(Region r, double dz) : region(r), dz_mm(dz), n0(r.height, r.width), n1(r.height, r.width),
                                          n2(r.height, r.width) {}

    BasicCountTriple<Count> at(int row, int col) const { return {n0(row, col), n1(row, col), n2(row, col)}; }
    void set(int row, int col, const BasicCountTriple<Count>& c) {
        n0(row, col) = c.n0;
        n1(row, col) = c.n1;
        n2(row, col) = c.n2;
    }
};

using ScanFrame = BasicScanFrame<std::uint64_t>;
using ExpectedFrame = BasicScanFrame<double>;

/// Per-pixel outcome probabilities at a delay setting; the film stack delay
/// is subtracted from the setting before evaluating the overlap.
OutcomeProbabilitiesd pixel_probabilities(const PhantomGrid& grid, int x, int y, double dz_setting,
                                          const InterferometerConfigd& cfg);

/// Sampled frame. Pixel (x, y) draws from stream index
/// stream.stream_index + grid.linear_index(x, y); results do not depend on
/// `threads`.
ScanFrame acquire_frame(const PhantomGrid& grid, double dz_setting, const ScanPlan& plan,
                        const InterferometerConfigd& cfg, RandomStream stream, unsigned threads = 1);

/// Noise-free frame holding N * p_i for every pixel.
ExpectedFrame expected_frame(const PhantomGrid& grid, double dz_setting, const ScanPlan& plan,
                             const InterferometerConfigd& cfg);

struct EstimateMap {
    Region region;
    double alpha = 1.0;
    Grid<double> gamma;
    Grid<double> visibility;
    Grid<double> theta;
    Grid<double> mirror_theta;
    Grid<double> crb;
    Grid<std::uint8_t> flags;
    Grid<std::uint8_t> gamma_clamped;

    EstimateFlag flag(int row, int col) const { return static_cast<EstimateFlag>(flags(row, col)); }
};

/// Per pixel: gamma from the baseline counts, then visibility and angle from
/// the dip counts with that gamma. Pixels without events in either frame are
/// flagged Invalid and hold NaN.
template <typename Count>
EstimateMap build_maps(const BasicScanFrame<Count>& dip, const BasicScanFrame<Count>& baseline, double alpha);

/// Setup visibility from the dip frame over the uncovered pixels of the
/// region; empty optional when there are none.
template <typename Count>
std::optional<CalibrationResultd> calibrate_alpha(const PhantomGrid& grid, const BasicScanFrame<Count>& dip,
                                                  const BasicScanFrame<Count>& baseline);

/// Malus-law reference |<H|J|H>|^2 for every phantom pixel (I0 = 1).
Grid<double> classical_reference(const PhantomGrid& grid);

struct DipStudy {
    int x = 0;
    int y = 0;
    int layer_count = 0;
    double expected_shift_mm = 0.0;
    std::vector<double> dz_mm;
    std::vector<CountTriple> counts;
    std::vector<double> coincidence_fraction;  // n2 / N
    DipFit fit;
};

/// Simulated dip sweeps at selected pixels, each fitted with a Gaussian dip.
/// Sweep point k of pixel p draws from stream_index(DipSweep, p, k) offset by
/// stream.stream_index.
std::vector<DipStudy> dip_position_study(const PhantomGrid& grid, std::span<const std::pair<int, int>> pixels,
                                         std::span<const double> dz_sweep, const ScanPlan& plan,
                                         const InterferometerConfigd& cfg, RandomStream stream,
                                         unsigned threads = 1);

}  // namespace hompol

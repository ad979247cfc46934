#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "hompol/polarization.hpp"
#include "hompol/random.hpp"

namespace hompol {

/// Per-layer film properties shared by all shards.
struct LayerProperties {
    double thickness_um = 60.0;
    double refractive_index = 1.5;

    // Extra optical path of one layer, d (n - 1), in millimeters.
    double delay_mm() const { return thickness_um * (refractive_index - 1.0) * 1e-3; }

    bool operator==(const LayerProperties&) const = default;
};

/// Convex retarder-film fragment in pixel coordinates; pixel (x, y) covers
/// [x, x+1) x [y, y+1) and is inside a shard when its centre is.
struct Shard {
    std::vector<Eigen::Vector2d> vertices;
    double theta = 0.0;
    double delta = std::numbers::pi;
    double gamma = 0.0;

    bool contains(const Eigen::Vector2d& point) const;
    // Orders vertices counter-clockwise; throws unless they form a convex polygon.
    void normalize();

    static Shard rectangle(double x0, double y0, double x1, double y1, double theta,
                           double delta = std::numbers::pi, double gamma = 0.0);
};

/// Replaces everything at one pixel with a single retarder.
struct PixelOverride {
    int x = 0;
    int y = 0;
    double theta = 0.0;
    double delta = std::numbers::pi;
    double gamma = 0.0;
    int layer_count = 1;
};

/// Ground truth at one scan position. For stacks of two or more shards
/// theta is the half-wave-equivalent principal angle of the stack and
/// delta is pi.
struct PixelTruth {
    double theta = 0.0;
    double delta = 0.0;
    int layer_count = 0;
    double thickness_um = 60.0;
    double refractive_index = 1.5;
    double gamma = 0.0;

    double delay_shift_mm() const { return layer_count * thickness_um * (refractive_index - 1.0) * 1e-3; }
};

class PhantomGrid {
public:
    static PhantomGrid from_shards(int width, int height, double pixel_pitch_um, std::vector<Shard> shards,
                                   LayerProperties layer = {}, double base_gamma = 0.0,
                                   std::vector<PixelOverride> overrides = {});

    int width() const { return width_; }
    int height() const { return height_; }
    double pixel_pitch_um() const { return pixel_pitch_um_; }
    const LayerProperties& layer() const { return layer_; }
    double base_gamma() const { return base_gamma_; }
    const std::vector<Shard>& shards() const { return shards_; }
    const std::vector<PixelOverride>& overrides() const { return overrides_; }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    std::size_t linear_index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    const PixelTruth& truth(int x, int y) const;
    const JonesMatrixd& jones(int x, int y) const;

    // Maps indexed (row = y, col = x).
    Eigen::ArrayXXd effective_theta_map() const;
    Eigen::ArrayXXd gamma_map() const;
    Eigen::ArrayXXi layer_count_map() const;

private:
    PhantomGrid() = default;
    void check(int x, int y) const;

    int width_ = 0;
    int height_ = 0;
    double pixel_pitch_um_ = 1.0;
    LayerProperties layer_;
    double base_gamma_ = 0.0;
    std::vector<Shard> shards_;
    std::vector<PixelOverride> overrides_;
    std::vector<PixelTruth> truth_;
    std::vector<JonesMatrixd> jones_;
};

struct ShardGenerationParams {
    int width = 32;
    int height = 32;
    double pixel_pitch_um = 10.0;
    std::size_t n_shards = 6;
    double min_radius_px = 4.0;
    double max_radius_px = 12.0;
    int min_vertices = 3;
    int max_vertices = 8;
    double retardance = std::numbers::pi;
    double shard_gamma_min = 0.0;
    double shard_gamma_max = 0.0;
    double base_gamma = 0.0;
    LayerProperties layer;

    void validate() const;
    bool operator==(const ShardGenerationParams&) const = default;
};

/// Draws a fast-axis angle for one shard.
using AngleSampler = std::function<double(StreamGenerator&)>;

/// Uniform fast-axis angles on [0, pi).
double uniform_angle(StreamGenerator& gen);

/// Random convex shards (vertices on a randomly sized and rotated ellipse),
/// stacked in generation order.
PhantomGrid generate_shards(std::uint64_t seed, const ShardGenerationParams& params,
                            const AngleSampler& angle_sampler = uniform_angle);

JonesMatrixd pixel_jones(const PhantomGrid& grid, int x, int y);

/// Optical delay added by the film stack at (x, y), in millimeters.
double pixel_delay_shift(const PhantomGrid& grid, int x, int y);

}  // namespace hompol

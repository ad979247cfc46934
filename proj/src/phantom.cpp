#include "hompol/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hompol/errors.hpp"

namespace hompol {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Eigen::Vector2d>& v) {
    double area = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        area += cross(v[i], v[(i + 1) % v.size()]);
    }
    return area / 2.0;
}

}  // namespace

void Shard::normalize() {
    if (vertices.size() < 3) {
        throw DomainError("a shard needs at least three vertices");
    }
    if (signed_area(vertices) < 0.0) {
        std::reverse(vertices.begin(), vertices.end());
    }
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d e1 = vertices[(i + 1) % n] - vertices[i];
        const Eigen::Vector2d e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        if (cross(e1, e2) < -1e-12) {
            throw DomainError("shard polygon is not convex");
        }
    }
    if (!std::isfinite(theta) || !std::isfinite(delta)) {
        throw DomainError("shard angle and retardance must be finite");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw DomainError("shard absorption must lie in [0, 1)");
    }
}

bool Shard::contains(const Eigen::Vector2d& p) const {
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (cross(vertices[(i + 1) % n] - vertices[i], p - vertices[i]) < 0.0) {
            return false;
        }
    }
    return n >= 3;
}

Shard Shard::rectangle(double x0, double y0, double x1, double y1, double theta, double delta, double gamma) {
    Shard s;
    s.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    s.theta = theta;
    s.delta = delta;
    s.gamma = gamma;
    s.normalize();
    return s;
}

PhantomGrid PhantomGrid::from_shards(int width, int height, double pixel_pitch_um, std::vector<Shard> shards,
                                     LayerProperties layer, double base_gamma,
                                     std::vector<PixelOverride> overrides) {
    if (width < 1 || height < 1) {
        throw DomainError("phantom dimensions must be positive");
    }
    if (!(pixel_pitch_um > 0.0)) {
        throw DomainError("pixel pitch must be positive");
    }
    if (!(layer.thickness_um >= 0.0) || !(layer.refractive_index >= 1.0)) {
        throw DomainError("layer thickness must be non-negative and refractive index at least 1");
    }
    if (!(base_gamma >= 0.0 && base_gamma < 1.0)) {
        throw DomainError("base absorption must lie in [0, 1)");
    }
    for (auto& s : shards) {
        s.normalize();
    }

    PhantomGrid grid;
    grid.width_ = width;
    grid.height_ = height;
    grid.pixel_pitch_um_ = pixel_pitch_um;
    grid.layer_ = layer;
    grid.base_gamma_ = base_gamma;
    grid.shards_ = std::move(shards);
    grid.overrides_ = std::move(overrides);
    grid.truth_.resize(static_cast<std::size_t>(width) * height);
    grid.jones_.assign(grid.truth_.size(), JonesMatrixd::Identity());

    std::vector<JonesMatrixd> stack;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Eigen::Vector2d centre(x + 0.5, y + 0.5);
            stack.clear();
            PixelTruth truth;
            truth.thickness_um = layer.thickness_um;
            truth.refractive_index = layer.refractive_index;
            double transmitted = 1.0 - base_gamma;
            const Shard* top = nullptr;
            for (const auto& shard : grid.shards_) {
                if (shard.contains(centre)) {
                    stack.push_back(retarder(shard.theta, shard.delta));
                    transmitted *= 1.0 - shard.gamma;
                    top = &shard;
                }
            }
            truth.layer_count = static_cast<int>(stack.size());
            truth.gamma = 1.0 - transmitted;
            const std::size_t idx = grid.linear_index(x, y);
            if (!stack.empty()) {
                grid.jones_[idx] = compose<double>(stack);
            }
            if (truth.layer_count == 1) {
                truth.theta = top->theta;
                truth.delta = top->delta;
            } else if (truth.layer_count > 1) {
                truth.theta = effective_angle(grid.jones_[idx]);
                truth.delta = std::numbers::pi;
            }
            grid.truth_[idx] = truth;
        }
    }

    for (const auto& o : grid.overrides_) {
        if (!grid.in_bounds(o.x, o.y)) {
            throw DomainError("pixel override outside the phantom");
        }
        if (!(o.gamma >= 0.0 && o.gamma < 1.0) || o.layer_count < 0) {
            throw DomainError("invalid pixel override");
        }
        const std::size_t idx = grid.linear_index(o.x, o.y);
        grid.jones_[idx] = retarder(o.theta, o.delta);
        auto& t = grid.truth_[idx];
        t.theta = o.theta;
        t.delta = o.delta;
        t.gamma = o.gamma;
        t.layer_count = o.layer_count;
    }
    return grid;
}

void PhantomGrid::check(int x, int y) const {
    if (!in_bounds(x, y)) {
        throw DomainError("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") outside the phantom");
    }
}

const PixelTruth& PhantomGrid::truth(int x, int y) const {
    check(x, y);
    return truth_[linear_index(x, y)];
}

const JonesMatrixd& PhantomGrid::jones(int x, int y) const {
    check(x, y);
    return jones_[linear_index(x, y)];
}

Eigen::ArrayXXd PhantomGrid::effective_theta_map() const {
    Eigen::ArrayXXd map(height_, width_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            map(y, x) = effective_angle(jones_[linear_index(x, y)]);
        }
    }
    return map;
}

Eigen::ArrayXXd PhantomGrid::gamma_map() const {
    Eigen::ArrayXXd map(height_, width_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            map(y, x) = truth_[linear_index(x, y)].gamma;
        }
    }
    return map;
}

Eigen::ArrayXXi PhantomGrid::layer_count_map() const {
    Eigen::ArrayXXi map(height_, width_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            map(y, x) = truth_[linear_index(x, y)].layer_count;
        }
    }
    return map;
}

void ShardGenerationParams::validate() const {
    if (width < 1 || height < 1 || !(pixel_pitch_um > 0.0)) {
        throw DomainError("phantom dimensions and pitch must be positive");
    }
    if (!(min_radius_px > 0.0) || max_radius_px < min_radius_px) {
        throw DomainError("shard radii must satisfy 0 < min <= max");
    }
    if (min_vertices < 3 || max_vertices < min_vertices) {
        throw DomainError("shards need 3 <= min_vertices <= max_vertices");
    }
    if (!(shard_gamma_min >= 0.0) || shard_gamma_max < shard_gamma_min || !(shard_gamma_max < 1.0)) {
        throw DomainError("shard absorption range must lie in [0, 1)");
    }
}

double uniform_angle(StreamGenerator& gen) { return std::numbers::pi * gen.uniform(); }

PhantomGrid generate_shards(std::uint64_t seed, const ShardGenerationParams& params,
                            const AngleSampler& angle_sampler) {
    params.validate();
    StreamGenerator gen({seed, stream_index(StreamPurpose::Phantom, 0, 0)});
    auto between = [&gen](double lo, double hi) { return lo + (hi - lo) * gen.uniform(); };

    std::vector<Shard> shards;
    shards.reserve(params.n_shards);
    for (std::size_t i = 0; i < params.n_shards; ++i) {
        const Eigen::Vector2d centre(between(0.0, params.width), between(0.0, params.height));
        const double a = between(params.min_radius_px, params.max_radius_px);
        const double b = between(params.min_radius_px, params.max_radius_px);
        const double tilt = between(0.0, std::numbers::pi);
        const int span = params.max_vertices - params.min_vertices + 1;
        const int n_vertices = params.min_vertices + std::min(span - 1, static_cast<int>(gen.uniform() * span));

        std::vector<double> angles(n_vertices);
        for (auto& t : angles) {
            t = between(0.0, 2.0 * std::numbers::pi);
        }
        std::sort(angles.begin(), angles.end());

        const Eigen::Rotation2Dd rot(tilt);
        Shard shard;
        for (double t : angles) {
            shard.vertices.push_back(centre + rot * Eigen::Vector2d(a * std::cos(t), b * std::sin(t)));
        }
        shard.theta = angle_sampler(gen);
        shard.delta = params.retardance;
        shard.gamma = between(params.shard_gamma_min, params.shard_gamma_max);
        shards.push_back(std::move(shard));
    }
    return PhantomGrid::from_shards(params.width, params.height, params.pixel_pitch_um, std::move(shards),
                                    params.layer, params.base_gamma);
}

JonesMatrixd pixel_jones(const PhantomGrid& grid, int x, int y) { return grid.jones(x, y); }

double pixel_delay_shift(const PhantomGrid& grid, int x, int y) { return grid.truth(x, y).delay_shift_mm(); }

}  // namespace hompol

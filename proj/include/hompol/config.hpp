#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hompol/detection.hpp"
#include "hompol/hom.hpp"
#include "hompol/phantom.hpp"
#include "hompol/scan.hpp"

namespace hompol {

struct PhantomSource {
    std::string kind = "generate";  // "generate" or "file"
    std::string file;
    ShardGenerationParams params;

    bool operator==(const PhantomSource&) const = default;
};

struct DipSweepConfig {
    double dz_min_mm = -3.0;
    double dz_max_mm = 3.0;
    int points = 61;
    std::uint64_t trials_per_point = 1000000;
    bool simulate = true;
    std::vector<std::pair<int, int>> pixels;  // empty: one pixel per layer count 0, 1, 2 if present

    std::vector<double> delays() const;
    bool operator==(const DipSweepConfig&) const = default;
};

struct FisherSweepConfig {
    double theta_min = 0.0;
    double theta_max = 1.5707963267948966;
    int points = 37;
    std::uint64_t trials = 100000;
    std::uint32_t repeats = 200;
    double dz_mm = 0.0;

    std::vector<double> angles() const;
    bool operator==(const FisherSweepConfig&) const = default;
};

/// Everything a command needs; with the seed it fully determines the output.
///
/// File format: JSON object with the sections
///   seed, interferometer, loss, phantom, scan, dip_sweep, fisher_sweep, output_dir
/// Every section and key is optional and defaults as below; unknown keys are
/// rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    InterferometerConfigd interferometer{1.0, 0.95, {}};
    LossModeld loss{0.0};
    PhantomSource phantom;
    ScanPlan scan;
    std::string alpha_source = "config";  // "config" or "blank"
    DipSweepConfig dip_sweep;
    FisherSweepConfig fisher_sweep;
    std::string output_dir = "out";

    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace hompol

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hompol/config.hpp"

namespace hompol {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitIo = 4,
};

/// The phantom a config describes: generated from its seed or read from file.
PhantomGrid load_phantom(const RunConfig& config);

/// Writes <out>/phantom.json.
std::filesystem::path cmd_phantom(const RunConfig& config, const std::filesystem::path& out);

/// Writes dip_x<X>_y<Y>.csv (dz_mm, coincidence_probability) per pixel and,
/// when simulating, dip_x<X>_y<Y>_sim.csv plus dip_fits.csv.
std::vector<std::filesystem::path> cmd_dip_sweep(const RunConfig& config, const std::filesystem::path& out,
                                                 unsigned threads);

/// Writes fisher_sweep.csv.
std::filesystem::path cmd_fisher_sweep(const RunConfig& config, const std::filesystem::path& out);

/// Acquires dip and baseline frames, builds the maps, and writes the frame
/// and map CSVs plus manifest.json. Returns the manifest path.
std::filesystem::path cmd_scan(const RunConfig& config, const std::filesystem::path& out, unsigned threads);

/// Plain-text summary of a scan manifest. Throws DomainError when the
/// referenced grids disagree on dimensions.
std::string cmd_report(const std::filesystem::path& manifest);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace hompol

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hompol/phantom.hpp"
#include "hompol/scan.hpp"

namespace hompol {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite.
std::string format_double(double value);

/// Grid CSV layout (UTF-8, LF):
///   # hompol-grid 1
///   # name=<name>
///   # rows=<r> cols=<c>
///   # <key>=<value>            (one line per metadata entry)
///   v,v,...,v                  (r lines, row-major)
void write_grid_csv(const std::filesystem::path& path, const std::string& name, const Grid<double>& values,
                    const Metadata& metadata = {});
void write_grid_csv(const std::filesystem::path& path, const std::string& name, const Grid<std::uint64_t>& values,
                    const Metadata& metadata = {});
void write_grid_csv(const std::filesystem::path& path, const std::string& name, const Grid<std::uint8_t>& values,
                    const Metadata& metadata = {});

struct GridCsv {
    std::string name;
    std::map<std::string, std::string> metadata;
    Grid<double> values;
};

GridCsv read_grid_csv(const std::filesystem::path& path);

/// Writes a table with a header row; every row must match the header width.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

/// Phantom fixture (JSON):
///   { "format": "hompol-phantom", "version": 1,
///     "header":    { width, height, pixel_pitch_um, layer_thickness_um,
///                    layer_index, base_gamma },
///     "shards":    [ { theta, delta, gamma, vertices: [[x, y], ...] }, ... ],
///     "overrides": [ { x, y, theta, delta, gamma, layer_count }, ... ] }
std::string serialize_phantom(const PhantomGrid& grid);
PhantomGrid parse_phantom(const std::string& text);
void write_phantom(const std::filesystem::path& path, const PhantomGrid& grid);
PhantomGrid read_phantom(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hompol

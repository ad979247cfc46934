#include "hompol/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hompol/errors.hpp"

namespace hompol {

using nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw IoError("cannot format number");
    }
    return std::string(buf, end);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

template <typename T, typename Format>
void write_grid(const std::filesystem::path& path, const std::string& name, const Grid<T>& values,
                const Metadata& metadata, Format format) {
    std::string text = "# hompol-grid 1\n# name=" + name + "\n# rows=" + std::to_string(values.rows()) +
                       " cols=" + std::to_string(values.cols()) + "\n";
    for (const auto& [key, value] : metadata) {
        text += "# " + key + "=" + value + "\n";
    }
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c > 0) {
                text += ',';
            }
            text += format(values(r, c));
        }
        text += '\n';
    }
    write_text(path, text);
}

double parse_number(std::string_view token, const std::filesystem::path& path) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\r')) {
        token.remove_prefix(1);
    }
    while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) {
        token.remove_suffix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw IoError("malformed number '" + std::string(token) + "' in " + path.string());
    }
    return value;
}

}  // namespace

void write_grid_csv(const std::filesystem::path& path, const std::string& name, const Grid<double>& values,
                    const Metadata& metadata) {
    write_grid(path, name, values, metadata, format_double);
}

void write_grid_csv(const std::filesystem::path& path, const std::string& name, const Grid<std::uint64_t>& values,
                    const Metadata& metadata) {
    write_grid(path, name, values, metadata, [](std::uint64_t v) { return std::to_string(v); });
}

void write_grid_csv(const std::filesystem::path& path, const std::string& name, const Grid<std::uint8_t>& values,
                    const Metadata& metadata) {
    write_grid(path, name, values, metadata, [](std::uint8_t v) { return std::to_string(static_cast<int>(v)); });
}

GridCsv read_grid_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    GridCsv grid;
    long rows = -1;
    long cols = -1;
    std::vector<std::vector<double>> data;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            std::istringstream fields(line.substr(1));
            std::string field;
            while (fields >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos) {
                    continue;
                }
                const std::string key = field.substr(0, eq);
                const std::string value = field.substr(eq + 1);
                if (key == "name") {
                    grid.name = value;
                } else if (key == "rows") {
                    rows = std::stol(value);
                } else if (key == "cols") {
                    cols = std::stol(value);
                } else {
                    grid.metadata[key] = value;
                }
            }
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            row.push_back(parse_number(rest.substr(0, comma), path));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        data.push_back(std::move(row));
    }
    if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows) {
        throw IoError("grid header does not match the data in " + path.string());
    }
    grid.values.resize(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (static_cast<long>(data[r].size()) != cols) {
            throw IoError("ragged row in " + path.string());
        }
        for (long c = 0; c < cols; ++c) {
            grid.values(r, c) = data[r][c];
        }
    }
    return grid;
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    auto join = [](const std::vector<std::string>& fields) {
        std::string line;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) {
                line += ',';
            }
            line += fields[i];
        }
        return line + '\n';
    };
    std::string text = join(header);
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw IoError("table row width does not match the header");
        }
        text += join(row);
    }
    write_text(path, text);
}

std::string serialize_phantom(const PhantomGrid& grid) {
    json doc;
    doc["format"] = "hompol-phantom";
    doc["version"] = 1;
    doc["header"] = {
        {"width", grid.width()},
        {"height", grid.height()},
        {"pixel_pitch_um", grid.pixel_pitch_um()},
        {"layer_thickness_um", grid.layer().thickness_um},
        {"layer_index", grid.layer().refractive_index},
        {"base_gamma", grid.base_gamma()},
    };
    json shards = json::array();
    for (const auto& s : grid.shards()) {
        json vertices = json::array();
        for (const auto& v : s.vertices) {
            vertices.push_back({v.x(), v.y()});
        }
        shards.push_back({{"theta", s.theta}, {"delta", s.delta}, {"gamma", s.gamma}, {"vertices", vertices}});
    }
    doc["shards"] = shards;
    json overrides = json::array();
    for (const auto& o : grid.overrides()) {
        overrides.push_back({{"x", o.x},
                             {"y", o.y},
                             {"theta", o.theta},
                             {"delta", o.delta},
                             {"gamma", o.gamma},
                             {"layer_count", o.layer_count}});
    }
    doc["overrides"] = overrides;
    return doc.dump(2) + "\n";
}

PhantomGrid parse_phantom(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("phantom file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "hompol-phantom" || doc.at("version").get<int>() != 1) {
            throw IoError("unsupported phantom format");
        }
        const json& h = doc.at("header");
        LayerProperties layer{h.at("layer_thickness_um").get<double>(), h.at("layer_index").get<double>()};
        std::vector<Shard> shards;
        for (const json& js : doc.at("shards")) {
            Shard s;
            s.theta = js.at("theta").get<double>();
            s.delta = js.at("delta").get<double>();
            s.gamma = js.at("gamma").get<double>();
            for (const json& v : js.at("vertices")) {
                s.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            }
            shards.push_back(std::move(s));
        }
        std::vector<PixelOverride> overrides;
        if (doc.contains("overrides")) {
            for (const json& jo : doc.at("overrides")) {
                overrides.push_back({jo.at("x").get<int>(), jo.at("y").get<int>(), jo.at("theta").get<double>(),
                                     jo.at("delta").get<double>(), jo.at("gamma").get<double>(),
                                     jo.at("layer_count").get<int>()});
            }
        }
        return PhantomGrid::from_shards(h.at("width").get<int>(), h.at("height").get<int>(),
                                        h.at("pixel_pitch_um").get<double>(), std::move(shards), layer,
                                        h.at("base_gamma").get<double>(), std::move(overrides));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed phantom file: ") + e.what());
    }
}

void write_phantom(const std::filesystem::path& path, const PhantomGrid& grid) {
    write_text(path, serialize_phantom(grid));
}

PhantomGrid read_phantom(const std::filesystem::path& path) { return parse_phantom(read_text(path)); }

}  // namespace hompol

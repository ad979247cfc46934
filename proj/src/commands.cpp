#include "hompol/commands.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hompol/errors.hpp"
#include "hompol/inference.hpp"
#include "hompol/io.hpp"
#include "hompol/montecarlo.hpp"
#include "hompol/scan.hpp"

namespace hompol {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

std::string pixel_label(int x, int y) { return "x" + std::to_string(x) + "_y" + std::to_string(y); }

// First pixel (row-major) with 0, 1 and 2 layers, when present.
std::vector<std::pair<int, int>> default_dip_pixels(const PhantomGrid& grid) {
    std::vector<std::pair<int, int>> pixels;
    for (int layers = 0; layers <= 2; ++layers) {
        bool found = false;
        for (int y = 0; y < grid.height() && !found; ++y) {
            for (int x = 0; x < grid.width() && !found; ++x) {
                if (grid.truth(x, y).layer_count == layers) {
                    pixels.emplace_back(x, y);
                    found = true;
                }
            }
        }
    }
    return pixels;
}

template <typename T>
Grid<T> crop(const Grid<T>& full, const Region& r) {
    return full.block(r.y, r.x, r.height, r.width);
}

bool near_quarter_period(double theta, double tolerance) {
    const double quarter = std::numbers::pi / 4.0;
    const double k = std::round(theta / quarter);
    return std::abs(theta - k * quarter) < tolerance;
}

constexpr double kDegree = std::numbers::pi / 180.0;

}  // namespace

PhantomGrid load_phantom(const RunConfig& config) {
    if (config.phantom.kind == "file") {
        return read_phantom(config.phantom.file);
    }
    return generate_shards(config.seed, config.phantom.params);
}

fs::path cmd_phantom(const RunConfig& config, const fs::path& out) {
    ensure_directory(out);
    const PhantomGrid grid = load_phantom(config);
    const fs::path path = out / "phantom.json";
    write_phantom(path, grid);
    return path;
}

std::vector<fs::path> cmd_dip_sweep(const RunConfig& config, const fs::path& out, unsigned threads) {
    ensure_directory(out);
    const PhantomGrid grid = load_phantom(config);
    const auto pixels = config.dip_sweep.pixels.empty() ? default_dip_pixels(grid) : config.dip_sweep.pixels;
    const std::vector<double> delays = config.dip_sweep.delays();
    const auto& cfg = config.interferometer;

    std::vector<fs::path> written;
    for (const auto& [x, y] : pixels) {
        if (!grid.in_bounds(x, y)) {
            throw ConfigError("dip_sweep pixel " + pixel_label(x, y) + " lies outside the phantom");
        }
        const double shift = pixel_delay_shift(grid, x, y);
        std::vector<std::vector<std::string>> rows;
        for (double dz : delays) {
            rows.push_back({format_double(dz), format_double(coincidence_mixture(grid.jones(x, y), dz - shift, cfg))});
        }
        const fs::path path = out / ("dip_" + pixel_label(x, y) + ".csv");
        write_table_csv(path, {"dz_mm", "coincidence_probability"}, rows);
        written.push_back(path);
    }
    if (!config.dip_sweep.simulate) {
        return written;
    }

    ScanPlan plan = config.scan;
    plan.trials_per_frame = config.dip_sweep.trials_per_point;
    const auto studies = dip_position_study(grid, pixels, delays, plan, cfg, {config.seed, 0}, threads);
    std::vector<std::vector<std::string>> fits;
    for (const auto& s : studies) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < s.dz_mm.size(); ++k) {
            rows.push_back({format_double(s.dz_mm[k]), std::to_string(s.counts[k].n0), std::to_string(s.counts[k].n1),
                            std::to_string(s.counts[k].n2), format_double(s.coincidence_fraction[k])});
        }
        const fs::path path = out / ("dip_" + pixel_label(s.x, s.y) + "_sim.csv");
        write_table_csv(path, {"dz_mm", "n0", "n1", "n2", "coincidence_fraction"}, rows);
        written.push_back(path);
        fits.push_back({std::to_string(s.x), std::to_string(s.y), std::to_string(s.layer_count),
                        format_double(s.expected_shift_mm), format_double(s.fit.dz0), format_double(s.fit.dz0_stderr),
                        format_double(s.fit.c0), format_double(s.fit.c1), s.fit.converged ? "1" : "0",
                        s.fit.flat ? "1" : "0"});
    }
    const fs::path fit_path = out / "dip_fits.csv";
    write_table_csv(fit_path,
                    {"x", "y", "layer_count", "expected_shift_mm", "fitted_dz0_mm", "fitted_dz0_stderr_mm", "c0", "c1",
                     "converged", "flat"},
                    fits);
    written.push_back(fit_path);
    return written;
}

fs::path cmd_fisher_sweep(const RunConfig& config, const fs::path& out) {
    ensure_directory(out);
    const auto& fsw = config.fisher_sweep;
    const auto& cfg = config.interferometer;
    const LossModeld lossless{0.0};
    const TrialPlan plan{fsw.trials, config.scan.accidental_rate};

    std::vector<std::vector<std::string>> rows;
    const auto angles = fsw.angles();
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double theta = angles[i];
        const double fisher = fisher_information(theta, config.loss, cfg, fsw.dz_mm).value;
        const double fisher0 = fisher_information(theta, lossless, cfg, fsw.dz_mm).value;
        const double crb = fisher > 0.0 && std::isfinite(fisher) ? crb_variance(fsw.trials, fisher)
                                                                  : std::numeric_limits<double>::infinity();
        auto estimates = repeat_experiment(theta, config.loss, cfg, fsw.dz_mm, plan, fsw.repeats,
                                           {config.seed, stream_index(StreamPurpose::Repetition,
                                                                      static_cast<std::uint32_t>(i), 0)});
        // The applied angle is known, so the two-fold ambiguity can be undone.
        for (auto& e : estimates) {
            e.theta_hat = resolve_branch(e.theta_hat, theta);
        }
        const EstimateSummary s = summarize(estimates);
        const double inverse = s.variance > 0.0 ? 1.0 / (static_cast<double>(fsw.trials) * s.variance)
                                                : std::numeric_limits<double>::infinity();
        rows.push_back({format_double(theta), format_double(fisher), format_double(fisher0), format_double(crb),
                        format_double(s.mean), format_double(s.variance), format_double(inverse),
                        format_double(static_cast<double>(s.flagged) / static_cast<double>(estimates.size()))});
    }
    const fs::path path = out / "fisher_sweep.csv";
    write_table_csv(path,
                    {"theta_rad", "fisher", "fisher_lossless", "crb_variance", "mc_mean_theta", "mc_variance",
                     "mc_inverse_variance_per_trial", "mc_flagged_fraction"},
                    rows);
    return path;
}

fs::path cmd_scan(const RunConfig& config, const fs::path& out, unsigned threads) {
    ensure_directory(out);
    const PhantomGrid grid = load_phantom(config);
    const auto& cfg = config.interferometer;
    const ScanPlan& plan = config.scan;
    plan.validate(cfg);
    const Region region = plan.region.resolved(grid);

    const ScanFrame dip = acquire_frame(grid, plan.dip_dz_mm, plan, cfg,
                                        {config.seed, stream_index(StreamPurpose::DipFrame, 0, 0)}, threads);
    const ScanFrame baseline = acquire_frame(grid, plan.baseline_dz_mm, plan, cfg,
                                             {config.seed, stream_index(StreamPurpose::BaselineFrame, 0, 0)}, threads);

    double alpha = cfg.max_visibility * overlap_probability(plan.dip_dz_mm, cfg.coherence_length_mm);
    std::string alpha_source = "config";
    double alpha_raw = alpha;
    if (config.alpha_source == "blank") {
        if (const auto cal = calibrate_alpha(grid, dip, baseline)) {
            alpha = cal->alpha_hat;
            alpha_raw = cal->raw_alpha;
            alpha_source = "blank";
        } else {
            alpha_source = "config_no_blank_pixels";
        }
    }
    const EstimateMap maps = build_maps(dip, baseline, alpha);

    const std::string seed = std::to_string(config.seed);
    auto meta = [&](const std::string& kind, Metadata extra = {}) {
        Metadata m{{"kind", kind}, {"seed", seed}, {"x0", std::to_string(region.x)}, {"y0", std::to_string(region.y)}};
        m.insert(m.end(), extra.begin(), extra.end());
        return m;
    };

    write_phantom(out / "phantom.json", grid);
    write_text(out / "config.json", serialize_config(config));

    json frames;
    for (const auto* frame : {&dip, &baseline}) {
        const std::string name = frame == &dip ? "dip" : "baseline";
        const Metadata extra{{"dz_mm", format_double(frame->dz_mm)},
                             {"trials", std::to_string(plan.trials_per_frame)}};
        json files;
        for (const auto& [suffix, grid_counts] :
             {std::pair{"n0", &frame->n0}, std::pair{"n1", &frame->n1}, std::pair{"n2", &frame->n2}}) {
            const std::string file = name + "_" + suffix + ".csv";
            write_grid_csv(out / file, name + "_" + suffix, *grid_counts, meta("frame", extra));
            files[suffix] = file;
        }
        frames[name] = {{"dz_mm", frame->dz_mm}, {"trials", plan.trials_per_frame}, {"files", files}};
    }

    const Metadata alpha_meta{{"alpha", format_double(alpha)}};
    json map_files;
    auto write_map = [&](const std::string& name, const auto& values) {
        write_grid_csv(out / (name + ".csv"), name, values, meta("map", alpha_meta));
        map_files[name] = name + ".csv";
    };
    write_map("gamma", maps.gamma);
    write_map("visibility", maps.visibility);
    write_map("theta", maps.theta);
    write_map("mirror_theta", maps.mirror_theta);
    write_map("crb", maps.crb);
    write_map("flags", maps.flags);
    write_map("gamma_clamped", maps.gamma_clamped);

    write_grid_csv(out / "classical.csv", "classical", crop(classical_reference(grid), region), meta("reference"));
    write_grid_csv(out / "truth_theta.csv", "truth_theta", crop<double>(grid.effective_theta_map(), region),
                   meta("truth"));
    write_grid_csv(out / "truth_gamma.csv", "truth_gamma", crop<double>(grid.gamma_map(), region), meta("truth"));

    json manifest;
    manifest["format"] = "hompol-scan-manifest";
    manifest["version"] = 1;
    manifest["seed"] = config.seed;
    manifest["config"] = json::parse(serialize_config(config));
    manifest["phantom"] = "phantom.json";
    manifest["region"] = {{"x", region.x}, {"y", region.y}, {"width", region.width}, {"height", region.height}};
    manifest["dimensions"] = {{"rows", region.height}, {"cols", region.width}};
    manifest["calibration"] = {{"alpha", alpha}, {"alpha_raw", alpha_raw}, {"alpha_source", alpha_source}};
    manifest["frames"] = frames;
    manifest["maps"] = map_files;
    manifest["reference"] = {{"classical", "classical.csv"}};
    manifest["truth"] = {{"theta", "truth_theta.csv"}, {"gamma", "truth_gamma.csv"}};
    const fs::path manifest_path = out / "manifest.json";
    write_text(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

std::string cmd_report(const fs::path& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_text(manifest_path));
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest is not valid JSON: ") + e.what());
    }
    const fs::path dir = manifest_path.parent_path();
    long rows = 0;
    long cols = 0;
    double alpha = 0.0;
    std::string alpha_source;
    std::map<std::string, GridCsv> grids;
    try {
        if (manifest.at("format").get<std::string>() != "hompol-scan-manifest") {
            throw IoError("not a scan manifest: " + manifest_path.string());
        }
        rows = manifest.at("dimensions").at("rows").get<long>();
        cols = manifest.at("dimensions").at("cols").get<long>();
        alpha = manifest.at("calibration").at("alpha").get<double>();
        alpha_source = manifest.at("calibration").at("alpha_source").get<std::string>();
        auto load = [&](const std::string& key, const json& file) {
            GridCsv g = read_grid_csv(dir / file.get<std::string>());
            if (g.values.rows() != rows || g.values.cols() != cols) {
                throw DomainError("grid " + key + " is " + std::to_string(g.values.rows()) + "x" +
                                  std::to_string(g.values.cols()) + ", manifest declares " + std::to_string(rows) +
                                  "x" + std::to_string(cols));
            }
            grids[key] = std::move(g);
        };
        for (const auto& [name, frame] : manifest.at("frames").items()) {
            for (const auto& [suffix, file] : frame.at("files").items()) {
                load(name + "_" + suffix, file);
            }
        }
        for (const auto& [name, file] : manifest.at("maps").items()) {
            load(name, file);
        }
        if (manifest.contains("reference")) {
            for (const auto& [name, file] : manifest.at("reference").items()) {
                load(name, file);
            }
        }
        if (manifest.contains("truth")) {
            for (const auto& [name, file] : manifest.at("truth").items()) {
                load("truth_" + name, file);
            }
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
    for (const char* required : {"theta", "flags", "gamma"}) {
        if (!grids.contains(required)) {
            throw IoError(std::string("manifest lacks the ") + required + " map");
        }
    }

    const auto& theta = grids["theta"].values;
    const auto& flags = grids["flags"].values;
    const auto& gamma = grids["gamma"].values;

    std::ostringstream report;
    report << "scan report\n";
    report << "  pixels: " << rows << " x " << cols << " (" << rows * cols << ")\n";
    report << "  seed: " << manifest.value("seed", std::uint64_t{0}) << "\n";
    report << "  alpha: " << format_double(alpha) << " (" << alpha_source << ")\n";
    report << "pixels by flag\n";
    for (auto flag : {EstimateFlag::Ok, EstimateFlag::ClampedLowV, EstimateFlag::ClampedHighV,
                      EstimateFlag::DegenerateFisher, EstimateFlag::Invalid}) {
        const auto n = (flags == static_cast<double>(flag)).count();
        report << "  " << to_string(flag) << ": " << n << "\n";
    }
    const auto ok = (flags == static_cast<double>(EstimateFlag::Ok));
    if (ok.count() > 0) {
        const double g_mean = ok.select(gamma, 0.0).sum() / static_cast<double>(ok.count());
        report << "  gamma over ok pixels: mean " << format_double(g_mean) << "\n";
    }

    if (grids.contains("truth_theta")) {
        const auto& truth = grids["truth_theta"].values;
        double sq = 0.0;
        long n = 0;
        for (long r = 0; r < rows; ++r) {
            for (long c = 0; c < cols; ++c) {
                if (!ok(r, c) || near_quarter_period(truth(r, c), 3.0 * kDegree)) {
                    continue;
                }
                sq += (theta(r, c) - truth(r, c)) * (theta(r, c) - truth(r, c));
                ++n;
            }
        }
        if (n > 0) {
            report << "theta rmse vs truth: " << format_double(std::sqrt(sq / n) / kDegree) << " deg over " << n
                   << " pixels (ok flag, >= 3 deg from k*pi/4)\n";
        }
    }
    if (grids.contains("classical")) {
        const auto& classical = grids["classical"].values;
        double sq = 0.0;
        long n = 0;
        for (long r = 0; r < rows; ++r) {
            for (long c = 0; c < cols; ++c) {
                if (!ok(r, c)) {
                    continue;
                }
                const double q = std::pow(std::cos(2.0 * theta(r, c)), 2);
                sq += (q - classical(r, c)) * (q - classical(r, c));
                ++n;
            }
        }
        if (n > 0) {
            report << "quantum vs classical cos^2(2 theta) rms: " << format_double(std::sqrt(sq / n)) << " over " << n
                   << " pixels\n";
        }
    }
    return report.str();
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Hong-Ou-Mandel polarization microscopy simulator and estimator", "hompol"};
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::string out;
        std::string manifest;
        std::uint64_t seed = 0;
        unsigned threads = 1;
    } opt;

    auto add_common = [&opt](CLI::App* sub, bool threads) {
        sub->add_option("--config", opt.config, "Run configuration (JSON)")->required();
        sub->add_option("--seed", opt.seed, "Override the configuration seed");
        sub->add_option("--out", opt.out, "Output directory (default: output_dir from the configuration)");
        if (threads) {
            sub->add_option("--threads", opt.threads, "Worker threads, 0 = one per core")->capture_default_str();
        }
    };
    CLI::App* phantom = app.add_subcommand("phantom", "Write the phantom fixture");
    add_common(phantom, false);
    CLI::App* dip = app.add_subcommand("dip-sweep", "Dip curves at selected pixels");
    add_common(dip, true);
    CLI::App* fisher = app.add_subcommand("fisher-sweep", "Fisher information, CRB and Monte Carlo variance");
    add_common(fisher, false);
    CLI::App* scan = app.add_subcommand("scan", "Raster scan: frames, maps and manifest");
    add_common(scan, true);
    CLI::App* report = app.add_subcommand("report", "Summarize a scan manifest");
    report->add_option("--manifest", opt.manifest, "Scan manifest (default: <out>/manifest.json)");
    report->add_option("--out", opt.out, "Scan output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (report->parsed()) {
            fs::path manifest = opt.manifest;
            if (manifest.empty()) {
                if (opt.out.empty()) {
                    throw ConfigError("report needs --manifest or --out");
                }
                manifest = fs::path(opt.out) / "manifest.json";
            }
            const std::string text = cmd_report(manifest);
            write_text(manifest.parent_path() / "report.txt", text);
            std::cout << text;
            return kExitOk;
        }

        RunConfig config = load_config(opt.config);
        if (phantom->count("--seed") + dip->count("--seed") + fisher->count("--seed") + scan->count("--seed") > 0) {
            config.seed = opt.seed;
        }
        const fs::path out = opt.out.empty() ? fs::path(config.output_dir) : fs::path(opt.out);

        if (phantom->parsed()) {
            std::cout << "wrote " << cmd_phantom(config, out).string() << "\n";
        } else if (dip->parsed()) {
            for (const auto& p : cmd_dip_sweep(config, out, opt.threads)) {
                std::cout << "wrote " << p.string() << "\n";
            }
        } else if (fisher->parsed()) {
            std::cout << "wrote " << cmd_fisher_sweep(config, out).string() << "\n";
        } else if (scan->parsed()) {
            std::cout << "wrote " << cmd_scan(config, out, opt.threads).string() << "\n";
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const DomainError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const InsufficientCounts& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DegenerateBound& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace hompol

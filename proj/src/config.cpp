#include "hompol/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "hompol/errors.hpp"
#include "hompol/io.hpp"

namespace hompol {

using nlohmann::json;

std::vector<double> DipSweepConfig::delays() const {
    std::vector<double> dz(points);
    for (int i = 0; i < points; ++i) {
        dz[i] = points == 1 ? dz_min_mm : dz_min_mm + (dz_max_mm - dz_min_mm) * i / (points - 1);
    }
    return dz;
}

std::vector<double> FisherSweepConfig::angles() const {
    std::vector<double> theta(points);
    for (int i = 0; i < points; ++i) {
        theta[i] = points == 1 ? theta_min : theta_min + (theta_max - theta_min) * i / (points - 1);
    }
    return theta;
}

void RunConfig::validate() const {
    try {
        interferometer.validate();
        loss.validate();
        if (phantom.kind == "generate") {
            phantom.params.validate();
        } else if (phantom.kind != "file") {
            throw ConfigError("phantom.source must be \"generate\" or \"file\"");
        } else if (phantom.file.empty()) {
            throw ConfigError("phantom.file is required when phantom.source is \"file\"");
        }
        scan.validate(interferometer);
        if (dip_sweep.points < 4 || !(dip_sweep.dz_max_mm > dip_sweep.dz_min_mm) || dip_sweep.trials_per_point < 1) {
            throw ConfigError("dip_sweep needs points >= 4, dz_max > dz_min and trials_per_point >= 1");
        }
        if (fisher_sweep.points < 1 || fisher_sweep.trials < 1 || fisher_sweep.repeats < 1 ||
            !(fisher_sweep.theta_max >= fisher_sweep.theta_min)) {
            throw ConfigError("fisher_sweep needs points, trials and repeats >= 1 and theta_max >= theta_min");
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (alpha_source != "config" && alpha_source != "blank") {
        throw ConfigError("scan.alpha_source must be \"config\" or \"blank\"");
    }
}

namespace {

// Reads keys of one JSON section, rejecting anything not consumed.
class Section {
public:
    Section(const json& parent, const std::string& name, std::string path)
        : path_(std::move(path)) {
        if (!parent.contains(name)) {
            return;
        }
        node_ = &parent.at(name);
        if (!node_->is_object()) {
            throw ConfigError(path_ + " must be an object");
        }
    }

    Section(const json& root, std::string path) : node_(&root), path_(std::move(path)) {
        if (!root.is_object()) {
            throw ConfigError("configuration must be a JSON object");
        }
    }

    template <typename T>
    void read(const std::string& key, T& target) {
        seen_.insert(key);
        if (node_ == nullptr || !node_->contains(key)) {
            return;
        }
        try {
            target = node_->at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + key + " has the wrong type");
        }
    }

    const json* child(const std::string& key) {
        seen_.insert(key);
        if (node_ == nullptr || !node_->contains(key)) {
            return nullptr;
        }
        return &node_->at(key);
    }

    const json& node() const { return *node_; }
    bool present() const { return node_ != nullptr; }

    void finish() const {
        if (node_ == nullptr) {
            return;
        }
        for (const auto& [key, _] : node_->items()) {
            if (!seen_.contains(key)) {
                throw ConfigError("unknown configuration key " + path_ + key);
            }
        }
    }

private:
    const json* node_ = nullptr;
    std::string path_;
    std::set<std::string> seen_;
};

std::complex<double> read_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(where + " must be [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Section root(doc, "");
    root.read("seed", cfg.seed);
    root.read("output_dir", cfg.output_dir);

    Section interf(doc, "interferometer", "interferometer.");
    interf.read("coherence_length_mm", cfg.interferometer.coherence_length_mm);
    interf.read("max_visibility", cfg.interferometer.max_visibility);
    if (const json* bs = interf.child("splitter")) {
        Section splitter(*bs, "interferometer.splitter.");
        if (const json* t = splitter.child("t")) {
            cfg.interferometer.splitter.t = read_complex(*t, "interferometer.splitter.t");
        }
        if (const json* r = splitter.child("r")) {
            cfg.interferometer.splitter.r = read_complex(*r, "interferometer.splitter.r");
        }
        splitter.finish();
    }
    interf.finish();
    root.child("interferometer");

    Section loss(doc, "loss", "loss.");
    loss.read("gamma", cfg.loss.gamma);
    loss.finish();
    root.child("loss");

    Section ph(doc, "phantom", "phantom.");
    ph.read("source", cfg.phantom.kind);
    ph.read("file", cfg.phantom.file);
    auto& p = cfg.phantom.params;
    ph.read("width", p.width);
    ph.read("height", p.height);
    ph.read("pixel_pitch_um", p.pixel_pitch_um);
    ph.read("n_shards", p.n_shards);
    ph.read("min_radius_px", p.min_radius_px);
    ph.read("max_radius_px", p.max_radius_px);
    ph.read("min_vertices", p.min_vertices);
    ph.read("max_vertices", p.max_vertices);
    ph.read("retardance", p.retardance);
    ph.read("shard_gamma_min", p.shard_gamma_min);
    ph.read("shard_gamma_max", p.shard_gamma_max);
    ph.read("base_gamma", p.base_gamma);
    ph.read("layer_thickness_um", p.layer.thickness_um);
    ph.read("layer_index", p.layer.refractive_index);
    ph.finish();
    root.child("phantom");

    Section sc(doc, "scan", "scan.");
    sc.read("dip_dz_mm", cfg.scan.dip_dz_mm);
    sc.read("baseline_dz_mm", cfg.scan.baseline_dz_mm);
    sc.read("trials_per_frame", cfg.scan.trials_per_frame);
    sc.read("accidental_rate", cfg.scan.accidental_rate);
    sc.read("alpha_source", cfg.alpha_source);
    if (const json* region = sc.child("region")) {
        Section reg(*region, "scan.region.");
        reg.read("x", cfg.scan.region.x);
        reg.read("y", cfg.scan.region.y);
        reg.read("width", cfg.scan.region.width);
        reg.read("height", cfg.scan.region.height);
        reg.finish();
    }
    sc.finish();
    root.child("scan");

    Section ds(doc, "dip_sweep", "dip_sweep.");
    ds.read("dz_min_mm", cfg.dip_sweep.dz_min_mm);
    ds.read("dz_max_mm", cfg.dip_sweep.dz_max_mm);
    ds.read("points", cfg.dip_sweep.points);
    ds.read("trials_per_point", cfg.dip_sweep.trials_per_point);
    ds.read("simulate", cfg.dip_sweep.simulate);
    ds.read("pixels", cfg.dip_sweep.pixels);
    ds.finish();
    root.child("dip_sweep");

    Section fs(doc, "fisher_sweep", "fisher_sweep.");
    fs.read("theta_min", cfg.fisher_sweep.theta_min);
    fs.read("theta_max", cfg.fisher_sweep.theta_max);
    fs.read("points", cfg.fisher_sweep.points);
    fs.read("trials", cfg.fisher_sweep.trials);
    fs.read("repeats", cfg.fisher_sweep.repeats);
    fs.read("dz_mm", cfg.fisher_sweep.dz_mm);
    fs.finish();
    root.child("fisher_sweep");

    root.finish();
    cfg.validate();
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    const auto& p = cfg.phantom.params;
    json doc;
    doc["seed"] = cfg.seed;
    doc["output_dir"] = cfg.output_dir;
    doc["interferometer"] = {
        {"coherence_length_mm", cfg.interferometer.coherence_length_mm},
        {"max_visibility", cfg.interferometer.max_visibility},
        {"splitter", {{"t", complex_json(cfg.interferometer.splitter.t)},
                      {"r", complex_json(cfg.interferometer.splitter.r)}}},
    };
    doc["loss"] = {{"gamma", cfg.loss.gamma}};
    doc["phantom"] = {
        {"source", cfg.phantom.kind},
        {"file", cfg.phantom.file},
        {"width", p.width},
        {"height", p.height},
        {"pixel_pitch_um", p.pixel_pitch_um},
        {"n_shards", p.n_shards},
        {"min_radius_px", p.min_radius_px},
        {"max_radius_px", p.max_radius_px},
        {"min_vertices", p.min_vertices},
        {"max_vertices", p.max_vertices},
        {"retardance", p.retardance},
        {"shard_gamma_min", p.shard_gamma_min},
        {"shard_gamma_max", p.shard_gamma_max},
        {"base_gamma", p.base_gamma},
        {"layer_thickness_um", p.layer.thickness_um},
        {"layer_index", p.layer.refractive_index},
    };
    doc["scan"] = {
        {"dip_dz_mm", cfg.scan.dip_dz_mm},
        {"baseline_dz_mm", cfg.scan.baseline_dz_mm},
        {"trials_per_frame", cfg.scan.trials_per_frame},
        {"accidental_rate", cfg.scan.accidental_rate},
        {"alpha_source", cfg.alpha_source},
        {"region", {{"x", cfg.scan.region.x},
                    {"y", cfg.scan.region.y},
                    {"width", cfg.scan.region.width},
                    {"height", cfg.scan.region.height}}},
    };
    doc["dip_sweep"] = {
        {"dz_min_mm", cfg.dip_sweep.dz_min_mm},
        {"dz_max_mm", cfg.dip_sweep.dz_max_mm},
        {"points", cfg.dip_sweep.points},
        {"trials_per_point", cfg.dip_sweep.trials_per_point},
        {"simulate", cfg.dip_sweep.simulate},
        {"pixels", cfg.dip_sweep.pixels},
    };
    doc["fisher_sweep"] = {
        {"theta_min", cfg.fisher_sweep.theta_min},
        {"theta_max", cfg.fisher_sweep.theta_max},
        {"points", cfg.fisher_sweep.points},
        {"trials", cfg.fisher_sweep.trials},
        {"repeats", cfg.fisher_sweep.repeats},
        {"dz_mm", cfg.fisher_sweep.dz_mm},
    };
    return doc.dump(2) + "\n";
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

}  // namespace hompol

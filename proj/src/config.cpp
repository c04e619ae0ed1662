#include "eos/config.hpp"

#include <toml.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <stdexcept>

namespace eos {

namespace {

double number(const toml::node& n, const std::string& key) {
    if (auto v = n.value<double>())
        return *v;
    throw std::invalid_argument("config key " + key + " must be a number");
}

void collect(const toml::table& t, const std::string& prefix, std::vector<std::pair<std::string, const toml::node*>>& out) {
    for (const auto& [k, v] : t) {
        const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
        if (const auto* sub = v.as_table())
            collect(*sub, key, out);
        else
            out.emplace_back(key, &v);
    }
}

} // namespace

ParameterSet parse_config(const std::string& text, const ParameterSet& base, const std::string& origin) {
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        throw std::invalid_argument("cannot parse " + origin + ": " + std::string(e.description()));
    }
    std::vector<std::pair<std::string, const toml::node*>> entries;
    collect(root, "", entries);

    ParameterSet p = base;
    double center = base.probe.center_thz();
    double bandwidth = base.probe.bandwidth_thz();
    double photons = base.probe.photons();
    bool probe_changed = false;
    const auto dir = std::filesystem::path(origin).parent_path();

    for (const auto& [key, node] : entries) {
        if (key == "probe.center_thz") {
            center = number(*node, key);
            probe_changed = true;
        } else if (key == "probe.bandwidth_thz") {
            bandwidth = number(*node, key);
            probe_changed = true;
        } else if (key == "probe.photons") {
            photons = number(*node, key);
        } else if (key == "crystal.length_um") {
            p.crystal.length_um = number(*node, key);
        } else if (key == "crystal.r41_pm_per_v") {
            p.crystal.r41_pm_per_v = number(*node, key);
        } else if (key == "crystal.n") {
            p.crystal.n = number(*node, key);
        } else if (key == "crystal.n_g") {
            p.crystal.n_g = number(*node, key);
        } else if (key == "crystal.w0_um") {
            p.crystal.w0_um = number(*node, key);
        } else if (key == "crystal.dispersion") {
            auto s = node->value<std::string>();
            if (!s)
                throw std::invalid_argument("config key crystal.dispersion must be a string");
            if (*s == "set1")
                p.crystal.dispersion = DispersionModel::set1();
            else if (*s == "set2")
                p.crystal.dispersion = DispersionModel::set2();
            else {
                std::filesystem::path f(*s);
                if (f.is_relative() && !dir.empty())
                    f = dir / f;
                p.crystal.dispersion = DispersionModel::from_file(f.string());
            }
        } else if (key == "crystal.absorption") {
            auto b = node->value<bool>();
            if (!b)
                throw std::invalid_argument("config key crystal.absorption must be true or false");
            p.crystal.absorption_enabled = *b;
        } else if (key == "crystal.mir_window_thz") {
            const auto* arr = node->as_array();
            if (!arr || arr->size() != 2)
                throw std::invalid_argument("config key crystal.mir_window_thz must be [lo, hi]");
            p.crystal.nu_min_thz = number(*arr->get(0), key);
            p.crystal.nu_max_thz = number(*arr->get(1), key);
        } else {
            throw std::invalid_argument("unknown config key " + key + " in " + origin);
        }
    }

    if (probe_changed) {
        if (base.probe.shape() != ProbeSpectrum::Shape::Rectangular)
            throw std::invalid_argument("probe.center_thz / probe.bandwidth_thz apply to the flat spectrum only");
        p.probe = ProbeSpectrum::rectangular(center, bandwidth, photons);
    } else {
        p.probe = p.probe.with_photons(photons);
    }
    p.label = ParameterSet::Label::Custom;
    p.validate();
    return p;
}

ParameterSet load_config(const std::string& path, const ParameterSet& base) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), base, path);
}

} // namespace eos

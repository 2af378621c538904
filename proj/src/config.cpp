#include "reverb/config.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "reverb/kv.hpp"
#include "reverb/raster.hpp"

namespace reverb {

namespace {

int parse_int(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(value, &pos);
    } catch (const std::exception&) {
        throw FormatError("config: bad integer for " + key + ": '" + value + "'");
    }
    if (pos != value.size()) throw FormatError("config: bad integer for " + key + ": '" + value + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw FormatError("config: bad number for " + key + ": '" + value + "'");
    }
    if (pos != value.size()) throw FormatError("config: bad number for " + key + ": '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw FormatError("config: bad boolean for " + key + ": '" + value + "'");
}

} // namespace

void validate(const PipelineConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (cfg.ht < 1) fail("ht must be >= 1");
    if (cfg.vt < 1) fail("vt must be >= 1");
    if (cfg.t_fp < 1) fail("t_fp must be >= 1");
    if (cfg.vw < 1) fail("vw must be >= 1");
    if (cfg.hw < 1) fail("hw must be >= 1");
    if (!(cfg.alpha > 0.0)) fail("alpha must be > 0");
    if (!(cfg.beta > 0.0)) fail("beta must be > 0");
    if (!(cfg.k_weight > 0.0 && cfg.k_weight < 1.0)) fail("k_weight must be in (0,1)");
    if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) fail("gamma must be in [0,1)");
    if (!(cfg.epsilon > 0.0)) fail("epsilon must be > 0");
    if (!(cfg.artifact_pos_thresh >= 0.0)) fail("artifact_pos_thresh must be >= 0");
    if (!(cfg.needle_pos_thresh >= 0.0)) fail("needle_pos_thresh must be >= 0");
    if (!(cfg.compound_t >= 0.0)) fail("compound_t must be >= 0");
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "ht") cfg.ht = parse_int(key, value);
    else if (key == "vt") cfg.vt = parse_int(key, value);
    else if (key == "t_fp") cfg.t_fp = parse_int(key, value);
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "beta") cfg.beta = parse_double(key, value);
    else if (key == "vw") cfg.vw = parse_int(key, value);
    else if (key == "hw") cfg.hw = parse_int(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "k_weight") cfg.k_weight = parse_double(key, value);
    else if (key == "artifact_pos_thresh") cfg.artifact_pos_thresh = parse_double(key, value);
    else if (key == "needle_pos_thresh") cfg.needle_pos_thresh = parse_double(key, value);
    else if (key == "compound_t") cfg.compound_t = parse_double(key, value);
    else if (key == "literal_global_needle_rule") cfg.literal_global_needle_rule = parse_bool(key, value);
    else if (key == "scaled_std_transform") cfg.scaled_std_transform = parse_bool(key, value);
    else throw FormatError("config: unknown key '" + key + "'");
}

PipelineConfig read_config(const std::string& path) {
    PipelineConfig cfg;
    for (const auto& [key, value] : read_kv_file(path)) apply_config_entry(cfg, key, value);
    validate(cfg);
    return cfg;
}

void write_config(const PipelineConfig& cfg, const std::string& path) {
    std::ostringstream fmt;
    fmt.precision(17);
    auto num = [&fmt](double v) {
        fmt.str("");
        fmt << v;
        return fmt.str();
    };
    KvEntries entries = {
        {"ht", std::to_string(cfg.ht)},
        {"vt", std::to_string(cfg.vt)},
        {"t_fp", std::to_string(cfg.t_fp)},
        {"alpha", num(cfg.alpha)},
        {"beta", num(cfg.beta)},
        {"vw", std::to_string(cfg.vw)},
        {"hw", std::to_string(cfg.hw)},
        {"epsilon", num(cfg.epsilon)},
        {"gamma", num(cfg.gamma)},
        {"k_weight", num(cfg.k_weight)},
        {"artifact_pos_thresh", num(cfg.artifact_pos_thresh)},
        {"needle_pos_thresh", num(cfg.needle_pos_thresh)},
        {"compound_t", num(cfg.compound_t)},
        {"literal_global_needle_rule", cfg.literal_global_needle_rule ? "1" : "0"},
        {"scaled_std_transform", cfg.scaled_std_transform ? "1" : "0"},
    };
    write_kv_file(entries, path);
}

} // namespace reverb

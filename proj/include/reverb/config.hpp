#pragma once
// Pipeline hyperparameters and their key-value config file form.

#include <string>

namespace reverb {

struct PipelineConfig {
    int ht = 7;      // horizontal flood-fill semi-axis (columns)
    int vt = 11;     // vertical flood-fill semi-axis (rows)
    int t_fp = 10;   // max needle-to-cluster distance for a true positive
    double alpha = 0.8;   // exponential decay rate
    double beta = 8.0;    // suppression sigmoid steepness
    int vw = 2;      // suppression window half-height (rows)
    int hw = 1;      // suppression window half-width (columns)
    double epsilon = 1e-6;
    double gamma = 0.05;     // loss activity threshold
    double k_weight = 0.5;   // loss down-weight inside label std
    double artifact_pos_thresh = 0.05;
    double needle_pos_thresh = 0.5;
    double compound_t = 0.1;
    // Keep a cluster only if some pixel lies below every needle pixel in the
    // image (instead of the per-instance rule). Off by default.
    bool literal_global_needle_rule = false;
    // Std-map transform variant that rescales the hard std map instead of
    // producing the ratio directly. Off by default.
    bool scaled_std_transform = false;
};

// Throws std::invalid_argument when a field is out of range.
void validate(const PipelineConfig& cfg);

// Key-value text, one "name value" pair per line, '#' comments.
PipelineConfig read_config(const std::string& path);
void write_config(const PipelineConfig& cfg, const std::string& path);

// Applies one key to cfg; throws FormatError on unknown key or bad value.
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

} // namespace reverb

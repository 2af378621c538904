#pragma once
// Evaluation metrics over region-annotated test images.
//
// Region classes mirror the annotation scheme: permissive "possible"
// areas for needles and artifacts, confident first/second reverberation
// patches, the non-artifact gap between reverberations, a confident
// needle patch, and identifiable fuzzy artifacts.

#include <optional>
#include <string>
#include <vector>

#include "reverb/config.hpp"
#include "reverb/raster.hpp"

namespace reverb {

struct RegionLabels {
    Mask possible_needle;
    Mask possible_artifact;
    Mask first_reverb;
    Mask second_reverb;
    Mask non_artifact_gap;
    Mask needle_confident;
    Mask fuzzy_artifact;
};

// Throws std::invalid_argument when shapes differ or the containment
// rules are violated (confident regions must lie inside the possible
// ones; the gap region may not touch the first/second reverb patches).
void validate_labels(const RegionLabels& labels);

struct MetricsReport {
    std::optional<double> far;  // positive-artifact rate in first reverb patch
    std::optional<double> sar;  // same for second reverb patch
    std::optional<double> nr;   // positive-needle rate in confident needle patch
    std::optional<double> faa;  // mean value over positives in first patch
    std::optional<double> saa;  // mean value over positives in second patch
    std::optional<double> afpr; // artifact positives outside the possible region / its size
    std::optional<double> nfpr; // needle analogue
    std::optional<double> afpa; // mean value of artifact false positives
    std::optional<double> nfpa; // needle analogue
    std::optional<double> naa;  // mean artifact value over the gap region (all pixels)
    std::optional<double> ifaa; // mean value over positives in the fuzzy patch
};

// Positive means artifact_soft > artifact_pos_thresh resp.
// needle_soft > needle_pos_thresh. Empty denominators leave the metric
// absent rather than producing NaN.
MetricsReport compute_metrics(const Raster& artifact_soft, const Raster& needle_soft,
                              const RegionLabels& labels, const PipelineConfig& cfg);

// Per-metric mean over the reports where the metric is present.
MetricsReport aggregate_reports(const std::vector<MetricsReport>& reports);

// Stable (name, value) view in table order; absent metrics are skipped.
std::vector<std::pair<std::string, double>> report_entries(const MetricsReport& report);

std::string format_report(const MetricsReport& report);           // key-value lines
std::string format_report_table(const MetricsReport& report);     // aligned table
MetricsReport parse_report(const std::string& text, const std::string& context);

void write_report(const MetricsReport& report, const std::string& path);
MetricsReport read_report(const std::string& path);

// Directory layout: a manifest listing class -> mask filename, one PGM
// mask per class, all seven classes required.
RegionLabels read_labels_dir(const std::string& dir);
void write_labels_dir(const RegionLabels& labels, const std::string& dir);

} // namespace reverb

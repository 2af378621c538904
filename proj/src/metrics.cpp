#include "reverb/metrics.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reverb/kv.hpp"
#include "reverb/raster_io.hpp"

namespace reverb {

namespace {

namespace fs = std::filesystem;

struct RegionField {
    const char* name;
    Mask RegionLabels::* member;
};

constexpr std::array<RegionField, 7> kRegionFields{{
    {"possible_needle", &RegionLabels::possible_needle},
    {"possible_artifact", &RegionLabels::possible_artifact},
    {"first_reverb", &RegionLabels::first_reverb},
    {"second_reverb", &RegionLabels::second_reverb},
    {"non_artifact_gap", &RegionLabels::non_artifact_gap},
    {"needle_confident", &RegionLabels::needle_confident},
    {"fuzzy_artifact", &RegionLabels::fuzzy_artifact},
}};

struct MetricField {
    const char* name;
    std::optional<double> MetricsReport::* member;
};

constexpr std::array<MetricField, 11> kMetricFields{{
    {"FAR", &MetricsReport::far},
    {"SAR", &MetricsReport::sar},
    {"NR", &MetricsReport::nr},
    {"FAA", &MetricsReport::faa},
    {"SAA", &MetricsReport::saa},
    {"AFPR", &MetricsReport::afpr},
    {"NFPR", &MetricsReport::nfpr},
    {"AFPA", &MetricsReport::afpa},
    {"NFPA", &MetricsReport::nfpa},
    {"NAA", &MetricsReport::naa},
    {"IFAA", &MetricsReport::ifaa},
}};

void require_subset(const Mask& inner, const Mask& outer, const std::string& what) {
    for (std::size_t i = 0; i < inner.data.size(); ++i) {
        if (inner.data[i] && !outer.data[i])
            throw std::invalid_argument("region labels: " + what);
    }
}

// Rate over a region; absent when the region is empty.
std::optional<double> region_rate(const Raster& map, const Mask& region, double thresh) {
    std::size_t total = 0, positive = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (!region.data[i]) continue;
        ++total;
        if (map.data[i] > thresh) ++positive;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(positive) / static_cast<double>(total);
}

// Mean of the map over the region's positive pixels.
std::optional<double> positive_mean(const Raster& map, const Mask& region, double thresh) {
    std::size_t n = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (!region.data[i] || map.data[i] <= thresh) continue;
        ++n;
        sum += map.data[i];
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

// Mean of the map over all region pixels.
std::optional<double> region_mean(const Raster& map, const Mask& region) {
    std::size_t n = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (!region.data[i]) continue;
        ++n;
        sum += map.data[i];
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

} // namespace

void validate_labels(const RegionLabels& labels) {
    const Mask& ref = labels.possible_needle;
    for (const auto& f : kRegionFields) {
        const Mask& m = labels.*(f.member);
        if (!m.same_shape(ref))
            throw std::invalid_argument(std::string("region labels: class ") + f.name +
                                        " has mismatched dimensions");
    }
    require_subset(labels.first_reverb, labels.possible_artifact,
                   "first_reverb must lie inside possible_artifact");
    require_subset(labels.second_reverb, labels.possible_artifact,
                   "second_reverb must lie inside possible_artifact");
    require_subset(labels.fuzzy_artifact, labels.possible_artifact,
                   "fuzzy_artifact must lie inside possible_artifact");
    require_subset(labels.needle_confident, labels.possible_needle,
                   "needle_confident must lie inside possible_needle");
    for (std::size_t i = 0; i < labels.non_artifact_gap.data.size(); ++i) {
        if (labels.non_artifact_gap.data[i] &&
            (labels.first_reverb.data[i] || labels.second_reverb.data[i]))
            throw std::invalid_argument(
                "region labels: non_artifact_gap overlaps a confident reverb patch");
    }
}

MetricsReport compute_metrics(const Raster& artifact_soft, const Raster& needle_soft,
                              const RegionLabels& labels, const PipelineConfig& cfg) {
    require_same_shape(artifact_soft, needle_soft, "compute_metrics");
    require_same_shape(labels.possible_needle, artifact_soft, "compute_metrics: labels");
    validate_labels(labels);

    const double at = cfg.artifact_pos_thresh;
    const double nt = cfg.needle_pos_thresh;

    MetricsReport rep;
    rep.far = region_rate(artifact_soft, labels.first_reverb, at);
    rep.sar = region_rate(artifact_soft, labels.second_reverb, at);
    rep.nr = region_rate(needle_soft, labels.needle_confident, nt);
    rep.faa = positive_mean(artifact_soft, labels.first_reverb, at);
    rep.saa = positive_mean(artifact_soft, labels.second_reverb, at);

    // False positives live outside the permissive regions.
    Mask outside_artifact(labels.possible_artifact.width, labels.possible_artifact.height);
    Mask outside_needle(labels.possible_needle.width, labels.possible_needle.height);
    for (std::size_t i = 0; i < outside_artifact.data.size(); ++i) {
        outside_artifact.data[i] = labels.possible_artifact.data[i] ? 0 : 1;
        outside_needle.data[i] = labels.possible_needle.data[i] ? 0 : 1;
    }
    rep.afpr = region_rate(artifact_soft, outside_artifact, at);
    rep.nfpr = region_rate(needle_soft, outside_needle, nt);
    rep.afpa = positive_mean(artifact_soft, outside_artifact, at);
    rep.nfpa = positive_mean(needle_soft, outside_needle, nt);

    rep.naa = region_mean(artifact_soft, labels.non_artifact_gap);
    rep.ifaa = positive_mean(artifact_soft, labels.fuzzy_artifact, at);
    return rep;
}

MetricsReport aggregate_reports(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate_reports: empty report list");
    MetricsReport agg;
    for (const auto& f : kMetricFields) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& rep : reports) {
            if (const auto& v = rep.*(f.member)) {
                sum += *v;
                ++n;
            }
        }
        if (n > 0) agg.*(f.member) = sum / static_cast<double>(n);
    }
    return agg;
}

std::vector<std::pair<std::string, double>> report_entries(const MetricsReport& report) {
    std::vector<std::pair<std::string, double>> entries;
    for (const auto& f : kMetricFields) {
        if (const auto& v = report.*(f.member)) entries.emplace_back(f.name, *v);
    }
    return entries;
}

std::string format_report(const MetricsReport& report) {
    std::ostringstream out;
    out.precision(9);
    for (const auto& [name, value] : report_entries(report)) out << name << ' ' << value << '\n';
    return out.str();
}

std::string format_report_table(const MetricsReport& report) {
    std::ostringstream out;
    out << "metric | value\n";
    out << "-------+------\n";
    char buf[64];
    for (const auto& f : kMetricFields) {
        if (const auto& v = report.*(f.member)) {
            std::snprintf(buf, sizeof buf, "%-6s | %.3f\n", f.name, *v);
        } else {
            std::snprintf(buf, sizeof buf, "%-6s |     -\n", f.name);
        }
        out << buf;
    }
    return out.str();
}

MetricsReport parse_report(const std::string& text, const std::string& context) {
    MetricsReport rep;
    for (const auto& [key, value] : parse_kv_text(text, context)) {
        bool known = false;
        for (const auto& f : kMetricFields) {
            if (key == f.name) {
                try {
                    rep.*(f.member) = std::stod(value);
                } catch (const std::exception&) {
                    throw FormatError(context + ": bad value for " + key + ": '" + value + "'");
                }
                known = true;
                break;
            }
        }
        if (!known) throw FormatError(context + ": unknown metric '" + key + "'");
    }
    return rep;
}

void write_report(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    out << format_report(report);
    if (!out) throw FormatError("write failed for " + path);
}

MetricsReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report(buf.str(), path);
}

RegionLabels read_labels_dir(const std::string& dir) {
    const auto entries = read_kv_file((fs::path(dir) / "manifest.txt").string());
    RegionLabels labels;
    std::array<bool, kRegionFields.size()> seen{};
    for (const auto& [key, value] : entries) {
        bool known = false;
        for (std::size_t i = 0; i < kRegionFields.size(); ++i) {
            if (key == kRegionFields[i].name) {
                labels.*(kRegionFields[i].member) = read_mask_pgm((fs::path(dir) / value).string());
                seen[i] = true;
                known = true;
                break;
            }
        }
        if (!known) throw FormatError(dir + "/manifest.txt: unknown region class '" + key + "'");
    }
    for (std::size_t i = 0; i < kRegionFields.size(); ++i) {
        if (!seen[i])
            throw FormatError(dir + "/manifest.txt: missing region class '" +
                              std::string(kRegionFields[i].name) + "'");
    }
    validate_labels(labels);
    return labels;
}

void write_labels_dir(const RegionLabels& labels, const std::string& dir) {
    validate_labels(labels);
    fs::create_directories(dir);
    KvEntries manifest;
    for (const auto& f : kRegionFields) {
        const std::string file = std::string(f.name) + ".pgm";
        write_mask_pgm(labels.*(f.member), (fs::path(dir) / file).string());
        manifest.emplace_back(f.name, file);
    }
    write_kv_file(manifest, (fs::path(dir) / "manifest.txt").string());
}

} // namespace reverb

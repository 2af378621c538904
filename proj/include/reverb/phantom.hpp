#pragma once
// Synthetic ultrasound phantom: bright needle streaks with exponentially
// decaying reverberation lines below them, multiplicative speckle,
// optional dark vessels and needle-free clutter lines, plus the
// geometric region labels and over-labeled hard masks used for testing.

#include <cstdint>
#include <string>
#include <vector>

#include "reverb/metrics.hpp"
#include "reverb/raster.hpp"

namespace reverb {

struct SpeckleParams {
    double mean = 0.10;     // background tissue level
    double contrast = 0.25; // relative amplitude of the speckle field
    int smooth_radius = 2;  // box-blur radius applied to the noise field
};

struct NeedleSpec {
    int row = 0;
    int col_start = 0;
    int length = 0;
    double brightness = 0.9;
    int reverb_spacing = 8; // s, rows between reverberation lines
    int reverb_count = 3;
    double decay_alpha = 0.8;
};

// Reverberation-like lines with no causing needle; they show up in the
// image and the artifact ground truth but produce no region labels.
struct ClutterSpec {
    int row = 0;
    int col_start = 0;
    int length = 0;
    double brightness = 0.5;
    int spacing = 8;
    int count = 2;
    double decay_alpha = 0.8;
};

struct VesselSpec {
    int row = 0;
    int col = 0;
    int radius_v = 8;
    int radius_h = 14;
    double darkness = 0.8; // 1 = anechoic
};

struct PhantomSpec {
    int width = 256;
    int height = 256;
    std::vector<NeedleSpec> needles;
    std::vector<ClutterSpec> clutter;
    std::vector<VesselSpec> vessels;
    SpeckleParams speckle;
    double noise_level = 0.01; // additive Gaussian sigma
};

void validate_spec(const PhantomSpec& spec);

PhantomSpec read_phantom_spec(const std::string& path);
void write_phantom_spec(const PhantomSpec& spec, const std::string& path);

struct SimulatedPhantom {
    Raster image;
    Raster gt_artifact; // noiseless artifact contribution per pixel
    Raster gt_needle;   // 1 on needle pixels
    RegionLabels labels;
};

// Deterministic given (spec, seed).
SimulatedPhantom simulate(const PhantomSpec& spec, std::uint64_t seed);

struct Overlabel {
    Raster artifact_hard; // binary 0/1
    Raster needle_hard;   // binary 0/1
};

// Thresholds the ground truth, optionally in-paints each column between
// its first and last artifact row (annotator-style over-label), then
// dilates both masks with a Euclidean disk of the given radius.
Overlabel make_overlabel(const Raster& gt_artifact, const Raster& gt_needle,
                         int dilation, bool infill);

// Writes n samples under dir/sample_###/ (image.pgm, gt maps, labels/)
// plus a manifest listing the sample directories. Sample k uses seed
// base_seed + k. Returns the sample directory names.
std::vector<std::string> write_phantom_batch(const PhantomSpec& spec, std::uint64_t base_seed,
                                             int n, const std::string& dir);

} // namespace reverb

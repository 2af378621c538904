#pragma once
// The soft-label transform: exponential decay anchored at the causing
// needle, image-intensity weighting, their pixelwise max, sigmoid
// suppression of the dark space between reverberation lines, and the
// matching std-map rescale.

#include <vector>

#include "reverb/cluster.hpp"
#include "reverb/config.hpp"
#include "reverb/raster.hpp"

namespace reverb {

// Per-cluster needle assignment plus the distances the decay model needs:
// h(i,j) is the Euclidean distance from a cluster pixel to the nearest
// pixel of its assigned needle; depth[id] is the max of h over the
// cluster (the deepest pixel's distance).
struct ClusterGeometry {
    ClusterMap clusters;
    std::vector<int> needle_of_cluster; // size count+1; -1 = no needle (removed)
    std::vector<double> depth;          // size count+1; 0 for removed clusters
    Raster distance_to_needle;          // h per pixel; 0 outside assigned clusters
};

ClusterGeometry compute_geometry(const ClusterMap& clusters,
                                 const std::vector<NeedleInstance>& needles,
                                 const std::vector<int>& needle_of_cluster);

// y21(i,j) = y1(i,j) * exp(-alpha * h(i,j) / d). Throws std::logic_error
// if a positive y1 pixel has no assigned cluster geometry.
Raster decay_map(const Raster& y1, const ClusterGeometry& geometry, double alpha);

// y22(i,j) = I(i,j)/m1 * y1(i,j) with m1 the max image value over the
// needle region. Throws std::domain_error when no needle pixel exceeds
// needle_pos_thresh (or the needle region is all black).
Raster intensity_weight_map(const Raster& image, const Raster& needle_mean,
                            const Raster& y1, double needle_pos_thresh);

Raster combine_max(const Raster& y21, const Raster& y22);

// out(i,j) = y2(i,j) / (1 + exp(-beta*I(i,j)/m2(i,j) + beta/2)) with
// m2 the image max over the window offsets ii in [-vw, vw), jj in
// [-hw, hw) clipped to the image. An all-black window under a positive
// label uses the I=0 limit of the factor and logs one warning per call.
Raster suppress_between_reverbs(const Raster& image, const Raster& y2,
                                double beta, int vw, int hw);

// sigma(i,j) = mu_soft(i,j) / (mu_hard(i,j) + epsilon)
Raster std_transform(const Raster& mu_soft, const Raster& mu_hard, double epsilon);

// Variant that rescales the hard std map by the same ratio:
// sigma(i,j) = sigma_hard(i,j) * mu_soft(i,j) / (mu_hard(i,j) + epsilon)
Raster std_transform_scaled(const Raster& mu_soft, const Raster& mu_hard,
                            const Raster& sigma_hard, double epsilon);

struct TransformStages {
    ClusterMap clusters;
    std::vector<NeedleInstance> needles;
    std::vector<int> needle_of_cluster;
    Raster y1;  // after false-positive removal
    Raster y21; // decay branch
    Raster y22; // intensity branch
    Raster y2;  // max of the two
    ProbMap artifact_soft;
    ProbMap needle_soft;
};

// Full composition. Needle maps pass through unchanged; when every
// cluster is removed the soft artifact maps are all zero.
TransformStages transform_stages(const Raster& image, const ProbMap& artifact,
                                 const ProbMap& needle, const PipelineConfig& cfg);

struct TransformResult {
    ProbMap artifact_soft;
    ProbMap needle_soft;
};

TransformResult transform_full(const Raster& image, const ProbMap& artifact,
                               const ProbMap& needle, const PipelineConfig& cfg);

} // namespace reverb

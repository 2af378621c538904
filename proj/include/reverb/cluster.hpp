#pragma once
// Elliptical-neighborhood flood-fill clustering of artifact pixels and
// needle-anchored false-positive removal.
//
// Two positive pixels are adjacent when ((di)/vt)^2 + ((dj)/ht)^2 < 1
// with di the row offset and dj the column offset. A cluster survives
// false-positive removal only when a needle instance sits closely above
// it; everything else is wiped from the artifact map.

#include <cstdint>
#include <utility>
#include <vector>

#include "reverb/raster.hpp"

namespace reverb {

struct ClusterMap {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> labels; // 0 = background, 1..count = cluster id
    int count = 0;

    std::int32_t at(int i, int j) const { return labels[static_cast<std::size_t>(i) * width + j]; }
    bool same_shape(const Raster& r) const { return width == r.width && height == r.height; }
};

struct NeedleInstance {
    std::vector<std::pair<int, int>> pixels; // (row, col), discovery order
    int top_row = 0;                         // smallest row index in the instance
};

// Clusters every pixel with artifact_mean > 0. Ids are assigned by the
// first pixel of each cluster encountered in row-major order, so the
// result is deterministic.
ClusterMap flood_fill_clusters(const Raster& artifact_mean, int vt, int ht);

// 8-connected components of needle_mean > thresh, ordered by their first
// pixel in row-major scan.
std::vector<NeedleInstance> extract_needles(const Raster& needle_mean, double thresh);

struct FalsePositiveRemoval {
    Raster y1;                          // artifact_mean on kept clusters, 0 elsewhere
    std::vector<int> needle_of_cluster; // size count+1; [id] = needle index, -1 = removed
};

// A cluster is kept iff some needle instance N has (a) a cluster pixel
// strictly below N's topmost row and (b) a cluster pixel within t_fp of
// some pixel of N. Kept clusters are assigned the nearest qualifying
// instance (ties go to the instance with the smaller top row).
//
// literal_global_rule instead requires a single cluster pixel that lies
// below every needle pixel in the image and within t_fp of one of them.
FalsePositiveRemoval remove_false_positives(const Raster& artifact_mean,
                                            const ClusterMap& clusters,
                                            const std::vector<NeedleInstance>& needles,
                                            int t_fp,
                                            bool literal_global_rule = false);

// Cluster ids as a float grid, for RF32 debug dumps.
Raster cluster_ids_as_raster(const ClusterMap& clusters);

} // namespace reverb

#include "reverb/cluster.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace reverb {

namespace {

// Offsets inside the open ellipse (di/vt)^2 + (dj/ht)^2 < 1, excluding
// (0,0). Exact integer test: di^2*ht^2 + dj^2*vt^2 < vt^2*ht^2.
std::vector<std::pair<int, int>> ellipse_offsets(int vt, int ht) {
    std::vector<std::pair<int, int>> offsets;
    const std::int64_t vt2 = static_cast<std::int64_t>(vt) * vt;
    const std::int64_t ht2 = static_cast<std::int64_t>(ht) * ht;
    for (int di = -(vt - 1); di <= vt - 1; ++di) {
        for (int dj = -(ht - 1); dj <= ht - 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            if (static_cast<std::int64_t>(di) * di * ht2 +
                    static_cast<std::int64_t>(dj) * dj * vt2 <
                vt2 * ht2) {
                offsets.emplace_back(di, dj);
            }
        }
    }
    return offsets;
}

std::int64_t sq_dist(int r0, int c0, int r1, int c1) {
    const std::int64_t dr = r0 - r1;
    const std::int64_t dc = c0 - c1;
    return dr * dr + dc * dc;
}

std::vector<std::vector<std::pair<int, int>>> cluster_pixel_lists(const ClusterMap& clusters) {
    std::vector<std::vector<std::pair<int, int>>> pixels(clusters.count + 1);
    for (int i = 0; i < clusters.height; ++i) {
        for (int j = 0; j < clusters.width; ++j) {
            const std::int32_t id = clusters.at(i, j);
            if (id > 0) pixels[id].emplace_back(i, j);
        }
    }
    return pixels;
}

} // namespace

ClusterMap flood_fill_clusters(const Raster& artifact_mean, int vt, int ht) {
    if (vt < 1 || ht < 1) throw std::invalid_argument("flood_fill_clusters: vt and ht must be >= 1");
    ClusterMap map;
    map.width = artifact_mean.width;
    map.height = artifact_mean.height;
    map.labels.assign(artifact_mean.size(), 0);

    const auto offsets = ellipse_offsets(vt, ht);
    std::vector<std::pair<int, int>> stack;

    for (int i = 0; i < map.height; ++i) {
        for (int j = 0; j < map.width; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * map.width + j;
            if (artifact_mean.data[idx] <= 0.0 || map.labels[idx] != 0) continue;
            const std::int32_t id = ++map.count;
            map.labels[idx] = id;
            stack.clear();
            stack.emplace_back(i, j);
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                for (const auto& [di, dj] : offsets) {
                    const int ii = x + di;
                    const int jj = y + dj;
                    if (ii < 0 || ii >= map.height || jj < 0 || jj >= map.width) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ii) * map.width + jj;
                    if (map.labels[nidx] != 0 || artifact_mean.data[nidx] <= 0.0) continue;
                    map.labels[nidx] = id;
                    stack.emplace_back(ii, jj);
                }
            }
        }
    }
    return map;
}

std::vector<NeedleInstance> extract_needles(const Raster& needle_mean, double thresh) {
    std::vector<NeedleInstance> instances;
    std::vector<std::uint8_t> visited(needle_mean.size(), 0);
    std::vector<std::pair<int, int>> stack;

    for (int i = 0; i < needle_mean.height; ++i) {
        for (int j = 0; j < needle_mean.width; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * needle_mean.width + j;
            if (visited[idx] || needle_mean.data[idx] <= thresh) continue;
            NeedleInstance inst;
            inst.top_row = i;
            visited[idx] = 1;
            stack.clear();
            stack.emplace_back(i, j);
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                inst.pixels.emplace_back(x, y);
                inst.top_row = std::min(inst.top_row, x);
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        const int ii = x + di;
                        const int jj = y + dj;
                        if (!needle_mean.in_bounds(ii, jj)) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ii) * needle_mean.width + jj;
                        if (visited[nidx] || needle_mean.data[nidx] <= thresh) continue;
                        visited[nidx] = 1;
                        stack.emplace_back(ii, jj);
                    }
                }
            }
            instances.push_back(std::move(inst));
        }
    }
    return instances;
}

FalsePositiveRemoval remove_false_positives(const Raster& artifact_mean,
                                            const ClusterMap& clusters,
                                            const std::vector<NeedleInstance>& needles,
                                            int t_fp,
                                            bool literal_global_rule) {
    if (!clusters.same_shape(artifact_mean))
        throw std::invalid_argument("remove_false_positives: cluster map does not match artifact map");
    if (t_fp < 1) throw std::invalid_argument("remove_false_positives: t_fp must be >= 1");

    FalsePositiveRemoval result;
    result.y1 = Raster(artifact_mean.width, artifact_mean.height, 0.0);
    result.needle_of_cluster.assign(static_cast<std::size_t>(clusters.count) + 1, -1);
    if (needles.empty() || clusters.count == 0) return result;

    const auto pixels = cluster_pixel_lists(clusters);
    const std::int64_t t_sq = static_cast<std::int64_t>(t_fp) * t_fp;

    int global_max_needle_row = std::numeric_limits<int>::min();
    for (const auto& n : needles)
        for (const auto& [r, c] : n.pixels) global_max_needle_row = std::max(global_max_needle_row, r);

    for (int id = 1; id <= clusters.count; ++id) {
        const auto& cluster = pixels[id];
        int best_needle = -1;
        std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();

        if (literal_global_rule) {
            // One cluster pixel must sit below every needle pixel and within
            // t_fp of at least one of them.
            bool qualified = false;
            for (const auto& [r, c] : cluster) {
                if (r <= global_max_needle_row) continue;
                for (const auto& n : needles) {
                    for (const auto& [nr, nc] : n.pixels) {
                        if (sq_dist(r, c, nr, nc) < t_sq) {
                            qualified = true;
                            break;
                        }
                    }
                    if (qualified) break;
                }
                if (qualified) break;
            }
            if (!qualified) continue;
            // Cause attribution still picks the nearest instance.
            for (std::size_t n = 0; n < needles.size(); ++n) {
                std::int64_t dmin = std::numeric_limits<std::int64_t>::max();
                for (const auto& [r, c] : cluster)
                    for (const auto& [nr, nc] : needles[n].pixels)
                        dmin = std::min(dmin, sq_dist(r, c, nr, nc));
                if (dmin < best_dist ||
                    (dmin == best_dist && best_needle >= 0 &&
                     needles[n].top_row < needles[best_needle].top_row)) {
                    best_dist = dmin;
                    best_needle = static_cast<int>(n);
                }
            }
        } else {
            for (std::size_t n = 0; n < needles.size(); ++n) {
                bool below = false;
                for (const auto& [r, c] : cluster) {
                    if (r > needles[n].top_row) {
                        below = true;
                        break;
                    }
                }
                if (!below) continue;
                std::int64_t dmin = std::numeric_limits<std::int64_t>::max();
                for (const auto& [r, c] : cluster)
                    for (const auto& [nr, nc] : needles[n].pixels)
                        dmin = std::min(dmin, sq_dist(r, c, nr, nc));
                if (dmin >= t_sq) continue;
                if (dmin < best_dist ||
                    (dmin == best_dist && best_needle >= 0 &&
                     needles[n].top_row < needles[best_needle].top_row)) {
                    best_dist = dmin;
                    best_needle = static_cast<int>(n);
                }
            }
            if (best_needle < 0) continue;
        }

        result.needle_of_cluster[id] = best_needle;
        for (const auto& [r, c] : cluster) result.y1.at(r, c) = artifact_mean.at(r, c);
    }
    return result;
}

Raster cluster_ids_as_raster(const ClusterMap& clusters) {
    Raster r(clusters.width, clusters.height);
    for (std::size_t i = 0; i < clusters.labels.size(); ++i)
        r.data[i] = static_cast<double>(clusters.labels[i]);
    return r;
}

} // namespace reverb

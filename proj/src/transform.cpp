#include "reverb/transform.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace reverb {

ClusterGeometry compute_geometry(const ClusterMap& clusters,
                                 const std::vector<NeedleInstance>& needles,
                                 const std::vector<int>& needle_of_cluster) {
    if (needle_of_cluster.size() != static_cast<std::size_t>(clusters.count) + 1)
        throw std::invalid_argument("compute_geometry: assignment size does not match cluster count");

    ClusterGeometry geo;
    geo.clusters = clusters;
    geo.needle_of_cluster = needle_of_cluster;
    geo.depth.assign(static_cast<std::size_t>(clusters.count) + 1, 0.0);
    geo.distance_to_needle = Raster(clusters.width, clusters.height, 0.0);

    for (int i = 0; i < clusters.height; ++i) {
        for (int j = 0; j < clusters.width; ++j) {
            const std::int32_t id = clusters.at(i, j);
            if (id <= 0) continue;
            const int n = needle_of_cluster[id];
            if (n < 0) continue;
            if (n >= static_cast<int>(needles.size()))
                throw std::invalid_argument("compute_geometry: needle index out of range");
            std::int64_t dmin = std::numeric_limits<std::int64_t>::max();
            for (const auto& [nr, nc] : needles[n].pixels) {
                const std::int64_t dr = i - nr;
                const std::int64_t dc = j - nc;
                dmin = std::min(dmin, dr * dr + dc * dc);
            }
            const double h = std::sqrt(static_cast<double>(dmin));
            geo.distance_to_needle.at(i, j) = h;
            geo.depth[id] = std::max(geo.depth[id], h);
        }
    }
    return geo;
}

Raster decay_map(const Raster& y1, const ClusterGeometry& geometry, double alpha) {
    if (!geometry.clusters.same_shape(y1))
        throw std::invalid_argument("decay_map: geometry does not match y1");

    Raster y21(y1.width, y1.height, 0.0);
    for (int i = 0; i < y1.height; ++i) {
        for (int j = 0; j < y1.width; ++j) {
            const double v = y1.at(i, j);
            if (v <= 0.0) continue;
            const std::int32_t id = geometry.clusters.at(i, j);
            if (id <= 0 || geometry.needle_of_cluster[id] < 0)
                throw std::logic_error("decay_map: positive pixel without cluster geometry at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
            const double d = geometry.depth[id];
            // d == 0 only when the whole cluster sits on the needle; the
            // ratio degenerates to the single-pixel case h/d = 1.
            const double ratio = d > 0.0 ? geometry.distance_to_needle.at(i, j) / d : 1.0;
            y21.at(i, j) = v * std::exp(-alpha * ratio);
        }
    }
    return y21;
}

Raster intensity_weight_map(const Raster& image, const Raster& needle_mean,
                            const Raster& y1, double needle_pos_thresh) {
    require_same_shape(image, needle_mean, "intensity_weight_map");
    require_same_shape(image, y1, "intensity_weight_map");

    double m1 = -1.0;
    for (std::size_t i = 0; i < image.size(); ++i)
        if (needle_mean.data[i] > needle_pos_thresh) m1 = std::max(m1, image.data[i]);
    if (m1 < 0.0) throw std::domain_error("intensity_weight_map: no needle region for normalization");
    if (m1 == 0.0) throw std::domain_error("intensity_weight_map: needle region is all black");

    Raster y22(image.width, image.height, 0.0);
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (y1.data[i] > 0.0) y22.data[i] = image.data[i] / m1 * y1.data[i];
    }
    return y22;
}

Raster combine_max(const Raster& y21, const Raster& y22) {
    require_same_shape(y21, y22, "combine_max");
    Raster y2(y21.width, y21.height);
    for (std::size_t i = 0; i < y21.size(); ++i) y2.data[i] = std::max(y21.data[i], y22.data[i]);
    return y2;
}

Raster suppress_between_reverbs(const Raster& image, const Raster& y2,
                                double beta, int vw, int hw) {
    require_same_shape(image, y2, "suppress_between_reverbs");
    if (vw < 1 || hw < 1)
        throw std::invalid_argument("suppress_between_reverbs: vw and hw must be >= 1");

    Raster out(image.width, image.height, 0.0);
    std::size_t degenerate = 0;
    for (int i = 0; i < image.height; ++i) {
        for (int j = 0; j < image.width; ++j) {
            const double label = y2.at(i, j);
            double m2 = 0.0;
            for (int ii = -vw; ii < vw; ++ii) {
                const int r = i + ii;
                if (r < 0 || r >= image.height) continue;
                for (int jj = -hw; jj < hw; ++jj) {
                    const int c = j + jj;
                    if (c < 0 || c >= image.width) continue;
                    m2 = std::max(m2, image.at(r, c));
                }
            }
            double ratio;
            if (m2 > 0.0) {
                ratio = image.at(i, j) / m2;
            } else {
                ratio = 0.0; // I = 0 limit
                if (label > 0.0) ++degenerate;
            }
            out.at(i, j) = label / (1.0 + std::exp(-beta * ratio + beta / 2.0));
        }
    }
    if (degenerate > 0) {
        std::cerr << "warning: suppress_between_reverbs: " << degenerate
                  << " labeled pixel(s) with an all-black neighborhood\n";
    }
    return out;
}

Raster std_transform(const Raster& mu_soft, const Raster& mu_hard, double epsilon) {
    require_same_shape(mu_soft, mu_hard, "std_transform");
    Raster sigma(mu_soft.width, mu_soft.height);
    for (std::size_t i = 0; i < mu_soft.size(); ++i)
        sigma.data[i] = mu_soft.data[i] / (mu_hard.data[i] + epsilon);
    return sigma;
}

Raster std_transform_scaled(const Raster& mu_soft, const Raster& mu_hard,
                            const Raster& sigma_hard, double epsilon) {
    require_same_shape(mu_soft, mu_hard, "std_transform_scaled");
    require_same_shape(mu_soft, sigma_hard, "std_transform_scaled");
    Raster sigma(mu_soft.width, mu_soft.height);
    for (std::size_t i = 0; i < mu_soft.size(); ++i)
        sigma.data[i] = sigma_hard.data[i] * mu_soft.data[i] / (mu_hard.data[i] + epsilon);
    return sigma;
}

TransformStages transform_stages(const Raster& image, const ProbMap& artifact,
                                 const ProbMap& needle, const PipelineConfig& cfg) {
    validate(cfg);
    validate_probmap(artifact, "transform: artifact map");
    validate_probmap(needle, "transform: needle map");
    require_same_shape(image, artifact.mean, "transform: image vs artifact");
    require_same_shape(image, needle.mean, "transform: image vs needle");

    TransformStages st;
    st.clusters = flood_fill_clusters(artifact.mean, cfg.vt, cfg.ht);
    st.needles = extract_needles(needle.mean, cfg.needle_pos_thresh);

    auto removal = remove_false_positives(artifact.mean, st.clusters, st.needles, cfg.t_fp,
                                          cfg.literal_global_needle_rule);
    st.needle_of_cluster = removal.needle_of_cluster;
    st.y1 = std::move(removal.y1);

    const bool any_kept =
        std::any_of(st.needle_of_cluster.begin(), st.needle_of_cluster.end(),
                    [](int n) { return n >= 0; });

    if (!any_kept) {
        st.y21 = Raster(image.width, image.height, 0.0);
        st.y22 = st.y21;
        st.y2 = st.y21;
        st.artifact_soft.mean = st.y21;
        st.artifact_soft.std = st.y21;
    } else {
        const ClusterGeometry geo = compute_geometry(st.clusters, st.needles, st.needle_of_cluster);
        st.y21 = decay_map(st.y1, geo, cfg.alpha);
        st.y22 = intensity_weight_map(image, needle.mean, st.y1, cfg.needle_pos_thresh);
        st.y2 = combine_max(st.y21, st.y22);
        st.artifact_soft.mean = suppress_between_reverbs(image, st.y2, cfg.beta, cfg.vw, cfg.hw);
        st.artifact_soft.std =
            cfg.scaled_std_transform
                ? std_transform_scaled(st.artifact_soft.mean, artifact.mean, artifact.std, cfg.epsilon)
                : std_transform(st.artifact_soft.mean, artifact.mean, cfg.epsilon);
    }

    st.needle_soft = needle; // needle labels do not change
    return st;
}

TransformResult transform_full(const Raster& image, const ProbMap& artifact,
                               const ProbMap& needle, const PipelineConfig& cfg) {
    TransformStages st = transform_stages(image, artifact, needle, cfg);
    return TransformResult{std::move(st.artifact_soft), std::move(st.needle_soft)};
}

} // namespace reverb

#include "reverb/compound.hpp"

#include <algorithm>
#include <limits>

namespace reverb {

Raster confidence_map(const Raster& artifact_soft) {
    require_unit_range(artifact_soft, "confidence_map");
    Raster c(artifact_soft.width, artifact_soft.height);
    for (std::size_t i = 0; i < artifact_soft.size(); ++i) c.data[i] = 1.0 - artifact_soft.data[i];
    return c;
}

Raster compound_two(const Raster& image1, const Raster& image2,
                    const Raster& conf1, const Raster& conf2, double t) {
    require_same_shape(image1, image2, "compound_two");
    require_same_shape(image1, conf1, "compound_two");
    require_same_shape(image1, conf2, "compound_two");
    if (t < 0.0) throw std::invalid_argument("compound_two: t must be >= 0");

    Raster out(image1.width, image1.height);
    for (std::size_t i = 0; i < image1.size(); ++i) {
        if (conf1.data[i] - conf2.data[i] > t) out.data[i] = image1.data[i];
        else if (conf2.data[i] - conf1.data[i] > t) out.data[i] = image2.data[i];
        else out.data[i] = std::max(image1.data[i], image2.data[i]);
    }
    return out;
}

CompoundResult compound_many(const std::vector<View>& views, double t) {
    if (views.size() < 2) throw std::invalid_argument("compound_many: need at least 2 views");
    if (t < 0.0) throw std::invalid_argument("compound_many: t must be >= 0");
    const Raster& ref = views.front().image;
    std::vector<Raster> conf;
    conf.reserve(views.size());
    for (const auto& v : views) {
        require_same_shape(v.image, ref, "compound_many");
        require_same_shape(v.artifact_soft, ref, "compound_many");
        conf.push_back(confidence_map(v.artifact_soft));
    }

    CompoundResult result;
    result.image = Raster(ref.width, ref.height);
    result.source = Raster(ref.width, ref.height);
    const std::size_t n = views.size();

    for (std::size_t i = 0; i < ref.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t v = 1; v < n; ++v)
            if (conf[v].data[i] > conf[best].data[i]) best = v;
        double second = -std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v)
            if (v != best) second = std::max(second, conf[v].data[i]);

        if (conf[best].data[i] - second > t) {
            result.image.data[i] = views[best].image.data[i];
            result.source.data[i] = static_cast<double>(best);
        } else {
            // Max intensity over every view within t of the best confidence.
            std::size_t pick = n;
            for (std::size_t v = 0; v < n; ++v) {
                if (conf[best].data[i] - conf[v].data[i] > t) continue;
                if (pick == n || views[v].image.data[i] > views[pick].image.data[i]) pick = v;
            }
            result.image.data[i] = views[pick].image.data[i];
            result.source.data[i] = static_cast<double>(pick);
        }
    }
    return result;
}

Raster compound_mean(const std::vector<View>& views) {
    if (views.empty()) throw std::invalid_argument("compound_mean: no views");
    Raster out(views.front().image.width, views.front().image.height, 0.0);
    for (const auto& v : views) {
        require_same_shape(v.image, out, "compound_mean");
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += v.image.data[i];
    }
    for (auto& x : out.data) x /= static_cast<double>(views.size());
    return out;
}

Raster compound_max(const std::vector<View>& views) {
    if (views.empty()) throw std::invalid_argument("compound_max: no views");
    Raster out(views.front().image.width, views.front().image.height, 0.0);
    for (const auto& v : views) {
        require_same_shape(v.image, out, "compound_max");
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data[i] = std::max(out.data[i], v.image.data[i]);
    }
    return out;
}

} // namespace reverb

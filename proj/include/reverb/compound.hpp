#pragma once
// Artifact-aware multi-view compounding. Each pixel of the output is
// copied from exactly one view: the clearly most-confident one when its
// confidence exceeds the runner-up by more than t, otherwise the
// brightest among the views within t of the best confidence.

#include <vector>

#include "reverb/raster.hpp"

namespace reverb {

// C = 1 - artifact_soft. Input values must lie in [0,1].
Raster confidence_map(const Raster& artifact_soft);

// Two-view rule: C1-C2 > t takes I1, C2-C1 > t takes I2, else the
// pixelwise max. Inequalities are strict.
Raster compound_two(const Raster& image1, const Raster& image2,
                    const Raster& conf1, const Raster& conf2, double t);

struct View {
    Raster image;
    Raster artifact_soft;
};

struct CompoundResult {
    Raster image;
    Raster source; // index of the view each pixel was taken from
};

// N-view generalization via the top-two confidence gap; reduces to
// compound_two for two views. Requires at least two views.
CompoundResult compound_many(const std::vector<View>& views, double t);

// Reference baselines for comparison output.
Raster compound_mean(const std::vector<View>& views);
Raster compound_max(const std::vector<View>& views);

} // namespace reverb

#pragma once
// Probabilistic segmenter contract, a classical baseline implementation,
// the soft-label training loss, the aleatoric uncertainty estimator and
// uncertainty-based label pruning.

#include <cstdint>
#include <vector>

#include "reverb/raster.hpp"

namespace reverb {

// A probabilistic segmenter produces one plausible segmentation per
// seed: mean and std maps for the artifact and needle classes. Mean
// values are in [0,1], std values non-negative, dimensions match the
// input image.
class Segmenter {
public:
    struct Result {
        ProbMap artifact;
        ProbMap needle;
    };

    virtual ~Segmenter() = default;
    virtual Result segment(const Raster& image, std::uint64_t seed) const = 0;
};

struct BaselineParams {
    double bright_quantile = 0.98; // candidate threshold quantile of image values
    int ridge_halfwin = 2;         // vertical local-max window half-height
    int min_needle_span = 16;      // columns a group must span to count as the needle
    int jitter_runs = 8;           // re-runs used for the std maps
    double jitter = 0.05;          // relative threshold jitter amplitude
};

// Classical ridge-based stand-in for a learned segmenter: bright
// near-horizontal ridges above a brightness quantile, the shallowest
// ridge group taken as the needle, the remaining ridge responses below
// it as artifact. Std maps come from re-running the detection with
// seed-jittered thresholds. Deterministic given (image, params, seed).
class BaselineSegmenter : public Segmenter {
public:
    explicit BaselineSegmenter(BaselineParams params = {}) : params_(params) {}
    Result segment(const Raster& image, std::uint64_t seed) const override;

private:
    BaselineParams params_;
};

struct LossParams {
    double gamma = 0.05;   // activity threshold
    double k_weight = 0.5; // weight where the error is inside the label std
};

struct LossResult {
    double loss = 0.0;
    std::int64_t active_count = 0;
};

// Sum over the pixels where pred or label exceeds gamma of
// w * (pred - label)^2, with w = k when |pred - label| < label_std and
// 1 otherwise.
LossResult weighted_mse_loss(const Raster& pred_mean, const Raster& label_mean,
                             const Raster& label_std, const LossParams& params);

// prob_stack[t][c] is the class-c probability raster of sample t; the
// class probabilities of each sample must sum to 1 per pixel.
using ProbStack = std::vector<std::vector<Raster>>;

struct AleatoricResult {
    std::vector<Raster> class_variance; // per-class diagonal of the estimator
    Raster trace;                       // sum over classes
};

// (1/T) sum_t diag(p_t) - p_t p_t^T, reduced to its diagonal.
AleatoricResult aleatoric_uncertainty(const ProbStack& prob_stack, double tol = 1e-6);

// Masks the uncertainty map to the labeled pixels, inverts it against
// the masked max, then keeps a labeled pixel iff its inverse value
// reaches the per-block quantile (ceil(q*n)-th smallest) of the inverse
// values over the block's labeled pixels. Blocks are patch x patch,
// clipped at the borders.
Mask prune_labels(const Mask& hard_labels, const Raster& uncertainty,
                  int patch, double quantile);

struct EnsembleResult {
    ProbMap artifact; // mean/population-std over the sample means
    ProbMap needle;
    ProbStack artifact_stack; // per sample: {p, 1-p} for the artifact class
    ProbStack needle_stack;
};

// Draws T samples with seeds base_seed, base_seed+1, ... and reduces
// them in seed order. Requires T >= 2.
EnsembleResult segment_ensemble(const Segmenter& segmenter, const Raster& image,
                                int samples, std::uint64_t base_seed);

} // namespace reverb

#include "reverb/probseg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reverb/cluster.hpp"
#include "reverb/rng.hpp"

namespace reverb {

namespace {

double quantile_value(const Raster& image, double q) {
    std::vector<double> values(image.data);
    const std::size_t idx = static_cast<std::size_t>(
        std::floor(q * static_cast<double>(values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + idx, values.end());
    return values[idx];
}

struct Detection {
    Raster needle_mean;
    Raster artifact_mean;
};

// Bright vertical local maxima above tau. The needle is the shallowest
// 8-connected group wide enough to read as a horizontal ridge (speckle
// maxima are blobby and narrow); remaining responses strictly below it
// are artifact.
Detection detect_ridges(const Raster& image, double tau, int halfwin, int min_span) {
    Raster response(image.width, image.height, 0.0);
    for (int i = 0; i < image.height; ++i) {
        for (int j = 0; j < image.width; ++j) {
            const double v = image.at(i, j);
            if (v <= tau) continue;
            bool is_max = true;
            for (int di = -halfwin; di <= halfwin && is_max; ++di) {
                const int r = i + di;
                if (r < 0 || r >= image.height || di == 0) continue;
                if (image.at(r, j) > v) is_max = false;
            }
            if (is_max) response.at(i, j) = v;
        }
    }

    Detection det;
    det.needle_mean = Raster(image.width, image.height, 0.0);
    det.artifact_mean = Raster(image.width, image.height, 0.0);

    const auto groups = extract_needles(response, 0.0);
    std::size_t needle_idx = groups.size();
    for (std::size_t g = 0; g < groups.size(); ++g) { // discovery order = shallowest first
        int cmin = image.width, cmax = -1;
        for (const auto& [r, c] : groups[g].pixels) {
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        if (cmax - cmin + 1 >= min_span) {
            needle_idx = g;
            break;
        }
    }
    if (needle_idx == groups.size()) return det;

    const NeedleInstance& needle = groups[needle_idx];
    int needle_bottom = needle.top_row;
    for (const auto& [r, c] : needle.pixels) needle_bottom = std::max(needle_bottom, r);
    for (const auto& [r, c] : needle.pixels) det.needle_mean.at(r, c) = image.at(r, c);

    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (g == needle_idx) continue;
        for (const auto& [r, c] : groups[g].pixels) {
            if (r > needle_bottom) det.artifact_mean.at(r, c) = image.at(r, c);
        }
    }
    return det;
}

} // namespace

Segmenter::Result BaselineSegmenter::segment(const Raster& image, std::uint64_t seed) const {
    if (image.width < 1 || image.height < 1)
        throw std::invalid_argument("baseline segmenter: empty image");

    const double tau0 = quantile_value(image, params_.bright_quantile);
    SplitMix64 rng(mix_seed(seed, 0x6261736531ULL));

    const double tau_main = tau0 * (1.0 + params_.jitter * rng.uniform(-1.0, 1.0));
    const Detection main = detect_ridges(image, tau_main, params_.ridge_halfwin, params_.min_needle_span);

    const int runs = params_.jitter_runs;
    Raster needle_sum(image.width, image.height, 0.0), needle_sq(image.width, image.height, 0.0);
    Raster artifact_sum(image.width, image.height, 0.0), artifact_sq(image.width, image.height, 0.0);
    for (int t = 0; t < runs; ++t) {
        const double tau_t = tau0 * (1.0 + params_.jitter * rng.uniform(-1.0, 1.0));
        const Detection det = detect_ridges(image, tau_t, params_.ridge_halfwin, params_.min_needle_span);
        for (std::size_t i = 0; i < image.size(); ++i) {
            needle_sum.data[i] += det.needle_mean.data[i];
            needle_sq.data[i] += det.needle_mean.data[i] * det.needle_mean.data[i];
            artifact_sum.data[i] += det.artifact_mean.data[i];
            artifact_sq.data[i] += det.artifact_mean.data[i] * det.artifact_mean.data[i];
        }
    }

    Result result;
    result.needle.mean = main.needle_mean;
    result.artifact.mean = main.artifact_mean;
    result.needle.std = Raster(image.width, image.height, 0.0);
    result.artifact.std = Raster(image.width, image.height, 0.0);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double nm = needle_sum.data[i] / runs;
        const double am = artifact_sum.data[i] / runs;
        result.needle.std.data[i] = std::sqrt(std::max(0.0, needle_sq.data[i] / runs - nm * nm));
        result.artifact.std.data[i] = std::sqrt(std::max(0.0, artifact_sq.data[i] / runs - am * am));
    }
    return result;
}

LossResult weighted_mse_loss(const Raster& pred_mean, const Raster& label_mean,
                             const Raster& label_std, const LossParams& params) {
    require_same_shape(pred_mean, label_mean, "weighted_mse_loss");
    require_same_shape(pred_mean, label_std, "weighted_mse_loss");

    LossResult result;
    for (std::size_t i = 0; i < pred_mean.size(); ++i) {
        const double pred = pred_mean.data[i];
        const double label = label_mean.data[i];
        if (pred <= params.gamma && label <= params.gamma) continue;
        ++result.active_count;
        const double err = std::abs(pred - label);
        const double w = err < label_std.data[i] ? params.k_weight : 1.0;
        result.loss += w * (pred - label) * (pred - label);
    }
    return result;
}

AleatoricResult aleatoric_uncertainty(const ProbStack& prob_stack, double tol) {
    if (prob_stack.empty()) throw std::invalid_argument("aleatoric_uncertainty: empty stack");
    const std::size_t classes = prob_stack.front().size();
    if (classes < 1) throw std::invalid_argument("aleatoric_uncertainty: no classes");
    const Raster& ref = prob_stack.front().front();

    for (const auto& sample : prob_stack) {
        if (sample.size() != classes)
            throw std::invalid_argument("aleatoric_uncertainty: inconsistent class count");
        for (const auto& r : sample) require_same_shape(r, ref, "aleatoric_uncertainty");
        for (std::size_t i = 0; i < ref.size(); ++i) {
            double sum = 0.0;
            for (const auto& r : sample) sum += r.data[i];
            if (std::abs(sum - 1.0) > tol)
                throw std::invalid_argument(
                    "aleatoric_uncertainty: class probabilities sum to " + std::to_string(sum));
        }
    }

    AleatoricResult result;
    result.class_variance.assign(classes, Raster(ref.width, ref.height, 0.0));
    result.trace = Raster(ref.width, ref.height, 0.0);
    const double inv_t = 1.0 / static_cast<double>(prob_stack.size());
    for (const auto& sample : prob_stack) {
        for (std::size_t c = 0; c < classes; ++c) {
            for (std::size_t i = 0; i < ref.size(); ++i) {
                const double p = sample[c].data[i];
                result.class_variance[c].data[i] += (p - p * p) * inv_t;
            }
        }
    }
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < ref.size(); ++i)
            result.trace.data[i] += result.class_variance[c].data[i];
    return result;
}

Mask prune_labels(const Mask& hard_labels, const Raster& uncertainty,
                  int patch, double quantile) {
    require_same_shape(hard_labels, uncertainty, "prune_labels");
    if (patch < 1) throw std::invalid_argument("prune_labels: patch must be >= 1");
    if (!(quantile > 0.0 && quantile < 1.0))
        throw std::invalid_argument("prune_labels: quantile must be in (0,1)");

    Mask out = hard_labels;
    double umax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hard_labels.data.size(); ++i)
        if (hard_labels.data[i]) umax = std::max(umax, uncertainty.data[i]);
    if (!std::isfinite(umax)) return out; // no labeled pixels

    std::vector<double> inverse;
    for (int bi = 0; bi < hard_labels.height; bi += patch) {
        for (int bj = 0; bj < hard_labels.width; bj += patch) {
            const int iend = std::min(bi + patch, hard_labels.height);
            const int jend = std::min(bj + patch, hard_labels.width);
            inverse.clear();
            for (int i = bi; i < iend; ++i)
                for (int j = bj; j < jend; ++j)
                    if (hard_labels.at(i, j)) inverse.push_back(umax - uncertainty.at(i, j));
            if (inverse.empty()) continue;
            std::sort(inverse.begin(), inverse.end());
            const std::size_t k = static_cast<std::size_t>(
                std::ceil(quantile * static_cast<double>(inverse.size())));
            const double thresh = inverse[std::max<std::size_t>(k, 1) - 1];
            for (int i = bi; i < iend; ++i) {
                for (int j = bj; j < jend; ++j) {
                    if (hard_labels.at(i, j) && umax - uncertainty.at(i, j) < thresh)
                        out.set(i, j, false);
                }
            }
        }
    }
    return out;
}

EnsembleResult segment_ensemble(const Segmenter& segmenter, const Raster& image,
                                int samples, std::uint64_t base_seed) {
    if (samples < 2) throw std::invalid_argument("segment_ensemble: need at least 2 samples");

    EnsembleResult result;
    std::vector<Segmenter::Result> draws;
    draws.reserve(samples);
    for (int t = 0; t < samples; ++t)
        draws.push_back(segmenter.segment(image, base_seed + static_cast<std::uint64_t>(t)));

    const int w = image.width, h = image.height;
    result.artifact.mean = Raster(w, h, 0.0);
    result.artifact.std = Raster(w, h, 0.0);
    result.needle.mean = Raster(w, h, 0.0);
    result.needle.std = Raster(w, h, 0.0);

    for (const auto& d : draws) {
        require_same_shape(d.artifact.mean, image, "segment_ensemble: sample shape");
        for (std::size_t i = 0; i < image.size(); ++i) {
            result.artifact.mean.data[i] += d.artifact.mean.data[i];
            result.needle.mean.data[i] += d.needle.mean.data[i];
        }
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
        result.artifact.mean.data[i] /= samples;
        result.needle.mean.data[i] /= samples;
    }
    for (const auto& d : draws) {
        for (std::size_t i = 0; i < image.size(); ++i) {
            const double da = d.artifact.mean.data[i] - result.artifact.mean.data[i];
            const double dn = d.needle.mean.data[i] - result.needle.mean.data[i];
            result.artifact.std.data[i] += da * da;
            result.needle.std.data[i] += dn * dn;
        }
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
        result.artifact.std.data[i] = std::sqrt(result.artifact.std.data[i] / samples);
        result.needle.std.data[i] = std::sqrt(result.needle.std.data[i] / samples);
    }

    for (auto& d : draws) {
        Raster artifact_rest(w, h, 0.0), needle_rest(w, h, 0.0);
        for (std::size_t i = 0; i < image.size(); ++i) {
            artifact_rest.data[i] = 1.0 - d.artifact.mean.data[i];
            needle_rest.data[i] = 1.0 - d.needle.mean.data[i];
        }
        result.artifact_stack.push_back({std::move(d.artifact.mean), std::move(artifact_rest)});
        result.needle_stack.push_back({std::move(d.needle.mean), std::move(needle_rest)});
    }
    return result;
}

} // namespace reverb

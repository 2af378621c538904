#pragma once
// Core grid types shared by every stage of the pipeline.
//
// Raster is a row-major 2-D grid of doubles indexed as (i=row, j=col).
// Image-valued rasters (inputs, mean maps) live in [0,1]; derived maps
// (std maps, cluster-id dumps) may exceed that range, so range checks
// are done by the consumers that require them, not by the container.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace reverb {

// Raised for malformed or truncated files (PGM, RF32, manifests, configs).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<double> data; // row-major, data[i * width + j]

    Raster() = default;
    Raster(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 0 || h < 0) throw std::invalid_argument("Raster: negative dimensions");
    }

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * width + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * width + j]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Raster& o) const { return width == o.width && height == o.height; }
    bool in_bounds(int i, int j) const { return i >= 0 && i < height && j >= 0 && j < width; }
};

// Per-pixel binary mask with the same (row, col) indexing as Raster.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // 0 or 1

    Mask() = default;
    Mask(int w, int h, bool fill = false)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {
        if (w < 0 || h < 0) throw std::invalid_argument("Mask: negative dimensions");
    }

    bool at(int i, int j) const { return data[static_cast<std::size_t>(i) * width + j] != 0; }
    void set(int i, int j, bool v) { data[static_cast<std::size_t>(i) * width + j] = v ? 1 : 0; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Mask& o) const { return width == o.width && height == o.height; }
    bool same_shape(const Raster& o) const { return width == o.width && height == o.height; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }
};

// Paired per-pixel mean and standard-deviation map for one class.
struct ProbMap {
    Raster mean;
    Raster std;
};

void require_same_shape(const Raster& a, const Raster& b, const std::string& context);
void require_same_shape(const Mask& a, const Raster& b, const std::string& context);
void require_same_shape(const Mask& a, const Mask& b, const std::string& context);

// Throws unless mean/std dimensions match and std is non-negative.
void validate_probmap(const ProbMap& m, const std::string& context);

// Throws unless every value lies in [0,1] (tolerance 0; exact bounds).
void require_unit_range(const Raster& r, const std::string& context);

Mask mask_from_raster(const Raster& r, double thresh);
Raster raster_from_mask(const Mask& m);

} // namespace reverb

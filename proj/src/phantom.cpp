#include "reverb/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "reverb/kv.hpp"
#include "reverb/raster_io.hpp"
#include "reverb/rng.hpp"

namespace reverb {

namespace {

namespace fs = std::filesystem;

std::vector<double> split_numbers(const std::string& key, const std::string& value,
                                  std::size_t expected) {
    std::istringstream in(value);
    std::vector<double> nums;
    double v;
    while (in >> v) nums.push_back(v);
    std::string rest;
    if (in.clear(), in >> rest)
        throw FormatError("phantom spec: bad value for " + key + ": '" + value + "'");
    if (nums.size() != expected)
        throw FormatError("phantom spec: " + key + " expects " + std::to_string(expected) +
                          " numbers, got " + std::to_string(nums.size()));
    return nums;
}

// Smoothed zero-mean noise field scaled to max amplitude 1.
Raster smooth_noise_field(int width, int height, int radius, SplitMix64& rng) {
    Raster field(width, height);
    for (auto& v : field.data) v = rng.uniform(-1.0, 1.0);
    for (int pass = 0; pass < 2 && radius > 0; ++pass) {
        Raster blurred(width, height);
        for (int i = 0; i < height; ++i) {
            for (int j = 0; j < width; ++j) {
                double sum = 0.0;
                int n = 0;
                for (int di = -radius; di <= radius; ++di) {
                    const int r = i + di;
                    if (r < 0 || r >= height) continue;
                    for (int dj = -radius; dj <= radius; ++dj) {
                        const int c = j + dj;
                        if (c < 0 || c >= width) continue;
                        sum += field.at(r, c);
                        ++n;
                    }
                }
                blurred.at(i, j) = sum / n;
            }
        }
        field = std::move(blurred);
    }
    double amp = 0.0;
    for (double v : field.data) amp = std::max(amp, std::abs(v));
    if (amp > 0.0)
        for (auto& v : field.data) v /= amp;
    return field;
}

void draw_line(Raster& target, int row, int col_start, int length, double value) {
    for (int j = col_start; j < col_start + length; ++j)
        target.at(row, j) = std::max(target.at(row, j), value);
}

void mark_box(Mask& mask, int r0, int r1, int c0, int c1) {
    r0 = std::max(r0, 0);
    c0 = std::max(c0, 0);
    r1 = std::min(r1, mask.height - 1);
    c1 = std::min(c1, mask.width - 1);
    for (int i = r0; i <= r1; ++i)
        for (int j = c0; j <= c1; ++j) mask.set(i, j, true);
}

} // namespace

void validate_spec(const PhantomSpec& spec) {
    auto fail = [](const std::string& msg) {
        throw std::invalid_argument("phantom spec: " + msg);
    };
    if (spec.width < 8 || spec.height < 8) fail("image size too small");
    if (!(spec.speckle.mean >= 0.0 && spec.speckle.mean <= 1.0)) fail("speckle mean outside [0,1]");
    if (!(spec.speckle.contrast >= 0.0 && spec.speckle.contrast < 1.0))
        fail("speckle contrast outside [0,1)");
    if (spec.speckle.smooth_radius < 0) fail("negative smooth radius");
    if (spec.noise_level < 0.0) fail("negative noise level");

    auto check_lines = [&](int row, int col_start, int length, double brightness, int spacing,
                           int count, const std::string& what) {
        if (row < 0 || row >= spec.height) fail(what + " row out of bounds");
        if (col_start < 0 || length < 1 || col_start + length > spec.width)
            fail(what + " column span out of bounds");
        if (!(brightness > 0.0 && brightness <= 1.0)) fail(what + " brightness outside (0,1]");
        if (spacing < 2) fail(what + " spacing must be >= 2");
        if (count < 1) fail(what + " count must be >= 1");
        if (row + count * spacing >= spec.height) fail(what + " lines extend past the image");
    };
    for (const auto& n : spec.needles)
        check_lines(n.row, n.col_start, n.length, n.brightness, n.reverb_spacing, n.reverb_count,
                    "needle");
    for (const auto& c : spec.clutter)
        check_lines(c.row, c.col_start, c.length, c.brightness, c.spacing, c.count, "clutter");
    for (const auto& v : spec.vessels) {
        if (v.row < 0 || v.row >= spec.height || v.col < 0 || v.col >= spec.width)
            fail("vessel center out of bounds");
        if (v.radius_v < 1 || v.radius_h < 1) fail("vessel radii must be >= 1");
        if (!(v.darkness >= 0.0 && v.darkness <= 1.0)) fail("vessel darkness outside [0,1]");
    }
}

SimulatedPhantom simulate(const PhantomSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    SplitMix64 rng(mix_seed(seed, 0x7068616e746f6dULL));

    const int w = spec.width, h = spec.height;
    SimulatedPhantom out;
    out.gt_needle = Raster(w, h, 0.0);
    out.gt_artifact = Raster(w, h, 0.0);

    // Tissue background with dark vessels.
    Raster structure(w, h, spec.speckle.mean);
    for (const auto& v : spec.vessels) {
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                const double di = static_cast<double>(i - v.row) / v.radius_v;
                const double dj = static_cast<double>(j - v.col) / v.radius_h;
                if (di * di + dj * dj <= 1.0) structure.at(i, j) *= 1.0 - v.darkness;
            }
        }
    }

    // Needles and their reverberation lines.
    for (const auto& n : spec.needles) {
        draw_line(structure, n.row, n.col_start, n.length, n.brightness);
        for (int j = n.col_start; j < n.col_start + n.length; ++j)
            out.gt_needle.at(n.row, j) = 1.0;
        for (int m = 1; m <= n.reverb_count; ++m) {
            const double level =
                n.brightness *
                std::exp(-n.decay_alpha * static_cast<double>(m * n.reverb_spacing) /
                         static_cast<double>(n.reverb_count * n.reverb_spacing));
            draw_line(structure, n.row + m * n.reverb_spacing, n.col_start, n.length, level);
            draw_line(out.gt_artifact, n.row + m * n.reverb_spacing, n.col_start, n.length, level);
        }
    }

    // Clutter: artifact-like lines with no causing needle.
    for (const auto& c : spec.clutter) {
        for (int m = 1; m <= c.count; ++m) {
            const double level = c.brightness * std::exp(-c.decay_alpha * static_cast<double>(m) /
                                                         static_cast<double>(c.count));
            draw_line(structure, c.row + m * c.spacing, c.col_start, c.length, level);
            draw_line(out.gt_artifact, c.row + m * c.spacing, c.col_start, c.length, level);
        }
    }

    // Multiplicative speckle plus additive noise.
    const Raster field = smooth_noise_field(w, h, spec.speckle.smooth_radius, rng);
    out.image = Raster(w, h);
    for (std::size_t i = 0; i < out.image.size(); ++i) {
        double v = structure.data[i] * (1.0 + spec.speckle.contrast * field.data[i]);
        if (spec.noise_level > 0.0) v += spec.noise_level * rng.gaussian();
        out.image.data[i] = std::min(1.0, std::max(0.0, v));
    }

    // Region labels from the needle geometry alone.
    RegionLabels& lab = out.labels;
    lab.possible_needle = Mask(w, h);
    lab.possible_artifact = Mask(w, h);
    lab.first_reverb = Mask(w, h);
    lab.second_reverb = Mask(w, h);
    lab.non_artifact_gap = Mask(w, h);
    lab.needle_confident = Mask(w, h);
    lab.fuzzy_artifact = Mask(w, h);

    for (const auto& n : spec.needles) {
        const int c0 = n.col_start;
        const int c1 = n.col_start + n.length - 1;
        const int s = n.reverb_spacing;
        mark_box(lab.possible_needle, n.row - 2, n.row + 2, c0 - 2, c1 + 2);
        mark_box(lab.needle_confident, n.row, n.row, c0, c1);
        mark_box(lab.possible_artifact, n.row + s - 2, n.row + n.reverb_count * s + 2, c0 - 2,
                 c1 + 2);
        mark_box(lab.first_reverb, n.row + s, n.row + s, c0, c1);
        if (n.reverb_count >= 2)
            mark_box(lab.second_reverb, n.row + 2 * s, n.row + 2 * s, c0, c1);
        mark_box(lab.fuzzy_artifact, n.row + n.reverb_count * s, n.row + n.reverb_count * s, c0,
                 c1);
        for (int m = 1; m < n.reverb_count; ++m) {
            const int top = n.row + m * s;
            if (top + 2 <= top + s - 2)
                mark_box(lab.non_artifact_gap, top + 2, top + s - 2, c0, c1);
        }
    }
    // Lines of another needle may cross a gap region; carve them out so
    // the gap stays artifact-free by construction.
    for (const auto& n : spec.needles) {
        for (int m = 1; m <= n.reverb_count; ++m) {
            const int row = n.row + m * n.reverb_spacing;
            for (int dr = -1; dr <= 1; ++dr) {
                const int r = row + dr;
                if (r < 0 || r >= h) continue;
                for (int j = n.col_start; j < n.col_start + n.length; ++j)
                    lab.non_artifact_gap.set(r, j, false);
            }
        }
    }
    validate_labels(lab);
    return out;
}

Overlabel make_overlabel(const Raster& gt_artifact, const Raster& gt_needle,
                         int dilation, bool infill) {
    require_same_shape(gt_artifact, gt_needle, "make_overlabel");
    if (dilation < 0) throw std::invalid_argument("make_overlabel: negative dilation");

    const int w = gt_artifact.width, h = gt_artifact.height;
    Mask artifact = mask_from_raster(gt_artifact, 0.0);
    Mask needle = mask_from_raster(gt_needle, 0.5);

    if (infill) {
        for (int j = 0; j < w; ++j) {
            int first = -1, last = -1;
            for (int i = 0; i < h; ++i) {
                if (artifact.at(i, j)) {
                    if (first < 0) first = i;
                    last = i;
                }
            }
            for (int i = first; i >= 0 && i <= last; ++i) artifact.set(i, j, true);
        }
    }

    auto dilate = [&](const Mask& src) {
        if (dilation == 0) return src;
        Mask dst(w, h);
        const std::int64_t d_sq = static_cast<std::int64_t>(dilation) * dilation;
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                if (!src.at(i, j)) continue;
                for (int di = -dilation; di <= dilation; ++di) {
                    const int r = i + di;
                    if (r < 0 || r >= h) continue;
                    for (int dj = -dilation; dj <= dilation; ++dj) {
                        const int c = j + dj;
                        if (c < 0 || c >= w) continue;
                        if (static_cast<std::int64_t>(di) * di +
                                static_cast<std::int64_t>(dj) * dj <=
                            d_sq)
                            dst.set(r, c, true);
                    }
                }
            }
        }
        return dst;
    };

    Overlabel out;
    out.artifact_hard = raster_from_mask(dilate(artifact));
    out.needle_hard = raster_from_mask(dilate(needle));
    return out;
}

PhantomSpec read_phantom_spec(const std::string& path) {
    PhantomSpec spec;
    spec.needles.clear();
    for (const auto& [key, value] : read_kv_file(path)) {
        if (key == "width") spec.width = static_cast<int>(split_numbers(key, value, 1)[0]);
        else if (key == "height") spec.height = static_cast<int>(split_numbers(key, value, 1)[0]);
        else if (key == "speckle_mean") spec.speckle.mean = split_numbers(key, value, 1)[0];
        else if (key == "speckle_contrast") spec.speckle.contrast = split_numbers(key, value, 1)[0];
        else if (key == "speckle_smooth")
            spec.speckle.smooth_radius = static_cast<int>(split_numbers(key, value, 1)[0]);
        else if (key == "noise_level") spec.noise_level = split_numbers(key, value, 1)[0];
        else if (key == "needle") {
            const auto v = split_numbers(key, value, 7);
            spec.needles.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]),
                                    static_cast<int>(v[2]), v[3], static_cast<int>(v[4]),
                                    static_cast<int>(v[5]), v[6]});
        } else if (key == "clutter") {
            const auto v = split_numbers(key, value, 7);
            spec.clutter.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]),
                                    static_cast<int>(v[2]), v[3], static_cast<int>(v[4]),
                                    static_cast<int>(v[5]), v[6]});
        } else if (key == "vessel") {
            const auto v = split_numbers(key, value, 5);
            spec.vessels.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]),
                                    static_cast<int>(v[2]), static_cast<int>(v[3]), v[4]});
        } else {
            throw FormatError(path + ": unknown phantom spec key '" + key + "'");
        }
    }
    validate_spec(spec);
    return spec;
}

void write_phantom_spec(const PhantomSpec& spec, const std::string& path) {
    std::ostringstream fmt;
    fmt.precision(17);
    auto num = [&fmt](double v) {
        fmt.str("");
        fmt << v;
        return fmt.str();
    };
    KvEntries entries = {
        {"width", std::to_string(spec.width)},
        {"height", std::to_string(spec.height)},
        {"speckle_mean", num(spec.speckle.mean)},
        {"speckle_contrast", num(spec.speckle.contrast)},
        {"speckle_smooth", std::to_string(spec.speckle.smooth_radius)},
        {"noise_level", num(spec.noise_level)},
    };
    for (const auto& n : spec.needles) {
        entries.emplace_back("needle", std::to_string(n.row) + " " + std::to_string(n.col_start) +
                                           " " + std::to_string(n.length) + " " +
                                           num(n.brightness) + " " +
                                           std::to_string(n.reverb_spacing) + " " +
                                           std::to_string(n.reverb_count) + " " +
                                           num(n.decay_alpha));
    }
    for (const auto& c : spec.clutter) {
        entries.emplace_back("clutter", std::to_string(c.row) + " " + std::to_string(c.col_start) +
                                            " " + std::to_string(c.length) + " " +
                                            num(c.brightness) + " " + std::to_string(c.spacing) +
                                            " " + std::to_string(c.count) + " " +
                                            num(c.decay_alpha));
    }
    for (const auto& v : spec.vessels) {
        entries.emplace_back("vessel", std::to_string(v.row) + " " + std::to_string(v.col) + " " +
                                           std::to_string(v.radius_v) + " " +
                                           std::to_string(v.radius_h) + " " + num(v.darkness));
    }
    write_kv_file(entries, path);
}

std::vector<std::string> write_phantom_batch(const PhantomSpec& spec, std::uint64_t base_seed,
                                             int n, const std::string& dir) {
    if (n < 1) throw std::invalid_argument("write_phantom_batch: n must be >= 1");
    fs::create_directories(dir);
    std::vector<std::string> names;
    KvEntries manifest;
    for (int k = 0; k < n; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "sample_%03d", k);
        const fs::path sample_dir = fs::path(dir) / name;
        fs::create_directories(sample_dir);
        const SimulatedPhantom ph = simulate(spec, base_seed + static_cast<std::uint64_t>(k));
        write_raster_u8(ph.image, (sample_dir / "image.pgm").string());
        write_raster_f32(ph.gt_artifact, (sample_dir / "gt_artifact.rf32").string());
        write_raster_f32(ph.gt_needle, (sample_dir / "gt_needle.rf32").string());
        write_labels_dir(ph.labels, (sample_dir / "labels").string());
        names.emplace_back(name);
        manifest.emplace_back("sample", name);
    }
    write_kv_file(manifest, (fs::path(dir) / "manifest.txt").string());
    return names;
}

} // namespace reverb

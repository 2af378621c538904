#include "reverb/raster.hpp"

namespace reverb {

void require_same_shape(const Raster& a, const Raster& b, const std::string& context) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(context + ": dimension mismatch (" +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                                    " vs " + std::to_string(b.width) + "x" +
                                    std::to_string(b.height) + ")");
    }
}

void require_same_shape(const Mask& a, const Raster& b, const std::string& context) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(context + ": dimension mismatch (" +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                                    " vs " + std::to_string(b.width) + "x" +
                                    std::to_string(b.height) + ")");
    }
}

void require_same_shape(const Mask& a, const Mask& b, const std::string& context) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(context + ": dimension mismatch (" +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                                    " vs " + std::to_string(b.width) + "x" +
                                    std::to_string(b.height) + ")");
    }
}

void validate_probmap(const ProbMap& m, const std::string& context) {
    require_same_shape(m.mean, m.std, context);
    for (double v : m.std.data) {
        if (!(v >= 0.0)) throw std::invalid_argument(context + ": negative std value");
    }
}

void require_unit_range(const Raster& r, const std::string& context) {
    for (double v : r.data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument(context + ": value " + std::to_string(v) +
                                        " outside [0,1]");
        }
    }
}

Mask mask_from_raster(const Raster& r, double thresh) {
    Mask m(r.width, r.height);
    for (std::size_t i = 0; i < r.data.size(); ++i) m.data[i] = r.data[i] > thresh ? 1 : 0;
    return m;
}

Raster raster_from_mask(const Mask& m) {
    Raster r(m.width, m.height);
    for (std::size_t i = 0; i < m.data.size(); ++i) r.data[i] = m.data[i] ? 1.0 : 0.0;
    return r;
}

} // namespace reverb

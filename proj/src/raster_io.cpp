#include "reverb/raster_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace reverb {

namespace {

constexpr std::int64_t kMaxDim = 1 << 20;

void check_dims(std::int64_t w, std::int64_t h, const std::string& path) {
    if (w < 1 || h < 1 || w > kMaxDim || h > kMaxDim) {
        throw FormatError(path + ": implausible dimensions " + std::to_string(w) + "x" +
                          std::to_string(h));
    }
}

// PNM token: skips whitespace and '#' comments.
std::string next_pnm_token(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        } else {
            c = in.get();
        }
    }
    if (c == EOF) throw FormatError(path + ": truncated PGM header");
    std::string token;
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return token;
}

std::int64_t parse_pnm_int(std::istream& in, const std::string& path) {
    const std::string token = next_pnm_token(in, path);
    std::int64_t v = 0;
    for (char ch : token) {
        if (ch < '0' || ch > '9') throw FormatError(path + ": bad PGM header token '" + token + "'");
        v = v * 10 + (ch - '0');
        if (v > std::numeric_limits<std::int32_t>::max())
            throw FormatError(path + ": PGM header value overflow");
    }
    return v;
}

std::uint32_t float_to_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    return u;
}

float bits_to_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, sizeof f);
    return f;
}

} // namespace

Raster read_raster_u8(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw FormatError(path + ": not a binary PGM (expected magic P5)");

    const std::int64_t w = parse_pnm_int(in, path);
    const std::int64_t h = parse_pnm_int(in, path);
    const std::int64_t maxval = parse_pnm_int(in, path);
    check_dims(w, h, path);
    if (maxval != 255) throw FormatError(path + ": unsupported maxval " + std::to_string(maxval));
    // The header parser consumed the single whitespace after maxval.

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w * h));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw FormatError(path + ": truncated PGM payload");

    Raster r(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < bytes.size(); ++i) r.data[i] = bytes[i] / 255.0;
    return r;
}

void write_raster_u8(const Raster& map, const std::string& path) {
    if (map.width < 1 || map.height < 1) throw std::invalid_argument("write_raster_u8: empty raster");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
    std::vector<std::uint8_t> bytes(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double v = map.data[i];
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
            throw std::invalid_argument("write_raster_u8: value " + std::to_string(v) +
                                        " outside [0,1]");
        const long q = std::lround(std::min(1.0, std::max(0.0, v)) * 255.0);
        bytes[i] = static_cast<std::uint8_t>(q);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + path);
}

Raster read_raster_f32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);

    std::string header;
    if (!std::getline(in, header)) throw FormatError(path + ": missing RF32 header");
    std::istringstream hs(header);
    std::string magic;
    std::int64_t w = 0, h = 0;
    hs >> magic >> w >> h;
    if (!hs || magic != "RF32") throw FormatError(path + ": bad RF32 header '" + header + "'");
    std::string extra;
    if (hs >> extra) throw FormatError(path + ": trailing header content '" + extra + "'");
    check_dims(w, h, path);

    const std::size_t n = static_cast<std::size_t>(w * h);
    std::vector<std::uint8_t> payload(n * 4);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size()))
        throw FormatError(path + ": truncated RF32 payload");
    if (in.peek() != EOF) throw FormatError(path + ": trailing bytes after RF32 payload");

    Raster r(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(payload[4 * i]) |
                                (static_cast<std::uint32_t>(payload[4 * i + 1]) << 8) |
                                (static_cast<std::uint32_t>(payload[4 * i + 2]) << 16) |
                                (static_cast<std::uint32_t>(payload[4 * i + 3]) << 24);
        r.data[i] = static_cast<double>(bits_to_float(u));
    }
    return r;
}

void write_raster_f32(const Raster& map, const std::string& path) {
    if (map.width < 1 || map.height < 1) throw std::invalid_argument("write_raster_f32: empty raster");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    out << "RF32 " << map.width << ' ' << map.height << '\n';
    std::vector<std::uint8_t> payload(map.size() * 4);
    for (std::size_t i = 0; i < map.size(); ++i) {
        const std::uint32_t u = float_to_bits(static_cast<float>(map.data[i]));
        payload[4 * i] = static_cast<std::uint8_t>(u & 0xff);
        payload[4 * i + 1] = static_cast<std::uint8_t>((u >> 8) & 0xff);
        payload[4 * i + 2] = static_cast<std::uint8_t>((u >> 16) & 0xff);
        payload[4 * i + 3] = static_cast<std::uint8_t>((u >> 24) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) throw FormatError("write failed for " + path);
}

Mask read_mask_pgm(const std::string& path) {
    const Raster r = read_raster_u8(path);
    Mask m(r.width, r.height);
    for (std::size_t i = 0; i < r.data.size(); ++i) m.data[i] = r.data[i] > 127.0 / 255.0 ? 1 : 0;
    return m;
}

void write_mask_pgm(const Mask& mask, const std::string& path) {
    write_raster_u8(raster_from_mask(mask), path);
}

} // namespace reverb

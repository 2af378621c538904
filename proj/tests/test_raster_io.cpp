#include <doctest.h>

#include <fstream>

#include "oracles.hpp"
#include "reverb/raster_io.hpp"

using namespace reverb;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_SUITE("raster_io") {

TEST_CASE("pgm endpoints map to 0 and 1") {
    oracle::TempDir tmp("pgm");
    write_bytes(tmp.file("a.pgm"), {'P', '5', '\n', '2', ' ', '1', '\n', '2', '5', '5', '\n', 0, 255});
    const Raster r = read_raster_u8(tmp.file("a.pgm"));
    CHECK(r.width == 2);
    CHECK(r.height == 1);
    CHECK(r.data[0] == 0.0);
    CHECK(r.data[1] == 1.0);
}

TEST_CASE("pgm single byte 51 reads as 51/255") {
    oracle::TempDir tmp("pgm");
    write_bytes(tmp.file("b.pgm"), {'P', '5', '\n', '1', ' ', '1', '\n', '2', '5', '5', '\n', 51});
    const Raster r = read_raster_u8(tmp.file("b.pgm"));
    CHECK(r.data[0] == 51.0 / 255.0); // 0.2
    CHECK(r.data[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("pgm rejects wrong magic") {
    oracle::TempDir tmp("pgm");
    write_bytes(tmp.file("c.pgm"), {'P', '2', '\n', '1', ' ', '1', '\n', '2', '5', '5', '\n', 51});
    CHECK_THROWS_AS(read_raster_u8(tmp.file("c.pgm")), FormatError);
}

TEST_CASE("pgm rejects maxval other than 255") {
    oracle::TempDir tmp("pgm");
    write_bytes(tmp.file("d.pgm"), {'P', '5', '\n', '1', ' ', '1', '\n', '1', '2', '7', '\n', 51});
    CHECK_THROWS_AS(read_raster_u8(tmp.file("d.pgm")), FormatError);
}

TEST_CASE("pgm rejects truncated payload") {
    oracle::TempDir tmp("pgm");
    write_bytes(tmp.file("e.pgm"), {'P', '5', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n', 1, 2, 3});
    CHECK_THROWS_AS(read_raster_u8(tmp.file("e.pgm")), FormatError);
}

TEST_CASE("pgm comments in the header are skipped") {
    oracle::TempDir tmp("pgm");
    std::vector<unsigned char> bytes;
    for (char c : std::string("P5\n# a comment\n1 1\n255\n")) bytes.push_back(c);
    bytes.push_back(128);
    write_bytes(tmp.file("f.pgm"), bytes);
    CHECK(read_raster_u8(tmp.file("f.pgm")).data[0] == 128.0 / 255.0);
}

TEST_CASE("pgm round trip is exact on quantized values") {
    oracle::TempDir tmp("pgm");
    SplitMix64 rng(11);
    for (int n = 0; n < 20; ++n) {
        const int w = rng.uniform_int(1, 40), h = rng.uniform_int(1, 40);
        Raster r(w, h);
        for (auto& v : r.data) v = rng.uniform_int(0, 255) / 255.0;
        write_raster_u8(r, tmp.file("rt.pgm"));
        const Raster back = read_raster_u8(tmp.file("rt.pgm"));
        REQUIRE(back.same_shape(r));
        CHECK(back.data == r.data);
    }
}

TEST_CASE("pgm write rejects out-of-range values") {
    oracle::TempDir tmp("pgm");
    Raster r(1, 1, 1.5);
    CHECK_THROWS_AS(write_raster_u8(r, tmp.file("bad.pgm")), std::invalid_argument);
}

TEST_CASE("rf32 1x1 file layout is the 9-byte header plus 4 payload bytes") {
    oracle::TempDir tmp("rf32");
    Raster r(1, 1, static_cast<double>(static_cast<float>(0.449329)));
    write_raster_f32(r, tmp.file("one.rf32"));
    const auto bytes = read_bytes(tmp.file("one.rf32"));
    REQUIRE(bytes.size() == 13); // "RF32 1 1\n" + one float
    CHECK(std::string(bytes.begin(), bytes.begin() + 9) == "RF32 1 1\n");
    const Raster back = read_raster_f32(tmp.file("one.rf32"));
    CHECK(back.data[0] == r.data[0]);
}

TEST_CASE("rf32 round trip is bit-exact on float-valued rasters") {
    oracle::TempDir tmp("rf32");
    SplitMix64 rng(12);
    for (int n = 0; n < 20; ++n) {
        const Raster r =
            oracle::random_raster_f32(rng, rng.uniform_int(1, 48), rng.uniform_int(1, 48));
        write_raster_f32(r, tmp.file("rt.rf32"));
        const Raster back = read_raster_f32(tmp.file("rt.rf32"));
        REQUIRE(back.same_shape(r));
        CHECK(back.data == r.data);
        // Re-writing the read raster reproduces the file bytes.
        write_raster_f32(back, tmp.file("rt2.rf32"));
        CHECK(read_bytes(tmp.file("rt.rf32")) == read_bytes(tmp.file("rt2.rf32")));
    }
}

TEST_CASE("rf32 rejects truncated payload") {
    oracle::TempDir tmp("rf32");
    std::vector<unsigned char> bytes;
    for (char c : std::string("RF32 2 2\n")) bytes.push_back(c);
    for (int i = 0; i < 12; ++i) bytes.push_back(0); // 3 floats instead of 4
    write_bytes(tmp.file("trunc.rf32"), bytes);
    CHECK_THROWS_AS(read_raster_f32(tmp.file("trunc.rf32")), FormatError);
}

TEST_CASE("rf32 rejects trailing bytes and bad headers") {
    oracle::TempDir tmp("rf32");
    std::vector<unsigned char> bytes;
    for (char c : std::string("RF32 1 1\n")) bytes.push_back(c);
    for (int i = 0; i < 8; ++i) bytes.push_back(0); // 2 floats instead of 1
    write_bytes(tmp.file("extra.rf32"), bytes);
    CHECK_THROWS_AS(read_raster_f32(tmp.file("extra.rf32")), FormatError);

    write_bytes(tmp.file("hdr.rf32"), {'R', 'F', '6', '4', ' ', '1', ' ', '1', '\n', 0, 0, 0, 0});
    CHECK_THROWS_AS(read_raster_f32(tmp.file("hdr.rf32")), FormatError);
}

TEST_CASE("missing files name the path in the error") {
    try {
        read_raster_u8("/nonexistent/nope.pgm");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/nope.pgm") != std::string::npos);
    }
}

TEST_CASE("mask pgm round trip") {
    oracle::TempDir tmp("mask");
    SplitMix64 rng(13);
    Mask m(17, 9);
    for (auto& v : m.data) v = rng.uniform01() < 0.3 ? 1 : 0;
    write_mask_pgm(m, tmp.file("m.pgm"));
    const Mask back = read_mask_pgm(tmp.file("m.pgm"));
    CHECK(back.data == m.data);
}

} // TEST_SUITE

#pragma once
// Raster file codecs.
//
// PGM: binary 8-bit grayscale ("P5", maxval 255). Values map v/255 into
// [0,1] on read and round(v*255) on write.
//
// RF32: ASCII header line "RF32 <width> <height>\n" followed by
// width*height little-endian 32-bit floats, row-major. Values are stored
// at 32-bit precision; write-then-read is exact whenever the raster
// values are representable as floats.

#include <string>

#include "reverb/raster.hpp"

namespace reverb {

Raster read_raster_u8(const std::string& path);
void write_raster_u8(const Raster& map, const std::string& path);

Raster read_raster_f32(const std::string& path);
void write_raster_f32(const Raster& map, const std::string& path);

Mask read_mask_pgm(const std::string& path);   // pixel true iff byte > 127
void write_mask_pgm(const Mask& mask, const std::string& path);

} // namespace reverb

#pragma once

#include <string>

#include "drivesal/tensor.hpp"

namespace drivesal {

// Binary PGM (P5, maxval 255). Values scale to [0,1] by /255; the writer
// clamps to [0,1] and rounds to the nearest 1/255 step, so write -> read is
// lossless for values already on that grid.
Tensor load_gray_map(const std::string& path);                     // [H,W,1]
void write_gray_map(const Tensor& map, const std::string& path);   // expects [H,W,1]

// Same file format; any value > 0 loads as 1.
Tensor load_fixation_map(const std::string& path);                 // [H,W,1]

// Binary PPM (P6, maxval 255), interleaved RGB.
Tensor load_rgb_image(const std::string& path);                    // [H,W,3]
void write_rgb_image(const Tensor& image, const std::string& path);

}  // namespace drivesal

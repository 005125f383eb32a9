#pragma once

#include <string>
#include <vector>

#include "emoscreen/tensor.hpp"

namespace emoscreen {

// Binary portable pixmaps: PGM (P5, 1 channel) and PPM (P6, 3 channels),
// 8-bit samples only. Values land in [0, 255] as floats.
Tensor load_pnm(const std::string& path);
void save_pgm(const Tensor& gray, const std::string& path);
void save_ppm(const Tensor& rgb, const std::string& path);

// All P5/P6 files in a directory, in lexicographic filename order.
// Every frame must share the first frame's dimensions.
std::vector<Tensor> load_frames(const std::string& dir);
std::vector<std::string> list_frame_files(const std::string& dir);

// Luminance conversion (Rec.601 weights); 1-channel input passes through.
Tensor to_gray(const Tensor& image);

}  // namespace emoscreen

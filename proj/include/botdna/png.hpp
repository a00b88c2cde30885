#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "botdna/imagify.hpp"

namespace botdna {

// 8-bit PNG: grayscale for 1-channel images, RGB (no alpha) for 3-channel.
// Output bytes are a pure function of the pixels.
std::string encode_png(const DnaImage& img);

// Decodes non-interlaced 8-bit grayscale or RGB PNGs back into planar form.
DnaImage decode_png(std::string_view bytes);

void write_binary_file(const std::filesystem::path& path,
                       std::string_view bytes);
std::string read_binary_file(const std::filesystem::path& path);

}  // namespace botdna

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "botdna/tensor.hpp"

namespace botdna {

// Binary tensor container shared by checkpoints and precomputed features.
//
//   magic      "BWTS1" (5 bytes)
//   count      u32
//   names      count x (u32 byte length, UTF-8 bytes)
//   shapes     count x (u32 rank, rank x u64 dims)
//   payload    f64 values of every tensor in entry order
//
// All integers and floats are little-endian.
using NamedTensor = std::pair<std::string, Tensor>;

std::string encode_tensors(const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> decode_tensors(std::string_view bytes);

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

std::vector<NamedTensor> snapshot(const ParameterSet& params);
// Names and shapes must match one to one.
void restore(ParameterSet& params, const std::vector<NamedTensor>& entries);

}  // namespace botdna

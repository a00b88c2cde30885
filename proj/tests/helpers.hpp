#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "botdna/rng.hpp"
#include "botdna/tensor.hpp"

namespace testing {

inline botdna::Tensor random_tensor(botdna::Shape shape, botdna::Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
  botdna::Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("botdna_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing

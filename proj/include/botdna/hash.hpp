#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace botdna {

// FNV-1a 64-bit; `basis` lets callers derive seeded variants.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

// 16 lowercase hex digits.
std::string hex16(std::uint64_t value);

}  // namespace botdna

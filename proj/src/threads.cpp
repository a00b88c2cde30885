#include "botdna/threads.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

#include "botdna/error.hpp"

namespace botdna {

int configure_threads_from_env() {
  const char* raw = std::getenv("BOTDNA_THREADS");
  if (raw != nullptr && *raw != '\0') {
    const std::string text(raw);
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || value < 1 || value > 4096) {
      throw Error("BOTDNA_THREADS must be a positive integer, got '" + text + "'");
    }
    omp_set_num_threads(static_cast<int>(value));
  }
  omp_set_max_active_levels(1);
  return omp_get_max_threads();
}

}  // namespace botdna

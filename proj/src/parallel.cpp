#include "sharpext/parallel.hpp"

#include <cstdlib>
#include <string>

namespace sharpext {

int thread_count() {
  if (const char* env = std::getenv("SHARPEXT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace sharpext

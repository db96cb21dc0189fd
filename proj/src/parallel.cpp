#include "qswitch/parallel.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qswitch {

int default_thread_count() {
  if (const char* env = std::getenv("QSWITCH_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace qswitch

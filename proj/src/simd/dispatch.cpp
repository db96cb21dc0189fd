#include <atomic>
#include <cstdlib>
#include <cstring>

#include "qswitch/simd/kernels.hpp"

namespace qswitch::simd {

#if defined(QSWITCH_HAVE_AVX2)
const Kernels* avx2_kernels_impl();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(QSWITCH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels* default_kernels() {
  const char* env = std::getenv("QSWITCH_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) {
    return &scalar_kernels();
  }
  if (const Kernels* k = avx2_kernels()) return k;
  return &scalar_kernels();
}

std::atomic<const Kernels*>& active_slot() {
  static std::atomic<const Kernels*> slot{default_kernels()};
  return slot;
}

}  // namespace

const Kernels* avx2_kernels() {
#if defined(QSWITCH_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2_kernels_impl();
#endif
  return nullptr;
}

const Kernels& active_kernels() { return *active_slot().load(); }

bool select_kernels(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    active_slot().store(&scalar_kernels());
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    if (const Kernels* k = avx2_kernels()) {
      active_slot().store(k);
      return true;
    }
  }
  return false;
}

}  // namespace qswitch::simd

#include "osnr/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace osnr::kernels {

const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return avx2_ops_impl();
  }
#endif
  return nullptr;
}

namespace {

const Ops* pick_default() {
  if (const char* env = std::getenv("OSNR_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2_ops()) return avx2_ops();
  }
  if (const Ops* v = avx2_ops()) return v;
  return &scalar_ops();
}

const Ops*& active_slot() {
  static const Ops* current = pick_default();
  return current;
}

}  // namespace

const Ops& active() { return *active_slot(); }

bool set_active(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    active_slot() = &scalar_ops();
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    if (const Ops* v = avx2_ops()) {
      active_slot() = v;
      return true;
    }
    return false;
  }
  return false;
}

}  // namespace osnr::kernels

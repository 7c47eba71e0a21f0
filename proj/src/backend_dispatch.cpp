#include <atomic>

#include "usf/backend.hpp"
#include "usf/errors.hpp"

namespace usf::backend {

#ifdef USF_HAVE_AVX2_BACKEND
namespace detail {
const Ops* avx2_table_ptr();
}

const Ops* avx2_ops() {
  static const Ops* ptr = []() -> const Ops* {
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
      return detail::avx2_table_ptr();
    return nullptr;
  }();
  return ptr;
}
#else
const Ops* avx2_ops() { return nullptr; }
#endif

namespace {
std::atomic<Kind> g_kind{Kind::auto_detect};
}

void select(Kind k) {
  if (k == Kind::avx2 && avx2_ops() == nullptr)
    throw ConfigError("simd backend 'avx2' not available on this machine",
                      "simd.backend");
  g_kind.store(k);
}

Kind selected() { return g_kind.load(); }

const Ops& active() {
  switch (g_kind.load()) {
    case Kind::scalar:
      return scalar_ops();
    case Kind::avx2:
      return *avx2_ops();
    case Kind::auto_detect:
    default:
      return avx2_ops() != nullptr ? *avx2_ops() : scalar_ops();
  }
}

Kind parse_kind(const std::string& name) {
  if (name == "auto") return Kind::auto_detect;
  if (name == "scalar") return Kind::scalar;
  if (name == "avx2") return Kind::avx2;
  throw ConfigError("unknown simd backend '" + name +
                        "' (expected auto|scalar|avx2)",
                    "simd.backend");
}

std::vector<std::string> available_names() {
  std::vector<std::string> names = {"scalar"};
  if (avx2_ops() != nullptr) names.emplace_back("avx2");
  return names;
}

}  // namespace usf::backend

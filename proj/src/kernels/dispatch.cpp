#include <atomic>

#include "simulmt/kernels.hpp"

namespace simulmt::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(SIMULMT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      return "avx2";
    case Isa::kScalar:
      break;
  }
  return "scalar";
}

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
  return isa;
}

void force_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !cpu_has_avx2()) isa = Isa::kScalar;
  current().store(isa, std::memory_order_relaxed);
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

std::int64_t anticipation_sum(std::span<const Link> links) {
#if defined(SIMULMT_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return anticipation_sum_avx2(links);
#endif
  return anticipation_sum_scalar(links);
}

std::int64_t anticipation_count(std::span<const Link> links) {
#if defined(SIMULMT_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return anticipation_count_avx2(links);
#endif
  return anticipation_count_scalar(links);
}

}  // namespace simulmt::kernels

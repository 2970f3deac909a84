// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "simulmt/kernels.hpp"

namespace simulmt::kernels {

namespace {

// Four links per 256-bit register: lanes [s0 t0 s1 t1 s2 t2 s3 t3].
// Indices are non-negative, so s - t never overflows int32 and the masked
// even lanes read back as exact non-negative int64 values.
constexpr int kOddLanes = 0b10101010;

}  // namespace

std::int64_t anticipation_sum_avx2(std::span<const Link> links) {
  const auto* p = reinterpret_cast<const std::int32_t*>(links.data());
  const std::size_t blocks = links.size() / 4;
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  for (std::size_t b = 0; b < blocks; ++b) {
    const __m256i v =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + 8 * b));
    const __m256i swapped = _mm256_shuffle_epi32(v, 0xB1);
    const __m256i diff = _mm256_max_epi32(_mm256_sub_epi32(v, swapped), zero);
    acc = _mm256_add_epi64(acc, _mm256_blend_epi32(diff, zero, kOddLanes));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::int64_t sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  return sum + anticipation_sum_scalar(links.subspan(blocks * 4));
}

std::int64_t anticipation_count_avx2(std::span<const Link> links) {
  const auto* p = reinterpret_cast<const std::int32_t*>(links.data());
  const std::size_t blocks = links.size() / 4;
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  for (std::size_t b = 0; b < blocks; ++b) {
    const __m256i v =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + 8 * b));
    const __m256i swapped = _mm256_shuffle_epi32(v, 0xB1);
    const __m256i ones = _mm256_srli_epi32(_mm256_cmpgt_epi32(v, swapped), 31);
    acc = _mm256_add_epi64(acc, _mm256_blend_epi32(ones, zero, kOddLanes));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::int64_t n = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  return n + anticipation_count_scalar(links.subspan(blocks * 4));
}

}  // namespace simulmt::kernels

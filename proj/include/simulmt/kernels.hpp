#pragma once

// Reduction kernels behind the anticipation metric. Each kernel has a
// scalar reference and, where the target supports it, a vector variant;
// `anticipation_sum` picks the best variant once at first use.

#include <cstdint>
#include <span>
#include <string_view>

namespace simulmt {

/// One alignment link: source word `source` aligned to target word `target`.
/// Layout is fixed (two packed int32) because the vector kernels load links
/// directly as interleaved lanes.
struct Link {
  std::int32_t source;
  std::int32_t target;

  friend auto operator<=>(const Link&, const Link&) = default;
};
static_assert(sizeof(Link) == 2 * sizeof(std::int32_t));

namespace kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

/// Best instruction set supported by the running CPU and compiled in.
Isa detected_isa();

/// Sum over links of max(source - target, 0).
std::int64_t anticipation_sum_scalar(std::span<const Link> links);
/// Number of links with source > target.
std::int64_t anticipation_count_scalar(std::span<const Link> links);

#if defined(SIMULMT_HAVE_AVX2)
std::int64_t anticipation_sum_avx2(std::span<const Link> links);
std::int64_t anticipation_count_avx2(std::span<const Link> links);
#endif

/// Dispatching entry points.
std::int64_t anticipation_sum(std::span<const Link> links);
std::int64_t anticipation_count(std::span<const Link> links);

/// Forces a variant for the dispatching entry points (tests, benchmarks).
/// Requesting an ISA the CPU lacks falls back to scalar.
void force_isa(Isa isa);
Isa active_isa();

}  // namespace kernels
}  // namespace simulmt

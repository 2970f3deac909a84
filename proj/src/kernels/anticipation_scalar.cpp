#include "simulmt/kernels.hpp"

namespace simulmt::kernels {

std::int64_t anticipation_sum_scalar(std::span<const Link> links) {
  std::int64_t sum = 0;
  for (const auto& l : links) {
    const std::int64_t d = std::int64_t{l.source} - l.target;
    if (d > 0) sum += d;
  }
  return sum;
}

std::int64_t anticipation_count_scalar(std::span<const Link> links) {
  std::int64_t n = 0;
  for (const auto& l : links) n += l.source > l.target ? 1 : 0;
  return n;
}

}  // namespace simulmt::kernels

#include "simulmt/monotonicity.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <string>

#include "simulmt/errors.hpp"

namespace simulmt {

namespace {

constexpr auto kMaxIndex =
    static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max());

std::int32_t parse_index(std::string_view field, std::string_view whole) {
  std::int64_t value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && field.front() == '-') {
    throw InvalidArgument("negative index in link '" + std::string(whole) + "'");
  }
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw InvalidArgument("malformed link '" + std::string(whole) +
                          "'; expected i-j");
  }
  if (value < 0 || static_cast<std::size_t>(value) > kMaxIndex) {
    throw InvalidArgument("index out of range in link '" + std::string(whole) + "'");
  }
  return static_cast<std::int32_t>(value);
}

}  // namespace

Alignment::Alignment(std::vector<Link> links, std::size_t source_len,
                     std::size_t target_len)
    : links_(std::move(links)), source_len_(source_len), target_len_(target_len) {
  for (const auto& l : links_) {
    if (l.source < 0 || l.target < 0) {
      throw InvalidArgument("negative alignment index");
    }
    if (static_cast<std::size_t>(l.source) >= source_len_) {
      throw InvalidArgument("source index " + std::to_string(l.source) +
                            " out of bounds for source length " +
                            std::to_string(source_len_));
    }
    if (static_cast<std::size_t>(l.target) >= target_len_) {
      throw InvalidArgument("target index " + std::to_string(l.target) +
                            " out of bounds for target length " +
                            std::to_string(target_len_));
    }
  }
  std::sort(links_.begin(), links_.end());
  links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
}

Alignment parse_pharaoh(std::string_view line, std::size_t source_len,
                        std::size_t target_len) {
  std::vector<Link> links;
  std::size_t i = 0;
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
           c == '\f';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const auto start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i == start) break;
    const auto field = line.substr(start, i - start);
    // A leading '-' would be a negative source index; split on the last
    // dash that is not at position 0.
    const auto dash = field.find('-', 1);
    if (dash == std::string_view::npos) {
      if (!field.empty() && field.front() == '-') {
        throw InvalidArgument("negative index in link '" + std::string(field) + "'");
      }
      throw InvalidArgument("malformed link '" + std::string(field) +
                            "'; expected i-j");
    }
    links.push_back({parse_index(field.substr(0, dash), field),
                     parse_index(field.substr(dash + 1), field)});
  }
  return Alignment(std::move(links), source_len, target_len);
}

double average_anticipation(const Alignment& alignment) {
  if (alignment.empty()) throw EmptyAlignment();
  const auto sum = kernels::anticipation_sum(alignment.links());
  return static_cast<double>(sum) / static_cast<double>(alignment.size());
}

bool is_monotonic(const Alignment& alignment) {
  if (alignment.empty()) throw EmptyAlignment();
  return kernels::anticipation_count(alignment.links()) == 0;
}

}  // namespace simulmt

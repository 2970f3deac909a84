#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "simulmt/kernels.hpp"

namespace simulmt {

/// Set of source->target word links for one sentence pair, 0-indexed.
/// Links are kept sorted and unique; every index is within bounds.
class Alignment {
 public:
  Alignment(std::vector<Link> links, std::size_t source_len,
            std::size_t target_len);

  std::span<const Link> links() const { return links_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  std::size_t source_len() const { return source_len_; }
  std::size_t target_len() const { return target_len_; }

  friend bool operator==(const Alignment&, const Alignment&) = default;

 private:
  std::vector<Link> links_;
  std::size_t source_len_;
  std::size_t target_len_;
};

/// Parses a Pharaoh line ("0-0 1-2 ..."). Blank input yields no links.
/// Throws InvalidArgument on malformed fields or out-of-range indices.
Alignment parse_pharaoh(std::string_view line, std::size_t source_len,
                        std::size_t target_len);

/// Average anticipation: mean over links of max(i - j, 0).
/// Throws EmptyAlignment when there are no links.
double average_anticipation(const Alignment& alignment);

/// True iff no link points at a source word later than its target word.
/// Throws EmptyAlignment when there are no links.
bool is_monotonic(const Alignment& alignment);

}  // namespace simulmt

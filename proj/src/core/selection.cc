#include "nsearch/core/selection.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "nsearch/core/rng.h"

namespace nsearch {

SelectionMask::SelectionMask(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw std::invalid_argument("SelectionMask: entries must be 0 or 1");
  }
}

size_t SelectionMask::count() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), uint8_t{1}));
}

std::vector<int> SelectionMask::selected() const {
  std::vector<int> out;
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

SelectionMask decide_greedy(std::span<const double> probabilities) {
  SelectionMask mask(probabilities.size());
  for (size_t i = 0; i < probabilities.size(); ++i) mask.set(i, probabilities[i] > 0.5);
  return mask;
}

SelectionMask decide_sample(std::span<const double> probabilities, uint64_t seed) {
  Rng rng(seed);
  SelectionMask mask(probabilities.size());
  for (size_t i = 0; i < probabilities.size(); ++i) {
    mask.set(i, rng.bernoulli(probabilities[i]));
  }
  return mask;
}

namespace {

// Indices ordered by descending probability, ties by ascending index.
std::vector<int> rank_by_probability(std::span<const double> probabilities,
                                     const std::vector<int>& candidates) {
  std::vector<int> order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probabilities[static_cast<size_t>(a)] > probabilities[static_cast<size_t>(b)];
  });
  return order;
}

}  // namespace

SelectionMask fallback_topk(const SelectionMask& mask,
                            std::span<const double> probabilities, int k) {
  if (k < 1) throw std::invalid_argument("fallback_topk: k must be >= 1");
  if (mask.size() != probabilities.size()) {
    throw std::invalid_argument("fallback_topk: mask/probability length mismatch");
  }
  if (!mask.none()) return mask;
  std::vector<int> all(probabilities.size());
  std::iota(all.begin(), all.end(), 0);
  const std::vector<int> order = rank_by_probability(probabilities, all);
  SelectionMask out(mask.size());
  const size_t take = std::min(order.size(), static_cast<size_t>(k));
  for (size_t i = 0; i < take; ++i) out.set(static_cast<size_t>(order[i]), true);
  return out;
}

SelectionMask truncate_topk(const SelectionMask& mask,
                            std::span<const double> probabilities, int k) {
  if (mask.size() != probabilities.size()) {
    throw std::invalid_argument("truncate_topk: mask/probability length mismatch");
  }
  if (static_cast<int>(mask.count()) <= k) return mask;
  const std::vector<int> order = rank_by_probability(probabilities, mask.selected());
  SelectionMask out(mask.size());
  for (int i = 0; i < k; ++i) out.set(static_cast<size_t>(order[static_cast<size_t>(i)]), true);
  return out;
}

}  // namespace nsearch

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nsearch {

// Binary decision per item of an index set: 1 means the item is selected and
// may be changed by the subset transformation operator.
class SelectionMask {
 public:
  SelectionMask() = default;
  explicit SelectionMask(size_t size) : bits_(size, 0) {}
  explicit SelectionMask(std::vector<uint8_t> bits);

  size_t size() const { return bits_.size(); }
  bool operator[](size_t i) const { return bits_[i] != 0; }
  void set(size_t i, bool value) { bits_[i] = value ? 1 : 0; }

  size_t count() const;
  bool none() const { return count() == 0; }
  std::vector<int> selected() const;
  const std::vector<uint8_t>& bits() const { return bits_; }

  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;

 private:
  std::vector<uint8_t> bits_;
};

// Bit i is set iff probabilities[i] > 0.5 (a tie at 0.5 is not selected).
SelectionMask decide_greedy(std::span<const double> probabilities);

// Independent Bernoulli(probabilities[i]) draws from a stream seeded by `seed`.
SelectionMask decide_sample(std::span<const double> probabilities, uint64_t seed);

// Returns `mask` unchanged unless it is empty, in which case the k items with
// the highest probability are selected (ties by lowest index).
SelectionMask fallback_topk(const SelectionMask& mask,
                            std::span<const double> probabilities, int k);

// Keeps only the `k` highest-probability selected items (ties by lowest index).
SelectionMask truncate_topk(const SelectionMask& mask,
                            std::span<const double> probabilities, int k);

}  // namespace nsearch

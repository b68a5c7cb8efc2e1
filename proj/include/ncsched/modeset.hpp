#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ncsched {

/// The q-out-of-N scheduling modes in lexicographic order. Loops and modes
/// are 0-based: mode s serves the loops listed in subset(s).
///
/// Priorities follow the argmin convention: the q loops with the *lowest*
/// priority values are served.
class ModeSet {
 public:
  /// Largest supported loop count (membership is kept as a bitmask).
  static constexpr int kMaxLoops = 30;

  ModeSet(int loops, int capacity);

  int loops() const { return loops_; }
  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(masks_.size()); }

  std::span<const int> subset(int mode) const;
  std::uint32_t mask(int mode) const { return masks_.at(mode); }

  /// Membership indicator: true iff `loop` is served in `mode`.
  bool contains(int mode, int loop) const;

  /// Lexicographic rank of a sorted subset.
  int index_of(std::span<const int> sorted_subset) const;

 private:
  int loops_;
  int capacity_;
  std::vector<int> members_;  // size() * capacity_ entries
  std::vector<std::uint32_t> masks_;
};

ModeSet enumerate_modes(int loops, int capacity);

/// 0/1 membership indicator of loop i in mode s.
int delta(int loop, int mode, const ModeSet& modes);

/// argmin over modes of the summed priorities of the served loops; ties go to
/// the lowest mode index. Computed by partial selection of the q smallest
/// values with a stable tie-break on the loop index, which picks the same mode.
int select_mode(std::span<const double> priorities, const ModeSet& modes);

/// Reference argmin by enumerating every mode (test oracle, O(C(N,q) q)).
int select_mode_exhaustive(std::span<const double> priorities, const ModeSet& modes);

long long binomial(int n, int k);

}  // namespace ncsched

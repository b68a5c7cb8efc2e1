#include "ncsched/modeset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ncsched/errors.hpp"

namespace ncsched {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

ModeSet::ModeSet(int loops, int capacity) : loops_(loops), capacity_(capacity) {
  if (loops < 2 || loops > kMaxLoops) {
    throw InvalidArgument("ModeSet: loop count must be in [2, " + std::to_string(kMaxLoops) +
                          "], got " + std::to_string(loops));
  }
  if (capacity <= 0 || capacity >= loops) {
    throw InvalidArgument("ModeSet: need 0 < q < N, got q=" + std::to_string(capacity) +
                          " N=" + std::to_string(loops));
  }
  const long long count = binomial(loops, capacity);
  masks_.reserve(count);
  members_.reserve(count * capacity);

  std::vector<int> current(capacity);
  std::iota(current.begin(), current.end(), 0);
  for (;;) {
    std::uint32_t m = 0;
    for (int i : current) m |= std::uint32_t{1} << i;
    masks_.push_back(m);
    members_.insert(members_.end(), current.begin(), current.end());

    int pos = capacity - 1;
    while (pos >= 0 && current[pos] == loops - capacity + pos) --pos;
    if (pos < 0) break;
    ++current[pos];
    for (int j = pos + 1; j < capacity; ++j) current[j] = current[j - 1] + 1;
  }
}

std::span<const int> ModeSet::subset(int mode) const {
  if (mode < 0 || mode >= size()) throw InvalidArgument("ModeSet: mode index out of range");
  return {members_.data() + static_cast<std::size_t>(mode) * capacity_,
          static_cast<std::size_t>(capacity_)};
}

bool ModeSet::contains(int mode, int loop) const {
  if (mode < 0 || mode >= size()) throw InvalidArgument("ModeSet: mode index out of range");
  if (loop < 0 || loop >= loops_) throw InvalidArgument("ModeSet: loop index out of range");
  return (masks_[mode] >> loop) & 1u;
}

int ModeSet::index_of(std::span<const int> sorted_subset) const {
  if (static_cast<int>(sorted_subset.size()) != capacity_) {
    throw InvalidArgument("ModeSet::index_of: subset has wrong size");
  }
  // Lexicographic rank: count the subsets that precede it position by position.
  long long rank = 0;
  int previous = -1;
  for (int pos = 0; pos < capacity_; ++pos) {
    const int value = sorted_subset[pos];
    if (value <= previous || value >= loops_) {
      throw InvalidArgument("ModeSet::index_of: subset is not sorted or out of range");
    }
    for (int skipped = previous + 1; skipped < value; ++skipped) {
      rank += binomial(loops_ - skipped - 1, capacity_ - pos - 1);
    }
    previous = value;
  }
  return static_cast<int>(rank);
}

ModeSet enumerate_modes(int loops, int capacity) { return ModeSet(loops, capacity); }

int delta(int loop, int mode, const ModeSet& modes) { return modes.contains(mode, loop) ? 1 : 0; }

namespace {

void require_priorities(std::span<const double> v, const ModeSet& modes) {
  if (static_cast<int>(v.size()) != modes.loops()) {
    throw InvalidArgument("select_mode: expected one priority per loop");
  }
  for (double x : v) {
    if (std::isnan(x)) throw InvalidArgument("select_mode: NaN priority");
  }
}

}  // namespace

int select_mode(std::span<const double> priorities, const ModeSet& modes) {
  require_priorities(priorities, modes);
  std::vector<int> order(priorities.size());
  std::iota(order.begin(), order.end(), 0);
  const auto less = [&](int a, int b) {
    return priorities[a] < priorities[b] || (priorities[a] == priorities[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + modes.capacity(), order.end(), less);
  order.resize(modes.capacity());
  std::sort(order.begin(), order.end());
  return modes.index_of(order);
}

int select_mode_exhaustive(std::span<const double> priorities, const ModeSet& modes) {
  require_priorities(priorities, modes);
  int best = 0;
  double best_sum = 0;
  for (int s = 0; s < modes.size(); ++s) {
    double sum = 0;
    for (int i : modes.subset(s)) sum += priorities[i];
    if (s == 0 || sum < best_sum) {
      best = s;
      best_sum = sum;
    }
  }
  return best;
}

}  // namespace ncsched

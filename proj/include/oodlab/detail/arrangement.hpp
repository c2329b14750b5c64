#pragma once

#include <algorithm>
#include <vector>

namespace oodlab {

template <class Fn>
void for_each_arrangement_cell(const std::vector<const Rect*>& rects, Fn&& fn) {
  if (rects.empty()) return;
  const std::size_t d = rects.front()->dimension();
  std::vector<std::vector<double>> cuts(d);
  for (const Rect* r : rects) {
    for (std::size_t j = 0; j < d; ++j) {
      cuts[j].push_back(r->lo[j]);
      cuts[j].push_back(r->hi[j]);
    }
  }
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.size() < 2) return;
  }

  // Odometer over cell indices, first coordinate fastest.
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> centre(d);
  for (;;) {
    double volume = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double lo = cuts[j][idx[j]];
      const double hi = cuts[j][idx[j] + 1];
      centre[j] = 0.5 * (lo + hi);
      volume *= hi - lo;
    }
    fn(static_cast<const std::vector<double>&>(centre), volume);

    std::size_t j = 0;
    while (j < d) {
      if (++idx[j] + 1 < cuts[j].size()) break;
      idx[j] = 0;
      ++j;
    }
    if (j == d) return;
  }
}

}  // namespace oodlab

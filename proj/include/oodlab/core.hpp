#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oodlab {

using Point = std::vector<double>;

/// Labels are 1-based: 1..k are ID classes, k+1 is the single OOD class.
using Label = int;

// Error taxonomy. The CLI maps these onto exit codes.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class LabelSpace {
 public:
  explicit LabelSpace(int k) : k_(k) {
    if (k < 1) throw ArgumentError("label space needs k >= 1");
  }

  int k() const { return k_; }
  Label ood() const { return k_ + 1; }
  int size() const { return k_ + 1; }
  bool is_id(Label y) const { return y >= 1 && y <= k_; }
  bool contains(Label y) const { return y >= 1 && y <= k_ + 1; }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  int k_;
};

/// Seeded generator with a platform-independent real conversion, so sampled
/// streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Neumaier-compensated accumulator.
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

/// 101-point uniform grid on [0, 1] unless another count is given.
inline std::vector<double> uniform_alpha_grid(int points = 101) {
  if (points < 2) throw ArgumentError("alpha grid needs at least two points");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / (points - 1);
  return grid;
}

}  // namespace oodlab

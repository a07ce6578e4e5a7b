#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pdswitch/types.hpp"

namespace pdswitch {

// One point mass (s, w) of a discrete measure on [-r, 0].
struct WeightPoint {
  double s;
  double w;
};

/// Path history X_t = {X(t+s) : -r <= s <= 0} sampled on a uniform grid.
///
/// Stored as a ring buffer of r/dt + 1 samples; push() drops the oldest
/// sample and appends the newest in O(dim). Values between grid points are
/// linearly interpolated.
class Segment {
 public:
  /// Segment with every sample equal to phi0. Throws std::invalid_argument
  /// unless r > 0, dt > 0 and r/dt is an integer within 1e-9.
  static Segment constant(const Vector& phi0, double delay, double grid_step);

  /// Segment from explicit samples ordered oldest first.
  static Segment from_samples(const std::vector<Vector>& samples, double delay,
                              double grid_step);

  void push(const Vector& x);
  // Overwrites the newest sample in place.
  void set_newest(const Vector& x);

  Vector value_at(double s) const;
  double sup_norm() const;
  Vector integrate_against(std::span<const WeightPoint> weights) const;

  // k = 0 is the oldest sample, k = size() - 1 the newest.
  Eigen::Map<const Vector> sample(std::size_t k) const {
    return Eigen::Map<const Vector>(data_.data() + physical(k) * dim_, dim_);
  }
  Eigen::Map<const Vector> newest() const { return sample(count_ - 1); }
  Eigen::Map<const Vector> oldest() const { return sample(0); }

  std::vector<Vector> samples() const;

  double delay() const { return delay_; }
  double grid_step() const { return dt_; }
  std::size_t size() const { return count_; }
  int dim() const { return dim_; }

 private:
  Segment(int dim, std::size_t count, double delay, double dt);

  std::size_t physical(std::size_t k) const {
    std::size_t p = head_ + k;
    return p >= count_ ? p - count_ : p;
  }
  // Fractional grid position of s in [-r, 0]; throws when out of range.
  std::pair<std::size_t, double> locate(double s) const;

  int dim_;
  std::size_t count_;
  double delay_;
  double dt_;
  std::size_t head_ = 0;  // physical index of the oldest sample
  std::vector<double> data_;
};

// Number of grid intervals in [-r, 0]; throws when r/dt is not integral.
std::size_t grid_intervals(double delay, double grid_step);

}  // namespace pdswitch

#include "pdswitch/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pdswitch {

std::size_t grid_intervals(double delay, double grid_step) {
  if (!(delay > 0.0) || !(grid_step > 0.0)) {
    throw std::invalid_argument("segment: delay and grid step must be positive");
  }
  const double ratio = delay / grid_step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("segment: delay " + std::to_string(delay) +
                                " is not an integer multiple of grid step " +
                                std::to_string(grid_step));
  }
  return static_cast<std::size_t>(rounded);
}

Segment::Segment(int dim, std::size_t count, double delay, double dt)
    : dim_(dim), count_(count), delay_(delay), dt_(dt),
      data_(count * static_cast<std::size_t>(dim), 0.0) {}

Segment Segment::constant(const Vector& phi0, double delay, double grid_step) {
  if (phi0.size() == 0) throw std::invalid_argument("segment: empty state vector");
  const std::size_t count = grid_intervals(delay, grid_step) + 1;
  Segment seg(static_cast<int>(phi0.size()), count, delay, grid_step);
  for (std::size_t k = 0; k < count; ++k) {
    std::copy(phi0.data(), phi0.data() + phi0.size(), seg.data_.begin() + k * seg.dim_);
  }
  return seg;
}

Segment Segment::from_samples(const std::vector<Vector>& samples, double delay,
                              double grid_step) {
  const std::size_t count = grid_intervals(delay, grid_step) + 1;
  if (samples.size() != count) {
    throw std::invalid_argument("segment: expected " + std::to_string(count) +
                                " samples, got " + std::to_string(samples.size()));
  }
  const auto dim = samples.front().size();
  if (dim == 0) throw std::invalid_argument("segment: empty state vector");
  Segment seg(static_cast<int>(dim), count, delay, grid_step);
  for (std::size_t k = 0; k < count; ++k) {
    if (samples[k].size() != dim) throw std::invalid_argument("segment: ragged samples");
    std::copy(samples[k].data(), samples[k].data() + dim, seg.data_.begin() + k * dim);
  }
  return seg;
}

void Segment::push(const Vector& x) {
  if (x.size() != dim_) throw std::invalid_argument("segment: dimension mismatch in push");
  // The oldest slot becomes the newest.
  std::copy(x.data(), x.data() + dim_, data_.begin() + head_ * dim_);
  head_ = head_ + 1 == count_ ? 0 : head_ + 1;
}

void Segment::set_newest(const Vector& x) {
  if (x.size() != dim_) throw std::invalid_argument("segment: dimension mismatch");
  std::copy(x.data(), x.data() + dim_, data_.begin() + physical(count_ - 1) * dim_);
}

std::pair<std::size_t, double> Segment::locate(double s) const {
  const double tol = 1e-12 * delay_;
  if (!(s >= -delay_ - tol && s <= tol)) {
    throw std::out_of_range("segment: time " + std::to_string(s) + " outside [-r, 0]");
  }
  const double pos = std::clamp((s + delay_) / dt_, 0.0, static_cast<double>(count_ - 1));
  auto k = static_cast<std::size_t>(std::floor(pos));
  if (k >= count_ - 1) return {count_ - 1, 0.0};
  return {k, pos - static_cast<double>(k)};
}

Vector Segment::value_at(double s) const {
  const auto [k, frac] = locate(s);
  if (frac == 0.0) return sample(k);
  return (1.0 - frac) * sample(k) + frac * sample(k + 1);
}

double Segment::sup_norm() const {
  double best = 0.0;
  for (std::size_t k = 0; k < count_; ++k) best = std::max(best, sample(k).norm());
  return best;
}

Vector Segment::integrate_against(std::span<const WeightPoint> weights) const {
  Vector acc = Vector::Zero(dim_);
  for (const auto& [s, w] : weights) {
    const auto [k, frac] = locate(s);
    acc += (w * (1.0 - frac)) * sample(k);
    if (frac != 0.0) acc += (w * frac) * sample(k + 1);
  }
  return acc;
}

std::vector<Vector> Segment::samples() const {
  std::vector<Vector> out;
  out.reserve(count_);
  for (std::size_t k = 0; k < count_; ++k) out.emplace_back(sample(k));
  return out;
}

}  // namespace pdswitch

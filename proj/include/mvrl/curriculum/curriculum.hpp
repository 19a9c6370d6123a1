#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mvrl::curriculum {

enum class AugView { kFixed, kMoving };

// 0 until the threshold, then saturating ramp 1 - exp(-k * (step - threshold)).
inline double magnitude_at(int64_t step, int64_t threshold, double k) {
  if (k <= 0.0) throw std::invalid_argument("curriculum rate k must be positive");
  if (step <= threshold) return 0.0;
  return 1.0 - std::exp(-k * double(step - threshold));
}

// Default rate: magnitude reaches 0.95 at 3x the threshold step.
inline double default_rate(int64_t threshold) {
  const double ramp = threshold > 0 ? 2.0 * double(threshold) : 1.0;
  return std::log(20.0) / ramp;
}

// Boundary is inclusive: the fixed view is still used at step == threshold.
inline AugView aug_view_at(int64_t step, int64_t threshold) {
  return step <= threshold ? AugView::kFixed : AugView::kMoving;
}

struct CurriculumState {
  int64_t step = 0;
  int64_t threshold_step = 50000;
  double rate_k = 0.0;  // 0 means "derive from threshold"
  double magnitude = 0.0;

  double rate() const { return rate_k > 0.0 ? rate_k : default_rate(threshold_step); }

  void advance_to(int64_t s) {
    step = s;
    magnitude = magnitude_at(step, threshold_step, rate());
  }

  AugView aug_view() const { return aug_view_at(step, threshold_step); }
};

}  // namespace mvrl::curriculum

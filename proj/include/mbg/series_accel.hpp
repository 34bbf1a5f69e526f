#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace mbg {

class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct AccelResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Wynn's epsilon algorithm on a sequence of partial sums. Needed because the
// binomial expansion of det(I+X)^{-g} integrated over 0 < X < I sits on the
// boundary of its convergence disc: the partial sums oscillate (the limit is
// the Abel sum), and plain truncation never settles. The even epsilon columns
// are Shanks/Pade limits; we return the candidate whose step-to-step change
// is smallest.
inline AccelResult wynn_epsilon(const std::vector<double>& partial_sums) {
  const std::size_t n = partial_sums.size();
  if (n == 0) return {0.0, std::numeric_limits<double>::infinity()};
  if (n == 1) return {partial_sums[0], std::abs(partial_sums[0])};

  const double raw_delta = std::abs(partial_sums[n - 1] - partial_sums[n - 2]);
  const double raw_scale = std::max(std::abs(partial_sums[n - 1]), 1e-300);
  if (raw_delta <= 1e-15 * raw_scale)  // already converged, no need to transform
    return {partial_sums[n - 1], raw_delta};

  std::vector<double> prev(n + 1, 0.0);  // epsilon_{-1}
  std::vector<double> cur(partial_sums); // epsilon_0
  double best = partial_sums[n - 1];
  double best_err = raw_delta;
  double last_candidate = best;

  for (std::size_t k = 1; k < n; ++k) {
    std::vector<double> next(n - k);
    bool degenerate = false;
    for (std::size_t i = 0; i + k < n; ++i) {
      const double d = cur[i + 1] - cur[i];
      if (d == 0.0 || !std::isfinite(d)) {
        degenerate = true;
        break;
      }
      next[i] = prev[i + 1] + 1.0 / d;
      if (!std::isfinite(next[i])) {
        degenerate = true;
        break;
      }
    }
    if (degenerate) break;
    if (k % 2 == 0) {
      const double candidate = next.back();
      const double err = std::abs(candidate - last_candidate);
      last_candidate = candidate;
      if (err < best_err) {
        best_err = err;
        best = candidate;
      }
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return {best, best_err};
}

}  // namespace mbg

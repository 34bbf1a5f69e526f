#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "mbg/errors.hpp"

namespace mbg {

// A non-increasing tuple of positive integers. The empty partition is valid
// and indexes the degree-0 term of every series here.
class Partition {
 public:
  Partition() = default;

  explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] <= 0) throw domain_error("partition parts must be positive");
      if (i > 0 && parts_[i] > parts_[i - 1])
        throw domain_error("partition parts must be non-increasing");
    }
  }

  Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const { return parts_; }
  int weight() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
  int length() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }
  int part(int i) const { return i < length() ? parts_[i] : 0; }

  bool operator==(const Partition& o) const { return parts_ == o.parts_; }
  bool operator!=(const Partition& o) const { return parts_ != o.parts_; }
  // Lexicographic; used as the map key order, not the enumeration order.
  bool operator<(const Partition& o) const { return parts_ < o.parts_; }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(parts_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> parts_;
};

// All partitions of `weight` with at most `max_length` parts, in reverse
// lexicographic order: (k) first, (1,1,...,1) last. Weight 0 gives exactly
// the empty partition.
inline std::vector<Partition> enumerate_partitions(int weight, int max_length) {
  if (weight < 0) throw domain_error("partition weight must be non-negative");
  if (max_length < 1) throw domain_error("max_length must be >= 1");
  std::vector<Partition> out;
  if (weight == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<int> cur;
  // Depth-first with non-increasing parts produces reverse-lex order.
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.emplace_back(cur);
      return;
    }
    if (static_cast<int>(cur.size()) == max_length) return;
    int hi = std::min(remaining, max_part);
    for (int p = hi; p >= 1; --p) {
      cur.push_back(p);
      self(self, remaining - p, p);
      cur.pop_back();
    }
  };
  rec(rec, weight, weight);
  return out;
}

// Generalized (partition-indexed) rising factorial:
//   (a)_kappa = prod_i prod_{j=0..k_i-1} (a - (i-1)/2 + j).
// Signed product, exact zeros included; callers handle pole/sign logic.
inline double gen_pochhammer(double a, const Partition& kappa) {
  double prod = 1.0;
  const auto& parts = kappa.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double base = a - 0.5 * static_cast<double>(i);
    for (int j = 0; j < parts[i]; ++j) prod *= base + j;
  }
  return prod;
}

// log |(a)_kappa| plus sign in {-1,0,+1}; survives weights where the linear
// product overflows.
struct SignedLog {
  double log_abs = 0.0;  // meaningful only when sign != 0
  int sign = 1;
};

inline SignedLog gen_pochhammer_log(double a, const Partition& kappa) {
  SignedLog r;
  const auto& parts = kappa.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double base = a - 0.5 * static_cast<double>(i);
    for (int j = 0; j < parts[i]; ++j) {
      const double f = base + j;
      if (f == 0.0) return {0.0, 0};
      r.log_abs += std::log(std::abs(f));
      if (f < 0.0) r.sign = -r.sign;
    }
  }
  return r;
}

// Dominance (majorization) order on partitions of equal weight: true iff
// every prefix sum of lhs is <= the corresponding prefix sum of rhs.
inline bool dominance_leq(const Partition& lhs, const Partition& rhs) {
  if (lhs.weight() != rhs.weight())
    throw domain_error("dominance order requires equal weights");
  int acc_l = 0, acc_r = 0;
  const int n = std::max(lhs.length(), rhs.length());
  for (int i = 0; i < n; ++i) {
    acc_l += lhs.part(i);
    acc_r += rhs.part(i);
    if (acc_l > acc_r) return false;
  }
  return true;
}

}  // namespace mbg

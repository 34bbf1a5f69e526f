#pragma once

#include <cmath>
#include <string>

#include "mbg/errors.hpp"
#include "mbg/partition.hpp"

// Multivariate gamma / beta functions and their partition-shifted variants,
// all carried on the log scale so series terms at large partition weights do
// not overflow.

namespace mbg {

inline constexpr double kLogPi = 1.1447298858494001741;

// log Gamma_m(a) = (m(m-1)/4) log pi + sum_i log Gamma(a - (i-1)/2).
// Requires a > (m-1)/2.
inline double mv_gamma_log(double a, int m) {
  if (m < 1) throw domain_error("dimension must be >= 1");
  if (!(a > 0.5 * (m - 1)))
    throw domain_error("multivariate gamma requires a > (m-1)/2, got a=" +
                       std::to_string(a) + ", m=" + std::to_string(m));
  double s = kLogPi * m * (m - 1) / 4.0;
  for (int i = 1; i <= m; ++i) s += std::lgamma(a - 0.5 * (i - 1));
  return s;
}

// log B_m(a,b) = log Gamma_m(a) + log Gamma_m(b) - log Gamma_m(a+b).
inline double mv_beta_log(double a, double b, int m) {
  return mv_gamma_log(a, m) + mv_gamma_log(b, m) - mv_gamma_log(a + b, m);
}

// Gamma_m(a, kappa) = (a)_kappa Gamma_m(a), as a signed log value.
// sign == 0 flags an exact zero of the Pochhammer factor.
inline SignedLog mv_gamma_shifted(double a, const Partition& kappa, int m) {
  if (kappa.length() > m)
    throw domain_error("partition longer than dimension in Gamma_m(a,kappa)");
  SignedLog p = gen_pochhammer_log(a, kappa);
  if (p.sign == 0) return p;
  p.log_abs += mv_gamma_log(a, m);
  return p;
}

// Negative shift, Khatri convention:
//   Gamma_m(a, -kappa) = (-1)^{|kappa|} Gamma_m(a) / (-a + (m+1)/2)_kappa.
// The defining integral only exists when a - kappa_1 > (m-1)/2; outside that
// range the series term is undefined and we refuse to produce a number.
inline SignedLog mv_gamma_negshift(double a, const Partition& kappa, int m) {
  if (kappa.length() > m)
    throw domain_error("partition longer than dimension in Gamma_m(a,-kappa)");
  const int k1 = kappa.part(0);
  if (!(a - k1 > 0.5 * (m - 1)))
    throw domain_error("series term undefined: Gamma_m(a,-kappa) needs a - k1 > (m-1)/2 (a=" +
                       std::to_string(a) + ", k1=" + std::to_string(k1) + ")");
  SignedLog denom = gen_pochhammer_log(-a + 0.5 * (m + 1), kappa);
  if (denom.sign == 0)
    throw domain_error("pole in Gamma_m(a,-kappa): (-a+(m+1)/2)_kappa vanishes");
  SignedLog r;
  r.log_abs = mv_gamma_log(a, m) - denom.log_abs;
  r.sign = (kappa.weight() % 2 == 0 ? 1 : -1) * denom.sign;
  return r;
}

}  // namespace mbg

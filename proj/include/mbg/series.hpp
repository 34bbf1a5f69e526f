#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "mbg/errors.hpp"
#include "mbg/generator.hpp"
#include "mbg/mvgamma.hpp"
#include "mbg/partition.hpp"
#include "mbg/series_accel.hpp"
#include "mbg/symmetric_matrix.hpp"
#include "mbg/zonal.hpp"

// Truncated zonal-series evaluation of normalizing constants, determinant
// moments, Renyi/Shannon entropy, the matrix-argument 1F1, and the
// determinant-argument generator constants.
//
// Three integral backbones, shared by every operation:
//   type 1:  int_{0<X<I} det(X)^{al-c} det(I-X)^{be-c} C_tau(X) dX
//              = [(al)_tau / (al+be)_tau] B_m(al,be) C_tau(I),   c = (m+1)/2
//   type 2:  int_{X>0} det(X)^{al-c} det(I+X)^{-ga} C_tau(X) dX
//              = Gamma_m(al,tau) Gamma_m(ga-al,-tau) / Gamma_m(ga) C_tau(I)
//   type 3:  the type-1 integral with an extra det(I+X)^{-ga} factor,
//            handled by the binomial zonal expansion of that factor plus
//            linearization of zonal products, with the oscillating k-sum
//            resummed by the epsilon algorithm (see series_accel.hpp).

namespace mbg {

inline constexpr int kDefaultTruncation = 30;
inline constexpr double kSeriesRelTol = 1e-12;

struct SeriesValue {
  double value = 0.0;     // linear scale, signed
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;
  int truncation_degree = 0;
  std::vector<double> per_degree_sums;  // signed degree-t contributions
  double tail_estimate = 0.0;
  bool converged = false;
  bool formal = false;  // some per-term integrals were undefined and dropped
  std::string method;
};

enum class SeriesFamily { type1, type2, type3_scalar };

namespace detail {

inline void finalize_series(SeriesValue& sv, double extra_error = 0.0,
                            double rel_tol = kSeriesRelTol) {
  const auto& d = sv.per_degree_sums;
  KahanSum acc;
  for (double x : d) acc.add(x);
  sv.value = acc.value();
  sv.sign = (sv.value > 0.0) - (sv.value < 0.0);
  sv.log_abs = sv.sign == 0 ? -std::numeric_limits<double>::infinity()
                            : std::log(std::abs(sv.value));
  sv.truncation_degree = static_cast<int>(d.size()) - 1;

  const std::size_t n = d.size();
  double tail = extra_error;
  if (n >= 2) {
    const double last = std::abs(d[n - 1]);
    const double prev = std::abs(d[n - 2]);
    double ratio = prev > 0.0 ? last / prev : 0.0;
    ratio = std::min(ratio, 0.99);
    tail += last * ratio / (1.0 - ratio);
  }
  sv.tail_estimate = tail;

  bool monotone = true;
  if (n >= 3) {
    for (std::size_t i = n - 2; i < n; ++i)
      if (std::abs(d[i]) > std::abs(d[i - 1]) && std::abs(d[i]) > 0.0) monotone = false;
  }
  const double scale = std::max(std::abs(sv.value), 1e-300);
  sv.converged = monotone && n >= 1 && std::abs(d[n - 1]) <= rel_tol * scale &&
                 extra_error <= 1e-6 * scale;
}

inline std::vector<double> generator_coeffs(const GeneratorH& h, int truncation) {
  std::vector<double> c(static_cast<std::size_t>(truncation) + 1);
  for (int t = 0; t <= truncation; ++t) c[static_cast<std::size_t>(t)] = h.coeff(t);
  return c;
}

inline std::vector<double> eigenvalues_of(const SymMatrix& x) {
  return std::vector<double>(x.eigenvalues().data(), x.eigenvalues().data() + x.dim());
}

inline void check_truncation(int truncation) {
  if (truncation < 0 || truncation > kZonalDegreeCap)
    throw domain_error("truncation degree must lie in [0, " +
                       std::to_string(kZonalDegreeCap) + "]");
}

// sum_t c_t sum_{tau |- t} [(alpha)_tau / (alpha+beta)_tau] C_tau(Phi),
// scaled by B_m(alpha, beta). Backbone of the type-1 constant, the type-1
// determinant moments and the type-1 Renyi integrand.
inline SeriesValue beta_type1_series(double alpha, double beta, const SymMatrix& phi,
                                     const std::vector<double>& coeffs, int truncation) {
  check_truncation(truncation);
  const int m = phi.dim();
  const double log_b = mv_beta_log(alpha, beta, m);  // validates alpha, beta
  const double b_lin = std::exp(log_b);
  const auto eig = eigenvalues_of(phi);

  SeriesValue sv;
  sv.method = "zonal-series";
  for (int t = 0; t <= truncation; ++t) {
    double degree = 0.0;
    const double ct = coeffs[static_cast<std::size_t>(t)];
    if (ct != 0.0) {
      const ZonalTable& table = zonal_table(t, m);
      for (const Partition& tau : table.partitions()) {
        const double c_phi = table.eval_at_eigenvalues(tau, eig);
        if (c_phi == 0.0) continue;
        const SignedLog num = gen_pochhammer_log(alpha, tau);   // positive
        const SignedLog den = gen_pochhammer_log(alpha + beta, tau);
        degree += std::exp(num.log_abs - den.log_abs) * c_phi;
      }
      degree *= ct;
    }
    sv.per_degree_sums.push_back(degree * b_lin);
  }
  finalize_series(sv);
  return sv;
}

// sum_t c_t sum_{tau |- t} Gamma_m(alpha,tau) Gamma_m(gamma-alpha,-tau)
//                          / Gamma_m(gamma) C_tau(Phi).
// Khatri's integral bounds the largest part of every retained tau:
// (gamma - alpha) - tau_1 > (m-1)/2. Invalid terms with a nonzero generator
// coefficient mark the result `formal`; with allow_formal=false they throw.
inline SeriesValue beta_type2_series(double alpha, double gamma, const SymMatrix& phi,
                                     const std::vector<double>& coeffs, int truncation,
                                     bool allow_formal) {
  check_truncation(truncation);
  const int m = phi.dim();
  const double second = gamma - alpha;
  const double log_ga = mv_gamma_log(alpha, m);   // validates alpha
  const double log_gb = mv_gamma_log(second, m);  // validates gamma - alpha
  (void)log_gb;
  const double log_gg = mv_gamma_log(gamma, m);
  const auto eig = eigenvalues_of(phi);

  SeriesValue sv;
  sv.method = "zonal-series";
  bool any_valid = false;
  for (int t = 0; t <= truncation; ++t) {
    double degree = 0.0;
    const double ct = coeffs[static_cast<std::size_t>(t)];
    if (ct != 0.0) {
      const ZonalTable& table = zonal_table(t, m);
      for (const Partition& tau : table.partitions()) {
        if (!(second - tau.part(0) > 0.5 * (m - 1))) {
          sv.formal = true;
          continue;
        }
        const double c_phi = table.eval_at_eigenvalues(tau, eig);
        any_valid = true;
        if (c_phi == 0.0) continue;
        const SignedLog shift = gen_pochhammer_log(alpha, tau);  // positive
        const SignedLog neg = mv_gamma_negshift(second, tau, m);
        degree += neg.sign * std::exp(log_ga + shift.log_abs + neg.log_abs - log_gg) * c_phi;
      }
      degree *= ct;
    }
    sv.per_degree_sums.push_back(degree);
  }
  if (!any_valid)
    throw domain_error("type-2 series: every term with a nonzero coefficient is undefined");
  if (sv.formal && !allow_formal)
    throw domain_error(
        "type-2 series: generator has nonzero coefficients past the Khatri validity bound; "
        "pass allow_formal to accept a formal truncation (verify it against Monte Carlo)");
  finalize_series(sv);
  return sv;
}

// Structure constants of C_kappa C_tau = sum g_phi C_phi at a fixed
// dimension, cached across the whole process (the type-3 sums reuse them
// heavily).
inline const std::map<Partition, double>& linearized_product_cached(int m, const Partition& kappa,
                                                                    const Partition& tau) {
  using Key = std::tuple<int, Partition, Partition>;
  static std::mutex mu;
  static std::map<Key, std::map<Partition, double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  Key key{m, kappa, tau};
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto& tj = zonal_table(kappa.weight(), m);
    const auto& tk = zonal_table(tau.weight(), m);
    it = cache.emplace(key, linearize_product(tj, tk, kappa, tau)).first;
  }
  return it->second;
}

// Epsilon-accelerated value of
//   int_{0<X<I} det X^{al-c} det(I-X)^{be-c} det(I+X)^{-ga} C_tau(X) dX
// normalized by B_m(al, be). The k-th partial sum truncates the binomial
// zonal expansion of det(I+X)^{-ga} at degree k.
inline AccelResult type3_inner(int m, double alpha, double beta, double gamma,
                               const Partition& tau, int kmax) {
  std::vector<double> partial;
  partial.reserve(static_cast<std::size_t>(kmax) + 1);
  KahanSum acc;
  for (int k = 0; k <= kmax; ++k) {
    double term = 0.0;
    const ZonalTable& tk = zonal_table(k, m);
    double log_kfact = std::lgamma(k + 1.0);
    for (const Partition& kappa : tk.partitions()) {
      const SignedLog pk = gen_pochhammer_log(gamma, kappa);  // positive
      double inner = 0.0;
      for (const auto& [phi_part, g] : linearized_product_cached(m, kappa, tau)) {
        if (g == 0.0) continue;
        const double c_id = zonal_table(phi_part.weight(), m).eval_identity(phi_part);
        if (c_id == 0.0) continue;
        const SignedLog pa = gen_pochhammer_log(alpha, phi_part);
        const SignedLog pab = gen_pochhammer_log(alpha + beta, phi_part);
        inner += g * std::exp(pa.log_abs - pab.log_abs) * c_id;
      }
      term += std::exp(pk.log_abs - log_kfact) * inner;
    }
    if (k % 2 == 1) term = -term;
    acc.add(term);
    partial.push_back(acc.value());
  }
  return wynn_epsilon(partial);
}

// sum_t c_t phi^t sum_{tau |- t} type3_inner(alpha, beta, gamma, tau),
// scaled by B_m(alpha, beta). Joint degree |kappa|+|tau| is capped at
// `truncation`.
inline SeriesValue type3_scalar_series(double alpha, double beta, double gamma, double phi,
                                       int m, const std::vector<double>& coeffs,
                                       int truncation) {
  check_truncation(truncation);
  const double log_b = mv_beta_log(alpha, beta, m);
  mv_gamma_log(gamma, m);  // gamma must itself be an admissible exponent
  const double b_lin = std::exp(log_b);

  SeriesValue sv;
  sv.method = "zonal-series+epsilon";
  double accel_error = 0.0;
  double phi_pow = 1.0;
  for (int t = 0; t <= truncation; ++t) {
    double degree = 0.0;
    const double ct = coeffs[static_cast<std::size_t>(t)];
    if (ct != 0.0) {
      const ZonalTable& table = zonal_table(t, m);
      for (const Partition& tau : table.partitions()) {
        const AccelResult r = type3_inner(m, alpha, beta, gamma, tau, truncation - t);
        degree += r.value;
        accel_error += std::abs(ct) * phi_pow * r.error_estimate;
      }
      degree *= ct * phi_pow;
    }
    sv.per_degree_sums.push_back(degree * b_lin);
    phi_pow *= phi;
  }
  finalize_series(sv, accel_error * b_lin);
  return sv;
}

inline double scalar_phi_of(const SymMatrix& phi) {
  const auto eig = eigenvalues_of(phi);
  const double v = eig.front();
  for (double e : eig)
    if (std::abs(e - v) > 1e-10 * std::max(1.0, std::abs(v)))
      throw domain_error(
          "type-3 series requires Phi = phi*I; use the Monte Carlo estimator for general Phi");
  return v;
}

}  // namespace detail

// (zeta^{(1)})^{-1}: the type-1 normalizing-constant series.
inline SeriesValue constant_type1(double a, double b, const SymMatrix& phi,
                                  const GeneratorH& h, int truncation = kDefaultTruncation) {
  return detail::beta_type1_series(a, b, phi, detail::generator_coeffs(h, truncation),
                                   truncation);
}

// (zeta^{(2)})^{-1}: the type-2 normalizing-constant series (Khatri route).
inline SeriesValue constant_type2(double a, double b, const SymMatrix& phi,
                                  const GeneratorH& h, int truncation = kDefaultTruncation,
                                  bool allow_formal = false) {
  return detail::beta_type2_series(a, a + b, phi, detail::generator_coeffs(h, truncation),
                                   truncation, allow_formal);
}

// (zeta^{(3)})^{-1} for Phi = phi * I_m.
inline SeriesValue constant_type3_scalar(double a, double b, double phi, int m,
                                         const GeneratorH& h,
                                         int truncation = kDefaultTruncation) {
  return detail::type3_scalar_series(a, b, a + b, phi, m,
                                     detail::generator_coeffs(h, truncation), truncation);
}

// E[det(X)^r] as a ratio of the shifted constant series over the constant
// series. r shifts only the det(X) exponent; the other kernel factors are
// fixed by the family.
inline SeriesValue det_moment(SeriesFamily family, double a, double b, const SymMatrix& phi,
                              const GeneratorH& h, double r,
                              int truncation = kDefaultTruncation, bool allow_formal = false) {
  const int m = phi.dim();
  const auto coeffs = detail::generator_coeffs(h, truncation);
  SeriesValue num, den;
  switch (family) {
    case SeriesFamily::type1:
      num = detail::beta_type1_series(a + r, b, phi, coeffs, truncation);
      den = detail::beta_type1_series(a, b, phi, coeffs, truncation);
      break;
    case SeriesFamily::type2:
      // alpha = a+r against the fixed det(I+X)^{-(a+b)}; the negative shift
      // now sits at b-r, which is where the existence bound r < b-(m-1)/2
      // comes from.
      num = detail::beta_type2_series(a + r, a + b, phi, coeffs, truncation, allow_formal);
      den = detail::beta_type2_series(a, a + b, phi, coeffs, truncation, allow_formal);
      break;
    case SeriesFamily::type3_scalar: {
      const double sphi = detail::scalar_phi_of(phi);
      num = detail::type3_scalar_series(a + r, b, a + b, sphi, m, coeffs, truncation);
      den = detail::type3_scalar_series(a, b, a + b, sphi, m, coeffs, truncation);
      break;
    }
  }
  if (den.sign == 0) throw convergence_error("det_moment: constant series vanished");
  SeriesValue out;
  out.value = num.value / den.value;
  out.sign = (out.value > 0.0) - (out.value < 0.0);
  out.log_abs = out.sign == 0 ? -std::numeric_limits<double>::infinity()
                              : std::log(std::abs(out.value));
  out.truncation_degree = truncation;
  out.per_degree_sums = num.per_degree_sums;
  out.tail_estimate = std::abs(out.value) *
                      (num.tail_estimate / std::max(std::abs(num.value), 1e-300) +
                       den.tail_estimate / std::max(std::abs(den.value), 1e-300));
  out.converged = num.converged && den.converged;
  out.formal = num.formal || den.formal;
  out.method = num.method + "/ratio";
  return out;
}

// Matrix-argument confluent hypergeometric:
//   1F1(a; c; X) = sum_t sum_{kappa |- t} (a)_kappa / ((c)_kappa t!) C_kappa(X).
inline SeriesValue hypergeom_1f1_matrix(double a, double c, const SymMatrix& x,
                                        int truncation = kDefaultTruncation) {
  detail::check_truncation(truncation);
  const int m = x.dim();
  if (!(c > 0.5 * (m - 1)))
    throw domain_error("1F1 requires c > (m-1)/2");
  const auto eig = detail::eigenvalues_of(x);
  SeriesValue sv;
  sv.method = "zonal-series";
  for (int t = 0; t <= truncation; ++t) {
    const ZonalTable& table = zonal_table(t, m);
    const double log_tfact = std::lgamma(t + 1.0);
    double degree = 0.0;
    for (const Partition& kappa : table.partitions()) {
      const double c_x = table.eval_at_eigenvalues(kappa, eig);
      if (c_x == 0.0) continue;
      const SignedLog pa = gen_pochhammer_log(a, kappa);
      const SignedLog pc = gen_pochhammer_log(c, kappa);
      if (pc.sign == 0) throw domain_error("1F1: (c)_kappa vanishes");
      degree += pa.sign * pc.sign * std::exp(pa.log_abs - pc.log_abs - log_tfact) * c_x;
    }
    sv.per_degree_sums.push_back(degree);
  }
  detail::finalize_series(sv);
  return sv;
}

// Renyi entropy of order nu for the trace-generator families. Family 3 is
// available for scalar Phi only.
inline double renyi_entropy(SeriesFamily family, double a, double b, const SymMatrix& phi,
                            const GeneratorH& h, double nu,
                            int truncation = kDefaultTruncation, bool allow_formal = false) {
  if (!(nu > 0.0) || nu == 1.0)
    throw domain_error("Renyi entropy requires nu > 0, nu != 1");
  const int m = phi.dim();
  const double half_m1 = 0.5 * (m + 1);
  const double alpha_nu = nu * a - (nu - 1.0) * half_m1;
  const double beta_nu = nu * b - (nu - 1.0) * half_m1;
  if (!(alpha_nu > 0.5 * (m - 1)) || !(beta_nu > 0.5 * (m - 1))) {
    double nu_max = std::numeric_limits<double>::infinity();
    if (a < half_m1) nu_max = std::min(nu_max, 1.0 / (half_m1 - a));
    if (b < half_m1) nu_max = std::min(nu_max, 1.0 / (half_m1 - b));
    throw domain_error("Renyi order nu=" + std::to_string(nu) +
                       " leaves the admissible range (0, " + std::to_string(nu_max) + ")");
  }
  const auto u = power_coeffs(h, nu, truncation);

  SeriesValue constant, integral;
  switch (family) {
    case SeriesFamily::type1:
      constant = constant_type1(a, b, phi, h, truncation);
      integral = detail::beta_type1_series(alpha_nu, beta_nu, phi, u, truncation);
      break;
    case SeriesFamily::type2:
      constant = constant_type2(a, b, phi, h, truncation, allow_formal);
      integral = detail::beta_type2_series(alpha_nu, nu * (a + b), phi, u, truncation,
                                           allow_formal);
      break;
    case SeriesFamily::type3_scalar: {
      const double sphi = detail::scalar_phi_of(phi);
      constant = constant_type3_scalar(a, b, sphi, m, h, truncation);
      integral =
          detail::type3_scalar_series(alpha_nu, beta_nu, nu * (a + b), sphi, m, u, truncation);
      break;
    }
  }
  if (constant.sign <= 0)
    throw convergence_error("Renyi entropy: constant series is not positive");
  if (integral.sign <= 0)
    throw convergence_error("Renyi entropy: f^nu integral series is not positive");
  const double log_zeta = -constant.log_abs;  // zeta = 1 / constant series
  return (nu * log_zeta + integral.log_abs) / (1.0 - nu);
}

struct ShannonResult {
  double value = 0.0;
  double extrapolation_error = 0.0;
};

// Shannon entropy as the nu -> 1 limit of Renyi entropy: two-sided midpoints
// at nu = 1 +/- delta for delta in {1e-2, 5e-3}, Richardson-extrapolated.
inline ShannonResult shannon_entropy(SeriesFamily family, double a, double b,
                                     const SymMatrix& phi, const GeneratorH& h,
                                     int truncation = kDefaultTruncation,
                                     bool allow_formal = false) {
  auto midpoint = [&](double delta) {
    const double hi = renyi_entropy(family, a, b, phi, h, 1.0 + delta, truncation, allow_formal);
    const double lo = renyi_entropy(family, a, b, phi, h, 1.0 - delta, truncation, allow_formal);
    return 0.5 * (hi + lo);
  };
  const double coarse = midpoint(1e-2);
  const double fine = midpoint(5e-3);
  ShannonResult r;
  r.value = (4.0 * fine - coarse) / 3.0;
  r.extrapolation_error = std::abs(fine - coarse) / 3.0;
  return r;
}

// Normalizing constants for the determinant-argument generator families,
// h(det(Phi X)):
//   kind 1: sum_t c_t B_m(a+t, b) det(Phi)^t
//   kind 2: sum_t c_t B_m(a+t, b-t) det(Phi)^t   (b - t > (m-1)/2 per term)
//   kind 3: sum_t c_t det(Phi)^t *
//             int det X^{a+t-c} det(I-X)^{b-c} det(I+X)^{-(a+b)} dX
// Kind 3 evaluates its integral by the epsilon-accelerated zonal expansion.
inline SeriesValue det_generator_constant(int kind, double a, double b, const SymMatrix& phi,
                                          const GeneratorH& h,
                                          int truncation = kDefaultTruncation,
                                          bool allow_formal = false) {
  detail::check_truncation(truncation);
  if (kind < 1 || kind > 3) throw domain_error("det generator kind must be 1, 2 or 3");
  const int m = phi.dim();
  mv_beta_log(a, b, m);  // validate base parameters
  const double det_phi = phi.det();

  SeriesValue sv;
  sv.method = kind == 3 ? "det-series+epsilon" : "det-series";
  double accel_error = 0.0;
  double dp = 1.0;
  bool any_valid = false;
  for (int t = 0; t <= truncation; ++t) {
    const double ct = h.coeff(t);
    double degree = 0.0;
    if (ct != 0.0) {
      if (kind == 1) {
        degree = ct * dp * std::exp(mv_beta_log(a + t, b, m));
        any_valid = true;
      } else if (kind == 2) {
        if (b - t > 0.5 * (m - 1)) {
          degree = ct * dp * std::exp(mv_beta_log(a + t, b - t, m));
          any_valid = true;
        } else {
          sv.formal = true;
        }
      } else {
        const AccelResult r =
            detail::type3_inner(m, a + t, b, a + b, Partition{}, truncation - t);
        const double scale = std::exp(mv_beta_log(a + t, b, m));
        degree = ct * dp * scale * r.value;
        accel_error += std::abs(ct * dp) * scale * r.error_estimate;
        any_valid = true;
      }
    }
    sv.per_degree_sums.push_back(degree);
    dp *= det_phi;
  }
  if (!any_valid)
    throw domain_error("det generator constant: every nonzero term is undefined");
  if (sv.formal && !allow_formal)
    throw domain_error(
        "det generator kind 2: generator coefficients extend past the validity bound; "
        "pass allow_formal to accept a formal truncation");
  detail::finalize_series(sv, accel_error);
  return sv;
}

}  // namespace mbg

#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbg/errors.hpp"
#include "mbg/generator.hpp"
#include "mbg/mvgamma.hpp"
#include "mbg/series.hpp"
#include "mbg/symmetric_matrix.hpp"
#include "mbg/zonal.hpp"

// The distribution objects: support checks, exact log densities, affine
// transforms, eigenvalue joint densities, and the Kummer / determinant-
// generator constructors. Densities are normalized lazily; the resolved
// constant records which route produced it (series or Monte Carlo).

namespace mbg {

enum class Family { mbg1, mbg2, mbg3, detgen1, detgen2, detgen3 };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::mbg1: return "MBG1";
    case Family::mbg2: return "MBG2";
    case Family::mbg3: return "MBG3";
    case Family::detgen1: return "DETGEN1";
    case Family::detgen2: return "DETGEN2";
    case Family::detgen3: return "DETGEN3";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  if (s == "MBG1") return Family::mbg1;
  if (s == "MBG2") return Family::mbg2;
  if (s == "MBG3") return Family::mbg3;
  if (s == "DETGEN1") return Family::detgen1;
  if (s == "DETGEN2") return Family::detgen2;
  if (s == "DETGEN3") return Family::detgen3;
  throw schema_error("unknown family '" + s + "'");
}

// Families on 0 < X < I versus X > 0.
inline bool bounded_support(Family f) {
  return f == Family::mbg1 || f == Family::mbg3 || f == Family::detgen1 ||
         f == Family::detgen3;
}

inline bool has_inverse_factor(Family f) {
  return f == Family::mbg3 || f == Family::detgen3;
}

inline bool det_argument(Family f) {
  return f == Family::detgen1 || f == Family::detgen2 || f == Family::detgen3;
}

inline int detgen_kind(Family f) {
  switch (f) {
    case Family::detgen1: return 1;
    case Family::detgen2: return 2;
    case Family::detgen3: return 3;
    default: return 0;
  }
}

struct ConstantInfo {
  double log_zeta = 0.0;
  std::string route;          // "series" | "mc"
  double rel_uncertainty = 0.0;  // series tail / MC standard error, relative
  bool formal = false;
};

class MbgParams {
 public:
  MbgParams(Family family, int m, double a, double b, SymMatrix phi, GeneratorH h)
      : family_(family),
        m_(m),
        a_(a),
        b_(b),
        phi_(std::move(phi)),
        h_(std::move(h)),
        cell_(std::make_shared<Cell>()) {
    if (m_ < 1) throw domain_error("dimension must be >= 1");
    if (!(a_ > 0.5 * (m_ - 1)) || !(b_ > 0.5 * (m_ - 1)))
      throw domain_error("shape parameters must exceed (m-1)/2");
    if (phi_.dim() != m_) throw domain_error("Phi dimension does not match m");
  }

  Family family() const { return family_; }
  int m() const { return m_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const SymMatrix& phi() const { return phi_; }
  const GeneratorH& h() const { return h_; }

  bool constant_resolved() const {
    std::lock_guard<std::mutex> lock(cell_->mu);
    return cell_->info.has_value();
  }

  ConstantInfo constant() const {
    std::lock_guard<std::mutex> lock(cell_->mu);
    if (!cell_->info)
      throw domain_error("normalizing constant not resolved yet");
    return *cell_->info;
  }

  // Explicitly install a constant (the Monte Carlo route hands results in
  // through here). Replaces any previous resolution.
  void set_constant(ConstantInfo info) const {
    std::lock_guard<std::mutex> lock(cell_->mu);
    cell_->info = std::move(info);
  }

  // Resolve through the series engine if not already resolved. Fails for
  // family MBG3 with non-scalar Phi, whose constant only exists through the
  // Monte Carlo route.
  void ensure_constant_series(int truncation = kDefaultTruncation) const {
    std::lock_guard<std::mutex> lock(cell_->mu);
    if (cell_->info) return;
    SeriesValue sv;
    switch (family_) {
      case Family::mbg1:
        sv = constant_type1(a_, b_, phi_, h_, truncation);
        break;
      case Family::mbg2:
        sv = constant_type2(a_, b_, phi_, h_, truncation, /*allow_formal=*/true);
        break;
      case Family::mbg3:
        sv = constant_type3_scalar(a_, b_, detail::scalar_phi_of(phi_), m_, h_, truncation);
        break;
      default:
        sv = det_generator_constant(detgen_kind(family_), a_, b_, phi_, h_, truncation,
                                    /*allow_formal=*/true);
        break;
    }
    if (sv.sign <= 0)
      throw convergence_error("normalizing-constant series is not positive");
    ConstantInfo info;
    info.log_zeta = -sv.log_abs;
    info.route = "series";
    info.rel_uncertainty = sv.tail_estimate / std::abs(sv.value);
    info.formal = sv.formal;
    cell_->info = info;
  }

  double log_norm_const() const {
    if (!constant_resolved()) ensure_constant_series();
    return constant().log_zeta;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family_);
    j["m"] = m_;
    j["a"] = a_;
    j["b"] = b_;
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m_) * m_);
    for (int i = 0; i < m_; ++i)
      for (int k = 0; k < m_; ++k) flat.push_back(phi_.entries()(i, k));
    j["phi"] = flat;
    j["h"] = h_.label();
    return j;
  }

  static MbgParams from_json(const nlohmann::json& j) {
    for (const auto& [key, _] : j.items())
      if (key != "family" && key != "m" && key != "a" && key != "b" && key != "phi" &&
          key != "h")
        throw schema_error("unknown field '" + key + "' in params");
    for (const char* key : {"family", "m", "a", "b", "phi", "h"})
      if (!j.contains(key)) throw schema_error(std::string("params missing field '") + key + "'");
    const int m = j.at("m").get<int>();
    if (m < 1) throw schema_error("params.m must be >= 1");
    const auto flat = j.at("phi").get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(m) * m)
      throw schema_error("params.phi must be a row-major m*m array");
    Matrix phi(m, m);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) phi(i, k) = flat[static_cast<std::size_t>(i * m + k)];
    try {
      return MbgParams(family_from_name(j.at("family").get<std::string>()), m,
                       j.at("a").get<double>(), j.at("b").get<double>(), SymMatrix(phi),
                       parse_generator(j.at("h").get<std::string>()));
    } catch (const domain_error& e) {
      throw schema_error(std::string("invalid params: ") + e.what());
    }
  }

 private:
  struct Cell {
    mutable std::mutex mu;
    std::optional<ConstantInfo> info;
  };

  Family family_;
  int m_;
  double a_, b_;
  SymMatrix phi_;
  GeneratorH h_;
  std::shared_ptr<Cell> cell_;
};

inline constexpr double kSupportTol = 1e-12;

inline bool in_support(const MbgParams& p, const SymMatrix& x) {
  if (x.dim() != p.m()) throw domain_error("support check: dimension mismatch");
  if (!(x.min_eigenvalue() > kSupportTol)) return false;
  if (bounded_support(p.family())) {
    // largest eigenvalue of X must stay below 1
    if (!(1.0 - x.eigenvalues()[0] > kSupportTol)) return false;
  }
  return true;
}

// The generator argument: tr(Phi X) for the trace families, det(Phi X) for
// the determinant families.
inline double generator_argument(const MbgParams& p, const SymMatrix& x) {
  if (det_argument(p.family())) return p.phi().det() * x.det();
  return (p.phi().entries() * x.entries()).trace();
}

// Unnormalized log density (the kernel): determinant factors plus log h.
// With check_support=false a draw sitting numerically on the boundary maps
// to -inf (zero weight) instead of throwing; the Monte Carlo loops rely on
// that. A non-positive generator value is an error either way.
inline double log_kernel(const MbgParams& p, const SymMatrix& x, bool check_support = true) {
  if (check_support && !in_support(p, x)) throw domain_error("point outside the support");
  const int m = p.m();
  const double c = 0.5 * (m + 1);
  double ld_x = 0.0, ld_one_minus = 0.0, ld_one_plus = 0.0;
  for (int i = 0; i < m; ++i) {
    const double lam = x.eigenvalues()[i];
    ld_x += std::log(lam);
    if (bounded_support(p.family())) ld_one_minus += std::log(1.0 - lam);
    ld_one_plus += std::log1p(lam);
  }
  double lk = (p.a() - c) * ld_x;
  switch (p.family()) {
    case Family::mbg1:
    case Family::detgen1:
      lk += (p.b() - c) * ld_one_minus;
      break;
    case Family::mbg2:
    case Family::detgen2:
      lk += -(p.a() + p.b()) * ld_one_plus;
      break;
    case Family::mbg3:
    case Family::detgen3:
      lk += (p.b() - c) * ld_one_minus - (p.a() + p.b()) * ld_one_plus;
      break;
  }
  const double hv = p.h().eval(generator_argument(p, x));
  if (!(hv > 0.0))
    throw domain_error("density undefined: generator is not positive at the evaluation point");
  return lk + std::log(hv);
}

inline double log_density(const MbgParams& p, const SymMatrix& x) {
  return p.log_norm_const() + log_kernel(p, x);
}

struct TransformParams {
  SymMatrix psi;
  SymMatrix omega;

  TransformParams(SymMatrix psi_in, SymMatrix omega_in)
      : psi(std::move(psi_in)), omega(std::move(omega_in)) {
    if (psi.dim() != omega.dim())
      throw domain_error("transform: Psi and Omega dimensions differ");
    if (!SymMatrix(omega.entries() - psi.entries()).positive_definite(0.0))
      throw domain_error("transform requires Omega - Psi positive definite");
  }
};

// Log density of Y = (Omega-Psi)^{1/2} X (Omega-Psi)^{1/2} + Psi, by pulling
// Y back to X and adding the log Jacobian -(m+1)/2 log det(Omega-Psi).
inline double transform_density(const MbgParams& p, const TransformParams& tp,
                                const SymMatrix& y) {
  if (y.dim() != p.m()) throw domain_error("transform: dimension mismatch");
  const SymMatrix scale(tp.omega.entries() - tp.psi.entries());
  const Matrix inv_root = scale.inv_sqrt();
  const SymMatrix x(inv_root * (y.entries() - tp.psi.entries()) * inv_root);
  if (!in_support(p, x))
    throw domain_error("transform: point outside the transformed support");
  return log_density(p, x) - 0.5 * (p.m() + 1) * scale.log_det();
}

// Joint eigenvalue log density (lambdas strictly decreasing). The zonal sum
// over the generator index is truncated at `truncation`.
inline double eigen_log_density(const MbgParams& p, const std::vector<double>& lambdas,
                                int truncation = kDefaultTruncation) {
  const int m = p.m();
  if (static_cast<int>(lambdas.size()) != m)
    throw domain_error("eigenvalue count does not match dimension");
  for (int i = 0; i + 1 < m; ++i)
    if (!(lambdas[static_cast<std::size_t>(i)] > lambdas[static_cast<std::size_t>(i + 1)]))
      throw domain_error("eigenvalues must be strictly decreasing (ties are measure zero)");
  for (double lam : lambdas) {
    if (!(lam > kSupportTol)) throw domain_error("eigenvalue outside the support");
    if (bounded_support(p.family()) && !(1.0 - lam > kSupportTol))
      throw domain_error("eigenvalue outside the support");
  }

  // Orthogonal average of the generator factor.
  double avg = 0.0;
  if (det_argument(p.family())) {
    double det_lam = 1.0;
    for (double lam : lambdas) det_lam *= lam;
    avg = p.h().eval(p.phi().det() * det_lam);
  } else {
    const auto phi_eig = detail::eigenvalues_of(p.phi());
    double last = 0.0;
    for (int k = 0; k <= truncation; ++k) {
      const double ak = p.h().coeff(k);
      double term = 0.0;
      if (ak != 0.0) {
        const ZonalTable& table = zonal_table(k, m);
        for (const Partition& kappa : table.partitions()) {
          const double ci = table.eval_identity(kappa);
          if (ci == 0.0) continue;
          term += table.eval_at_eigenvalues(kappa, phi_eig) *
                  table.eval_at_eigenvalues(kappa, lambdas) / ci;
        }
        term *= ak;
      }
      avg += term;
      last = term;
    }
    if (std::abs(last) > 1e-9 * std::max(std::abs(avg), 1e-300))
      throw convergence_error("eigenvalue density: zonal sum did not converge by T");
  }
  if (!(avg > 0.0))
    throw domain_error("eigenvalue density undefined: averaged generator is not positive");

  const double c = 0.5 * (m + 1);
  double lg = 0.5 * m * m * kLogPi - mv_gamma_log(0.5 * m, m) + p.log_norm_const() +
              std::log(avg);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      lg += std::log(lambdas[static_cast<std::size_t>(i)] - lambdas[static_cast<std::size_t>(j)]);
  for (double lam : lambdas) {
    lg += (p.a() - c) * std::log(lam);
    if (bounded_support(p.family())) lg += (p.b() - c) * std::log(1.0 - lam);
    if (has_inverse_factor(p.family()) || p.family() == Family::mbg2 ||
        p.family() == Family::detgen2)
      lg += -(p.a() + p.b()) * std::log1p(lam);
  }
  return lg;
}

// Kummer constructors: h(x) = exp(-x). The type-1 constant is computed along
// both available routes (the generator series and B_m * 1F1(a; a+b; -Phi))
// and the two must agree; type 2 keeps the formal series value with the
// Monte Carlo route as the binding check; type 3 resolves through the series
// only for scalar Phi.
inline MbgParams kummer(int type, int m, double a, double b, const SymMatrix& phi,
                        int truncation = kDefaultTruncation) {
  if (type < 1 || type > 3) throw domain_error("Kummer type must be 1, 2 or 3");
  const Family fam = type == 1 ? Family::mbg1 : (type == 2 ? Family::mbg2 : Family::mbg3);
  MbgParams p(fam, m, a, b, phi, GeneratorH::exp_neg());
  if (type == 1) {
    const SeriesValue direct = constant_type1(a, b, phi, GeneratorH::exp_neg(), truncation);
    const SeriesValue f11 =
        hypergeom_1f1_matrix(a, a + b, SymMatrix(-phi.entries()), truncation);
    const double beta = std::exp(mv_beta_log(a, b, m));
    const double alt = beta * f11.value;
    const double tol = direct.tail_estimate + beta * f11.tail_estimate +
                       1e-10 * std::abs(direct.value);
    if (std::abs(direct.value - alt) > tol)
      throw convergence_error("Kummer type-1 constant: series and 1F1 routes disagree");
    ConstantInfo info;
    info.log_zeta = -std::log(direct.value);
    info.route = "series";
    info.rel_uncertainty = tol / std::abs(direct.value);
    p.set_constant(info);
  } else if (type == 2) {
    p.ensure_constant_series(truncation);  // formal: exp has all coefficients
  } else {
    bool scalar = true;
    try {
      detail::scalar_phi_of(phi);
    } catch (const domain_error&) {
      scalar = false;
    }
    if (scalar) p.ensure_constant_series(truncation);
    // general Phi: left unresolved for the Monte Carlo route
  }
  return p;
}

}  // namespace mbg

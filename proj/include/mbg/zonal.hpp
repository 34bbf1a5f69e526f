#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbg/errors.hpp"
#include "mbg/partition.hpp"
#include "mbg/symmetric_matrix.hpp"

// Zonal polynomials C_kappa in the monomial symmetric basis, normalized so
// that sum_{kappa |- k} C_kappa(X) = (tr X)^k. Tables are built per
// (degree, dimension) by the classical eigenfunction recurrence and cached.

namespace mbg {

inline constexpr int kZonalDegreeCap = 40;

namespace detail {

// m_lambda evaluated at the eigenvalue vector: sum over distinct arrangements
// of the exponents (padded with zeros to m variables).
inline double monomial_sym_eval(const std::vector<int>& lambda, int m,
                                const std::vector<std::vector<double>>& powers) {
  std::vector<int> expo(static_cast<std::size_t>(m), 0);
  std::copy(lambda.begin(), lambda.end(), expo.begin());
  // Descending start enumerates every distinct arrangement exactly once.
  double sum = 0.0;
  do {
    double term = 1.0;
    for (int i = 0; i < m; ++i) term *= powers[static_cast<std::size_t>(i)][static_cast<std::size_t>(expo[static_cast<std::size_t>(i)])];
    sum += term;
  } while (std::prev_permutation(expo.begin(), expo.end()));
  return sum;
}

// Number of distinct arrangements of lambda padded to m slots, i.e.
// m_lambda(1,...,1).
inline double monomial_sym_count(const std::vector<int>& lambda, int m) {
  double count = std::tgamma(m + 1.0);
  int run = 1;
  for (std::size_t i = 1; i <= lambda.size(); ++i) {
    if (i < lambda.size() && lambda[i] == lambda[i - 1]) {
      ++run;
    } else {
      count /= std::tgamma(run + 1.0);
      run = 1;
    }
  }
  count /= std::tgamma(m - static_cast<int>(lambda.size()) + 1.0);  // the zero block
  return count;
}

inline double rho(const Partition& kappa) {
  double r = 0.0;
  for (int i = 0; i < kappa.length(); ++i) {
    const double ki = kappa.part(i);
    r += ki * (ki - (i + 1));
  }
  return r;
}

}  // namespace detail

class ZonalTable {
 public:
  ZonalTable(int degree, int dimension) : degree_(degree), dimension_(dimension) {
    if (degree < 0) throw domain_error("zonal degree must be non-negative");
    if (dimension < 1) throw domain_error("zonal dimension must be >= 1");
    if (degree > kZonalDegreeCap)
      throw domain_error("zonal degree " + std::to_string(degree) +
                         " exceeds cap " + std::to_string(kZonalDegreeCap));
    partitions_ = enumerate_partitions(degree, dimension);
    for (std::size_t i = 0; i < partitions_.size(); ++i)
      index_[partitions_[i]] = static_cast<int>(i);
    build();
  }

  int degree() const { return degree_; }
  int dimension() const { return dimension_; }
  const std::vector<Partition>& partitions() const { return partitions_; }
  const std::vector<std::vector<double>>& coefficients() const { return coeffs_; }

  int index_of(const Partition& p) const {
    auto it = index_.find(p);
    return it == index_.end() ? -1 : it->second;
  }

  // C_kappa at an eigenvalue vector (any values, not only positive).
  double eval_at_eigenvalues(const Partition& kappa, const std::vector<double>& eig) const {
    if (kappa.weight() != degree_)
      throw domain_error("partition weight does not match table degree");
    if (static_cast<int>(eig.size()) != dimension_)
      throw domain_error("eigenvalue count does not match table dimension");
    const int r = index_of(kappa);
    if (r < 0) return 0.0;  // length > dimension: C_kappa vanishes identically
    if (degree_ == 0) return 1.0;
    std::vector<std::vector<double>> powers(static_cast<std::size_t>(dimension_));
    for (int i = 0; i < dimension_; ++i) {
      auto& p = powers[static_cast<std::size_t>(i)];
      p.resize(static_cast<std::size_t>(degree_) + 1);
      p[0] = 1.0;
      for (int e = 1; e <= degree_; ++e) p[static_cast<std::size_t>(e)] = p[static_cast<std::size_t>(e - 1)] * eig[static_cast<std::size_t>(i)];
    }
    double sum = 0.0;
    const auto& row = coeffs_[static_cast<std::size_t>(r)];
    for (std::size_t q = 0; q < partitions_.size(); ++q) {
      if (row[q] == 0.0) continue;
      sum += row[q] * detail::monomial_sym_eval(partitions_[q].parts(), dimension_, powers);
    }
    return sum;
  }

  double eval(const Partition& kappa, const SymMatrix& x) const {
    if (x.dim() != dimension_) throw domain_error("matrix dimension does not match table");
    std::vector<double> eig(x.eigenvalues().data(), x.eigenvalues().data() + x.dim());
    return eval_at_eigenvalues(kappa, eig);
  }

  // C_kappa(I_m), cached at build time.
  double eval_identity(const Partition& kappa) const {
    if (kappa.weight() != degree_)
      throw domain_error("partition weight does not match table degree");
    const int r = index_of(kappa);
    return r < 0 ? 0.0 : identity_values_[static_cast<std::size_t>(r)];
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["degree"] = degree_;
    j["dimension"] = dimension_;
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : partitions_) parts.push_back(p.parts());
    j["partitions"] = std::move(parts);
    j["coefficients"] = coeffs_;
    j["identity_values"] = identity_values_;
    return j;
  }

  static ZonalTable from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j.at("version").get<int>() != 1)
      throw schema_error("unsupported zonal table version");
    ZonalTable t;
    t.degree_ = j.at("degree").get<int>();
    t.dimension_ = j.at("dimension").get<int>();
    if (t.degree_ < 0 || t.degree_ > kZonalDegreeCap || t.dimension_ < 1)
      throw schema_error("zonal table header out of range");
    t.partitions_ = enumerate_partitions(t.degree_, t.dimension_);
    for (std::size_t i = 0; i < t.partitions_.size(); ++i)
      t.index_[t.partitions_[i]] = static_cast<int>(i);
    const auto stored_parts = j.at("partitions").get<std::vector<std::vector<int>>>();
    if (stored_parts.size() != t.partitions_.size())
      throw schema_error("zonal table partition list does not match header");
    for (std::size_t i = 0; i < stored_parts.size(); ++i)
      if (stored_parts[i] != t.partitions_[i].parts())
        throw schema_error("zonal table partition order does not match enumeration");
    t.coeffs_ = j.at("coefficients").get<std::vector<std::vector<double>>>();
    t.identity_values_ = j.at("identity_values").get<std::vector<double>>();
    if (t.coeffs_.size() != t.partitions_.size() ||
        t.identity_values_.size() != t.partitions_.size())
      throw schema_error("zonal table payload has wrong row count");
    for (const auto& row : t.coeffs_)
      if (row.size() != t.partitions_.size())
        throw schema_error("zonal table payload has wrong row length");
    return t;
  }

 private:
  ZonalTable() = default;  // used by from_json

  void build() {
    const std::size_t n = partitions_.size();
    coeffs_.assign(n, std::vector<double>(n, 0.0));
    identity_values_.assign(n, 0.0);
    if (degree_ == 0) {
      coeffs_[0][0] = 1.0;
      identity_values_[0] = 1.0;
      return;
    }

    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = detail::rho(partitions_[i]);

    // Unit-leading-coefficient eigenfunctions, one row per kappa. Reverse-lex
    // enumeration is a linear extension of dominance, so every referenced
    // coefficient is already available.
    for (std::size_t r = 0; r < n; ++r) {
      auto& row = coeffs_[r];
      row[r] = 1.0;
      for (std::size_t q = r + 1; q < n; ++q) {
        const auto& lam = partitions_[q].parts();
        const int len = static_cast<int>(lam.size());
        double num = 0.0;
        std::vector<int> work;
        for (int j = 1; j < len; ++j) {
          for (int i = 0; i < j; ++i) {
            for (int t = 1; t <= lam[static_cast<std::size_t>(j)]; ++t) {
              const int ni = lam[static_cast<std::size_t>(i)] + t;
              const int nj = lam[static_cast<std::size_t>(j)] - t;
              if (ni == nj) continue;  // factor vanishes
              work.assign(lam.begin(), lam.end());
              work[static_cast<std::size_t>(i)] = ni;
              work[static_cast<std::size_t>(j)] = nj;
              std::sort(work.begin(), work.end(), std::greater<int>());
              while (!work.empty() && work.back() == 0) work.pop_back();
              auto it = index_.find(Partition(work));
              if (it == index_.end()) continue;
              num += static_cast<double>(ni - nj) * row[static_cast<std::size_t>(it->second)];
            }
          }
        }
        row[q] = (num == 0.0) ? 0.0 : num / (rho[r] - rho[q]);
      }
    }

    // Fix the global scale so that sum_kappa C_kappa = (tr)^degree:
    // solve the triangular system against the multinomial coefficients.
    std::vector<double> target(n);
    for (std::size_t q = 0; q < n; ++q) {
      double e = std::tgamma(degree_ + 1.0);
      for (int part : partitions_[q].parts()) e /= std::tgamma(part + 1.0);
      target[q] = e;
    }
    std::vector<double> scale(n);
    for (std::size_t q = 0; q < n; ++q) {
      double acc = target[q];
      for (std::size_t r = 0; r < q; ++r) acc -= scale[r] * coeffs_[r][q];
      scale[q] = acc;  // diagonal of the unit rows is 1
    }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t q = 0; q < n; ++q) coeffs_[r][q] *= scale[r];

    for (std::size_t r = 0; r < n; ++r) {
      double v = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        if (coeffs_[r][q] == 0.0) continue;
        v += coeffs_[r][q] * detail::monomial_sym_count(partitions_[q].parts(), dimension_);
      }
      identity_values_[r] = v;
    }
  }

  int degree_ = 0;
  int dimension_ = 1;
  std::vector<Partition> partitions_;
  std::map<Partition, int> index_;
  std::vector<std::vector<double>> coeffs_;
  std::vector<double> identity_values_;
};

// Process-wide table cache. Construction runs once per (degree, dimension);
// the returned reference stays valid for the process lifetime.
inline const ZonalTable& zonal_table(int degree, int dimension) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<ZonalTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(degree, dimension);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<ZonalTable>(degree, dimension)).first;
  return *it->second;
}

// int_{O(m)} C_kappa(A H B H') dH = C_kappa(A) C_kappa(B) / C_kappa(I_m).
inline double orthogonal_average(const ZonalTable& table, const Partition& kappa,
                                 const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw domain_error("orthogonal_average: dimension mismatch");
  const double ci = table.eval_identity(kappa);
  if (ci == 0.0)
    throw domain_error("orthogonal_average: C_kappa(I) = 0 (partition longer than dimension)");
  return table.eval(kappa, a) * table.eval(kappa, b) / ci;
}

// Coefficients g such that C_kappa(X) C_tau(X) = sum_phi g_phi C_phi(X),
// valid for all symmetric X of the tables' dimension. Partitions longer than
// the dimension are not representable at that dimension and are omitted.
inline std::map<Partition, double> linearize_product(const ZonalTable& table_j,
                                                     const ZonalTable& table_k,
                                                     const Partition& kappa,
                                                     const Partition& tau) {
  if (table_j.dimension() != table_k.dimension())
    throw domain_error("linearize_product: table dimensions differ");
  if (kappa.weight() != table_j.degree() || tau.weight() != table_k.degree())
    throw domain_error("linearize_product: partition weight does not match its table");
  const int m = table_j.dimension();
  const int n = table_j.degree() + table_k.degree();
  if (n > kZonalDegreeCap) throw domain_error("linearize_product: joint degree exceeds cap");
  const ZonalTable& target = zonal_table(n, m);

  const int rj = table_j.index_of(kappa);
  const int rk = table_k.index_of(tau);
  std::map<Partition, double> out;
  if (rj < 0 || rk < 0) return out;  // one factor vanishes identically

  const auto& nu_list = target.partitions();
  const std::size_t nn = nu_list.size();

  // Monomial coefficients of the product: for each nu, count exponent splits
  // nu = arrangement(lambda) + arrangement(mu), weighted by the factors'
  // monomial coefficients.
  std::vector<double> prod(nn, 0.0);
  const auto& cj = table_j.coefficients()[static_cast<std::size_t>(rj)];
  const auto& ck = table_k.coefficients()[static_cast<std::size_t>(rk)];
  const auto& lam_list = table_j.partitions();
  const auto& mu_list = table_k.partitions();

  std::vector<int> arrangement(static_cast<std::size_t>(m));
  std::vector<int> residual(static_cast<std::size_t>(m));
  for (std::size_t ql = 0; ql < lam_list.size(); ++ql) {
    if (cj[ql] == 0.0) continue;
    std::fill(arrangement.begin(), arrangement.end(), 0);
    std::copy(lam_list[ql].parts().begin(), lam_list[ql].parts().end(), arrangement.begin());
    std::sort(arrangement.begin(), arrangement.end(), std::greater<int>());
    do {
      for (std::size_t qn = 0; qn < nn; ++qn) {
        const auto& nu = nu_list[qn].parts();
        bool feasible = true;
        for (int i = 0; i < m; ++i) {
          const int e = (i < static_cast<int>(nu.size()) ? nu[static_cast<std::size_t>(i)] : 0) - arrangement[static_cast<std::size_t>(i)];
          if (e < 0) {
            feasible = false;
            break;
          }
          residual[static_cast<std::size_t>(i)] = e;
        }
        if (!feasible) continue;
        std::vector<int> sorted_res(residual);
        std::sort(sorted_res.begin(), sorted_res.end(), std::greater<int>());
        while (!sorted_res.empty() && sorted_res.back() == 0) sorted_res.pop_back();
        const int qm = table_k.index_of(Partition(sorted_res));
        if (qm >= 0 && ck[static_cast<std::size_t>(qm)] != 0.0)
          prod[qn] += cj[ql] * ck[static_cast<std::size_t>(qm)];
      }
    } while (std::prev_permutation(arrangement.begin(), arrangement.end()));
  }

  // Back-substitute through the triangular zonal->monomial transition.
  const auto& tc = target.coefficients();
  std::vector<double> g(nn, 0.0);
  for (std::size_t q = 0; q < nn; ++q) {
    double acc = prod[q];
    for (std::size_t r = 0; r < q; ++r) acc -= g[r] * tc[r][q];
    g[q] = acc / tc[q][q];
  }
  for (std::size_t q = 0; q < nn; ++q)
    if (g[q] != 0.0) out[nu_list[q]] = g[q];
  return out;
}

}  // namespace mbg

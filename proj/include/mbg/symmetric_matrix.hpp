#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "mbg/errors.hpp"

namespace mbg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A real symmetric matrix with its eigendecomposition computed once on
// construction. Eigenvalues are kept in non-increasing order; everything the
// series machinery needs (traces of powers, zonal evaluation, fractional
// matrix powers) comes from this cache.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& entries, double sym_tol = 1e-12) {
    if (entries.rows() != entries.cols())
      throw domain_error("SymMatrix requires a square matrix");
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
      throw domain_error("matrix is not symmetric within tolerance");
    entries_ = 0.5 * (entries + entries.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_);
    if (es.info() != Eigen::Success)
      throw domain_error("eigendecomposition failed");
    // Eigen returns ascending order; flip to non-increasing.
    const int m = dim();
    eigenvalues_.resize(m);
    eigenvectors_.resize(m, m);
    for (int i = 0; i < m; ++i) {
      eigenvalues_[i] = es.eigenvalues()[m - 1 - i];
      eigenvectors_.col(i) = es.eigenvectors().col(m - 1 - i);
    }
  }

  static SymMatrix identity(int m) { return SymMatrix(Matrix::Identity(m, m)); }

  static SymMatrix scaled_identity(double c, int m) {
    return SymMatrix(Matrix::Identity(m, m) * c);
  }

  static SymMatrix diagonal(const std::vector<double>& d) {
    Matrix a = Matrix::Zero(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) a(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return SymMatrix(a);
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const Vector& eigenvalues() const { return eigenvalues_; }  // non-increasing
  const Matrix& eigenvectors() const { return eigenvectors_; }

  double trace() const { return entries_.trace(); }
  double min_eigenvalue() const { return eigenvalues_[dim() - 1]; }

  double log_det() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      if (eigenvalues_[i] <= 0.0) throw domain_error("log_det of a non-PD matrix");
      s += std::log(eigenvalues_[i]);
    }
    return s;
  }

  double det() const {
    double p = 1.0;
    for (int i = 0; i < dim(); ++i) p *= eigenvalues_[i];
    return p;
  }

  bool positive_definite(double tol = 1e-12) const { return min_eigenvalue() > tol; }

  // H f(Lambda) H^T for a scalar function of the eigenvalues.
  template <class F>
  Matrix spectral_map(F&& f) const {
    Vector d(dim());
    for (int i = 0; i < dim(); ++i) d[i] = f(eigenvalues_[i]);
    return eigenvectors_ * d.asDiagonal() * eigenvectors_.transpose();
  }

  Matrix sqrt() const {
    if (!(min_eigenvalue() >= 0.0)) throw domain_error("matrix sqrt of a non-PSD matrix");
    return spectral_map([](double x) { return std::sqrt(std::max(x, 0.0)); });
  }

  Matrix inv_sqrt() const {
    if (!positive_definite(0.0)) throw domain_error("inverse sqrt of a non-PD matrix");
    return spectral_map([](double x) { return 1.0 / std::sqrt(x); });
  }

 private:
  Matrix entries_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

}  // namespace mbg

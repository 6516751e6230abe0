#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace richards {

using Triplet = Eigen::Triplet<double>;

/// Square sparse matrix in compressed-row storage. Duplicate (row, col)
/// triplets are summed during finalization, so the stored pattern has one
/// entry per coordinate pair.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(int dim, const std::vector<Triplet>& entries) : m_(dim, dim) {
    if (dim < 0) throw std::invalid_argument("SparseMatrix: negative dimension");
    m_.setFromTriplets(entries.begin(), entries.end());
    m_.prune(0.0);
    m_.makeCompressed();
  }

  explicit SparseMatrix(Eigen::SparseMatrix<double, Eigen::RowMajor> m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("SparseMatrix: not square");
    m_.makeCompressed();
  }

  int dimension() const { return static_cast<int>(m_.rows()); }
  int nonzeros() const { return static_cast<int>(m_.nonZeros()); }
  double coeff(int r, int c) const { return m_.coeff(r, c); }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& csr() const { return m_; }

  /// CSR views: row_extents has dimension()+1 entries framing each row's
  /// slice of col_indices/values.
  std::span<const int> row_extents() const {
    return {m_.outerIndexPtr(), static_cast<std::size_t>(m_.rows() + 1)};
  }
  std::span<const int> col_indices() const {
    return {m_.innerIndexPtr(), static_cast<std::size_t>(m_.nonZeros())};
  }
  std::span<const double> values() const {
    return {m_.valuePtr(), static_cast<std::size_t>(m_.nonZeros())};
  }

  SparseMatrix plus(const SparseMatrix& other) const {
    Eigen::SparseMatrix<double, Eigen::RowMajor> sum = m_ + other.m_;
    return SparseMatrix(std::move(sum));
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m_ * x; }

  double inf_norm() const {
    double best = 0.0;
    for (int r = 0; r < m_.outerSize(); ++r) {
      double s = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m_, r); it; ++it)
        s += std::abs(it.value());
      best = std::max(best, s);
    }
    return best;
  }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> m_;
};

enum class SolveMethod { Direct, Iterative };

struct LinearSolveResult {
  Eigen::VectorXd x;
  bool ok = false;
  double rel_residual = 0.0;  // |Ax-b| / |b| (0 when b = 0)
  std::string message;
};

/// Solve Ax = b. The direct path is a sparse LU factorization with iterative
/// refinement; it reports failure on a singular factorization, non-finite
/// solution, or a residual that stays large in both the |b| and the
/// backward-error (|A||x|+|b|) scalings.
inline LinearSolveResult solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b,
                                      SolveMethod method = SolveMethod::Direct) {
  LinearSolveResult out;
  if (A.dimension() != b.size()) {
    out.message = "dimension mismatch";
    return out;
  }
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = Eigen::VectorXd::Zero(b.size());
    out.ok = true;
    return out;
  }

  Eigen::SparseMatrix<double> Ac = A.csr();  // column-major copy for the solvers
  if (method == SolveMethod::Iterative) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setTolerance(1e-13);
    solver.setMaxIterations(4 * b.size());
    solver.compute(Ac);
    if (solver.info() != Eigen::Success) {
      out.message = "iterative setup failed";
      return out;
    }
    out.x = solver.solve(b);
    out.rel_residual = (A.apply(out.x) - b).norm() / bnorm;
    out.ok = out.x.allFinite() && out.rel_residual <= 1e-10;
    if (!out.ok) out.message = "iterative solve did not converge";
    return out;
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(Ac);
  lu.factorize(Ac);
  if (lu.info() != Eigen::Success) {
    out.message = "singular or failed factorization";
    return out;
  }
  Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite()) {
    out.message = "non-finite solution";
    return out;
  }
  Eigen::VectorXd r = b - A.apply(x);
  for (int pass = 0; pass < 3 && r.norm() > 1e-13 * bnorm; ++pass) {
    const Eigen::VectorXd dx = lu.solve(r);
    if (!dx.allFinite()) break;
    x += dx;
    r = b - A.apply(x);
  }
  out.x = std::move(x);
  out.rel_residual = r.norm() / bnorm;
  const double backward = r.norm() / (A.inf_norm() * out.x.norm() + bnorm);
  out.ok = out.x.allFinite() && (out.rel_residual <= 1e-12 || backward <= 1e-13);
  if (!out.ok) out.message = "residual check failed";
  return out;
}

}  // namespace richards

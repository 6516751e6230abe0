#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "richards/constitutive.hpp"
#include "richards/field.hpp"
#include "richards/mesh.hpp"
#include "richards/quadrature.hpp"
#include "richards/sparse.hpp"

namespace richards {

/// Quadrature point handed to coefficient callables: barycentric coordinates
/// (to sample P1 fields) plus the physical position (for analytic data).
struct QPoint {
  std::array<double, 3> bary;
  Vec2 x;
};

/// Coefficient conventions: scalars are w(element, QPoint) -> double, vector
/// fields are b(element, QPoint) -> Vec2, all evaluated at quadrature points.

/// Mass matrix weighted by w: entries (w phi_j, phi_i).
template <class W>
SparseMatrix assemble_weighted_mass(const Mesh& mesh, const QuadratureRule& rule, W&& w) {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.element(e);
    const double area = mesh.geometry(e).area;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      const double s = rule.weights[q] * area * w(e, qp);
      if (s == 0.0) continue;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) trip.emplace_back(el[i], el[j], s * qp.bary[i] * qp.bary[j]);
    }
  }
  return SparseMatrix(mesh.vertex_count(), trip);
}

/// Stiffness matrix scaled by tau: entries tau (c grad phi_j, grad phi_i).
template <class C>
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const QuadratureRule& rule, C&& c,
                                         double tau) {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.element(e);
    const auto& g = mesh.geometry(e);
    double cbar = 0.0;  // P1 gradients are constant per element, so c averages out
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      cbar += rule.weights[q] * c(e, qp);
    }
    const double s = tau * cbar * g.area;
    if (s == 0.0) continue;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(el[i], el[j], s * dot(g.grad[i], g.grad[j]));
  }
  return SparseMatrix(mesh.vertex_count(), trip);
}

/// Convection-type matrix scaled by tau: entries tau (b phi_j, grad phi_i).
template <class B>
SparseMatrix assemble_convection(const Mesh& mesh, const QuadratureRule& rule, B&& b, double tau) {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.element(e);
    const auto& g = mesh.geometry(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      const Vec2 bv = b(e, qp);
      const double s = tau * rule.weights[q] * g.area;
      for (int i = 0; i < 3; ++i) {
        const double bi = s * dot(bv, g.grad[i]);
        if (bi == 0.0) continue;
        for (int j = 0; j < 3; ++j) trip.emplace_back(el[i], el[j], bi * qp.bary[j]);
      }
    }
  }
  return SparseMatrix(mesh.vertex_count(), trip);
}

/// Load vector entries
///   tau (f, phi_i) - (theta_prev - theta_old, phi_i) - tau (c gvec, grad phi_i),
/// where gvec is the frozen gradient factor: grad(psi_prev + z) for the
/// increment form, or plain grad z for a full-form right side.
template <class F, class TP, class TO, class C, class G>
Eigen::VectorXd assemble_rhs(const Mesh& mesh, const QuadratureRule& rule, double tau, F&& f,
                             TP&& theta_prev, TO&& theta_old, C&& c, G&& gvec) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.element(e);
    const auto& g = mesh.geometry(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      const double s = rule.weights[q] * g.area;
      const double mass_part = s * (tau * f(e, qp) - (theta_prev(e, qp) - theta_old(e, qp)));
      const Vec2 flux = (s * tau * c(e, qp)) * gvec(e, qp);
      for (int i = 0; i < 3; ++i) rhs[el[i]] += mass_part * qp.bary[i] - dot(flux, g.grad[i]);
    }
  }
  return rhs;
}

/// Row/column elimination for essential boundary conditions. Column
/// contributions move to the right side, then each constrained row becomes
/// the identity with the prescribed value, preserving symmetry of symmetric
/// inputs.
inline std::pair<SparseMatrix, Eigen::VectorXd> apply_dirichlet(const SparseMatrix& A,
                                                                const Eigen::VectorXd& b,
                                                                const std::vector<int>& dofs,
                                                                const std::vector<double>& values) {
  if (dofs.size() != values.size())
    throw std::invalid_argument("apply_dirichlet: dof/value length mismatch");
  const int n = A.dimension();
  if (b.size() != n) throw std::invalid_argument("apply_dirichlet: rhs dimension mismatch");
  std::vector<char> mark(n, 0);
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    const int d = dofs[k];
    if (d < 0 || d >= n) throw std::invalid_argument("apply_dirichlet: dof out of range");
    mark[d] = 1;
    bc[d] = values[k];
  }
  Eigen::VectorXd rhs = b;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(A.nonzeros()) + dofs.size());
  const auto& m = A.csr();
  for (int r = 0; r < n; ++r) {
    if (mark[r]) continue;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      if (mark[it.col()])
        rhs[r] -= it.value() * bc[it.col()];
      else
        trip.emplace_back(r, static_cast<int>(it.col()), it.value());
    }
  }
  for (int r = 0; r < n; ++r) {
    if (!mark[r]) continue;
    trip.emplace_back(r, r, 1.0);
    rhs[r] = bc[r];
  }
  return {SparseMatrix(n, trip), std::move(rhs)};
}

/// Quadrature evaluation of ( integral [ w xi^2 + tau c |grad xi|^2 ] )^(1/2).
template <class W, class C>
double weighted_energy_norm(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& xi,
                            W&& w, C&& c, double tau) {
  double acc = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double area = mesh.geometry(e).area;
    const Vec2 grad = xi.gradient(e);
    const double g2 = dot(grad, grad);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      const double v = xi.at(e, qp.bary);
      acc += rule.weights[q] * area * (w(e, qp) * v * v + tau * c(e, qp) * g2);
    }
  }
  return std::sqrt(acc);
}

enum class NormKind { LScheme, Newton };

/// Iteration-error norm of xi in the metric induced by the linearization at
/// state psi: constant weight L (L-scheme) or theta'(psi) (Newton), plus the
/// tau-scaled conductivity seminorm. Nonlinear coefficients are sampled at
/// quadrature points from the P1-interpolated psi.
template <constitutive_model M>
double energy_norm(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& xi,
                   NormKind kind, const DiscreteField& psi, double l_value, double tau,
                   const M& model) {
  auto cond = [&](int e, const QPoint& qp) { return model.conductivity(psi.at(e, qp.bary)); };
  if (kind == NormKind::LScheme)
    return weighted_energy_norm(mesh, rule, xi, [&](int, const QPoint&) { return l_value; }, cond,
                                tau);
  return weighted_energy_norm(
      mesh, rule, xi, [&](int e, const QPoint& qp) { return model.theta_prime(psi.at(e, qp.bary)); },
      cond, tau);
}

}  // namespace richards

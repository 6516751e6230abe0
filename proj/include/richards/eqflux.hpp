#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "richards/assembly.hpp"
#include "richards/constitutive.hpp"
#include "richards/field.hpp"
#include "richards/mesh.hpp"
#include "richards/quadrature.hpp"

namespace richards {

/// Lowest-order Raviart-Thomas field: one normal-flux coefficient per mesh
/// edge. The global orientation fixes the edge normal as the tangent from the
/// lower- to the higher-numbered vertex rotated by -90 degrees; an element's
/// local sign is +1 where that normal points outward.
struct RTEdge {
  int v0 = -1, v1 = -1;  // v0 < v1
  double length = 0.0;
};

class RTTopology {
 public:
  explicit RTTopology(const Mesh& mesh) : mesh_(&mesh) {
    std::map<std::pair<int, int>, int> index;
    elem_edges_.resize(mesh.element_count());
    for (int e = 0; e < mesh.element_count(); ++e) {
      const auto& el = mesh.element(e);
      for (int k = 0; k < 3; ++k) {
        // Local edge k is opposite local vertex k.
        const int a = el[(k + 1) % 3], b = el[(k + 2) % 3];
        const auto key = std::minmax(a, b);
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(edges_.size()));
        if (inserted)
          edges_.push_back({key.first, key.second,
                            norm(mesh.vertex(key.second) - mesh.vertex(key.first))});
        const int edge = it->second;
        // Outward normal test against the opposite vertex.
        const Vec2 lo = mesh.vertex(key.first), hi = mesh.vertex(key.second);
        const Vec2 t = hi - lo;
        const Vec2 n{t.z, -t.x};  // tangent rotated by -90 degrees
        const Vec2 opp = mesh.vertex(el[k]);
        const Vec2 mid = 0.5 * (lo + hi);
        const double sign = dot(n, mid - opp) > 0.0 ? 1.0 : -1.0;
        elem_edges_[e][k] = {edge, sign};
      }
    }
  }

  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<RTEdge>& edges() const { return edges_; }
  /// Per element: three (edge index, orientation sign) pairs, entry k opposite
  /// local vertex k.
  const std::array<std::pair<int, double>, 3>& element_edges(int e) const {
    return elem_edges_[e];
  }
  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  std::vector<RTEdge> edges_;
  std::vector<std::array<std::pair<int, double>, 3>> elem_edges_;
};

struct RTField {
  const RTTopology* topo = nullptr;
  Eigen::VectorXd coef;  // one normal flux per edge

  bool empty() const { return topo == nullptr; }

  Vec2 value(int e, Vec2 x) const {
    if (!topo) return {0.0, 0.0};
    const Mesh& mesh = topo->mesh();
    const auto& el = mesh.element(e);
    const double area = mesh.geometry(e).area;
    Vec2 out{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const auto [edge, sign] = topo->element_edges(e)[k];
      const Vec2 opp = mesh.vertex(el[k]);
      const double scale = sign * coef[edge] * topo->edges()[edge].length / (2.0 * area);
      out = out + scale * (x - opp);
    }
    return out;
  }

  double divergence(int e) const {
    if (!topo) return 0.0;
    const Mesh& mesh = topo->mesh();
    const double area = mesh.geometry(e).area;
    double out = 0.0;
    for (int k = 0; k < 3; ++k) {
      const auto [edge, sign] = topo->element_edges(e)[k];
      out += sign * coef[edge] * topo->edges()[edge].length / area;
    }
    return out;
  }
};

/// Elementwise mean with the given quadrature rule.
template <class G>
Eigen::VectorXd project_piecewise_constant(const Mesh& mesh, const QuadratureRule& rule, G&& g) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      acc += rule.weights[q] * g(e, qp);
    }
    out[e] = acc;
  }
  return out;
}

/// Minimum-energy RT0 flux with prescribed piecewise-constant divergence:
///   minimize |K(1)^{-1/2} sigma| subject to div sigma = g elementwise.
/// Boundary normal fluxes stay free, which makes the divergence operator onto
/// the piecewise constants and the saddle-point system nonsingular without
/// pinning a multiplier. The matrix depends only on the mesh and K(1), so it
/// is factorized once and reused for every right side.
class FluxEquilibrator {
 public:
  FluxEquilibrator(const Mesh& mesh, double k_sat)
      : topo_(std::make_shared<RTTopology>(mesh)), k_sat_(k_sat) {
    if (!(k_sat > 0.0)) throw std::invalid_argument("FluxEquilibrator: K(1) must be positive");
    const int ne = topo_->edge_count();
    const int nt = mesh.element_count();
    std::vector<Eigen::Triplet<double>> trip;
    const QuadratureRule& rule = default_rule();  // exact for the quadratic products
    for (int e = 0; e < nt; ++e) {
      const auto& el = mesh.element(e);
      const double area = mesh.geometry(e).area;
      // RT0 basis value factors: phi_k(x) = s_k L_k / (2A) (x - p_k).
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = mesh.point(e, rule.points[q]);
        std::array<Vec2, 3> phi;
        for (int k = 0; k < 3; ++k) {
          const auto [edge, sign] = topo_->element_edges(e)[k];
          phi[k] = (sign * topo_->edges()[edge].length / (2.0 * area)) * (x - mesh.vertex(el[k]));
        }
        const double s = rule.weights[q] * area / k_sat_;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            trip.emplace_back(topo_->element_edges(e)[a].first, topo_->element_edges(e)[b].first,
                              s * dot(phi[a], phi[b]));
      }
      for (int k = 0; k < 3; ++k) {
        const auto [edge, sign] = topo_->element_edges(e)[k];
        const double div_int = sign * topo_->edges()[edge].length;  // integral of div phi_k
        trip.emplace_back(ne + e, edge, div_int);                   // B sigma = m
        trip.emplace_back(edge, ne + e, -div_int);                  // -B^T r
      }
    }
    Eigen::SparseMatrix<double> kkt(ne + nt, ne + nt);
    kkt.setFromTriplets(trip.begin(), trip.end());
    lu_.analyzePattern(kkt);
    lu_.factorize(kkt);
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error("FluxEquilibrator: saddle-point factorization failed");
  }

  const RTTopology& topology() const { return *topo_; }

  /// Flux whose elementwise divergence equals g (one value per element).
  RTField flux_for_divergence(const Eigen::VectorXd& g) const {
    const Mesh& mesh = topo_->mesh();
    if (g.size() != mesh.element_count())
      throw std::invalid_argument("flux_for_divergence: one value per element expected");
    const int ne = topo_->edge_count();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ne + mesh.element_count());
    for (int e = 0; e < mesh.element_count(); ++e)
      rhs[ne + e] = g[e] * mesh.geometry(e).area;
    const Eigen::VectorXd sol = lu_.solve(rhs);
    RTField out;
    out.topo = topo_.get();
    out.coef = sol.head(ne);
    return out;
  }

  RTField zero_flux() const {
    RTField out;
    out.topo = topo_.get();
    out.coef = Eigen::VectorXd::Zero(topo_->edge_count());
    return out;
  }

 private:
  std::shared_ptr<RTTopology> topo_;
  double k_sat_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

/// Divergence data for the switch indicators: (1/tau) times the elementwise
/// mean of the linearization residual on degenerate elements, zero elsewhere.
/// weight_prev is the zero-order weight of the executed scheme at psi_{i-1}:
/// the L constant for the L-scheme variant, theta'(psi_{i-1}) for Newton.
template <constitutive_model M, class W>
RTField equilibrated_flux(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& psi_i,
                          const DiscreteField& psi_im1, double tau, W&& weight_prev,
                          const std::vector<char>& degenerate, const M& model,
                          const FluxEquilibrator& eq) {
  auto residual = [&](int e, const QPoint& qp) {
    const double pi = psi_i.at(e, qp.bary);
    const double pm = psi_im1.at(e, qp.bary);
    return weight_prev(e, qp) * (pi - pm) - (model.theta(pi) - model.theta(pm));
  };
  Eigen::VectorXd g = project_piecewise_constant(mesh, rule, residual);
  bool any = false;
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (degenerate.empty() || !degenerate[e])
      g[e] = 0.0;
    else {
      g[e] /= tau;
      any = true;
    }
  }
  if (!any) return eq.zero_flux();
  return eq.flux_for_divergence(g);
}

}  // namespace richards

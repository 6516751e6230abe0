#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "richards/mesh.hpp"

namespace richards {

/// P1 nodal field over a mesh. values[i] belongs to mesh vertex i.
struct DiscreteField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd values;

  DiscreteField() = default;
  explicit DiscreteField(const Mesh& m) : mesh(&m), values(Eigen::VectorXd::Zero(m.vertex_count())) {}
  DiscreteField(const Mesh& m, Eigen::VectorXd v) : mesh(&m), values(std::move(v)) {}

  template <class F>
  static DiscreteField interpolate(const Mesh& m, F&& f) {
    DiscreteField out(m);
    for (int i = 0; i < m.vertex_count(); ++i) {
      const Vec2 p = m.vertex(i);
      out.values[i] = f(p.x, p.z);
    }
    return out;
  }

  double at(int e, const std::array<double, 3>& bary) const {
    const auto& el = mesh->element(e);
    return bary[0] * values[el[0]] + bary[1] * values[el[1]] + bary[2] * values[el[2]];
  }

  /// Constant gradient of the field on element e.
  Vec2 gradient(int e) const {
    const auto& el = mesh->element(e);
    const auto& g = mesh->geometry(e);
    Vec2 out{0.0, 0.0};
    for (int k = 0; k < 3; ++k) out = out + values[el[k]] * g.grad[k];
    return out;
  }

  bool finite() const { return values.allFinite(); }
};

}  // namespace richards

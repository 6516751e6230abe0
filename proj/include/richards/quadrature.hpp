#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace richards {

/// Symmetric quadrature rule on the reference triangle in barycentric
/// coordinates. Weights are normalized to sum to 1; an integral over an
/// element is area * sum_q w_q f(x_q).
struct QuadratureRule {
  int degree = 0;  // exact for polynomials up to this total degree
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Default rule for assembly and the iteration energy norms: the three-point
/// interior Gauss rule (barycentric 2/3,1/6,1/6) with equal weights.
/// Second-order exact and all weights positive. Interior sampling matters for
/// the nonlinear coefficients: the Mualem conductivity has an unbounded
/// derivative at saturation, so where the points land relative to a
/// saturation front decides how stiff the assembled Newton convection gets.
inline const QuadratureRule& default_rule() {
  static const QuadratureRule rule{
      2,
      {{{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}},
       {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}},
       {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

/// Vertex rule: samples at the three corners with equal weights, first-order
/// exact. The switch indicators use it so the nonlinear coefficient fields
/// are seen at exactly the nodal values the P1 iterate carries. Interior
/// sampling averages across a front within the element and systematically
/// underpredicts the error a Newton step would make there; corner sampling
/// keeps the predictions conservative on coarse meshes.
inline const QuadratureRule& vertex_rule() {
  static const QuadratureRule rule{
      1,
      {{{1.0, 0.0, 0.0}}, {{0.0, 1.0, 0.0}}, {{0.0, 0.0, 1.0}}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

/// Additional rules used by tests and the piecewise-constant projection.
inline const QuadratureRule& rule_for_degree(int degree) {
  static const QuadratureRule d1{1, {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}}, {1.0}};
  static const QuadratureRule d3{
      3,
      {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
       {{0.6, 0.2, 0.2}},
       {{0.2, 0.6, 0.2}},
       {{0.2, 0.2, 0.6}}},
      {-27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0}};
  static const QuadratureRule d5 = [] {
    QuadratureRule r;
    r.degree = 5;
    const double b1 = 0.47014206410511508, w1 = 0.13239415278850618;
    const double b2 = 0.10128650732345633, w2 = 0.12593918054482715;
    r.points = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
                {{1.0 - 2.0 * b1, b1, b1}},
                {{b1, 1.0 - 2.0 * b1, b1}},
                {{b1, b1, 1.0 - 2.0 * b1}},
                {{1.0 - 2.0 * b2, b2, b2}},
                {{b2, 1.0 - 2.0 * b2, b2}},
                {{b2, b2, 1.0 - 2.0 * b2}}};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  switch (degree) {
    case 1: return d1;
    case 2: return default_rule();
    case 3: return d3;
    case 4:
    case 5: return d5;
    default: throw std::invalid_argument("rule_for_degree: degree 1..5 supported");
  }
}

}  // namespace richards

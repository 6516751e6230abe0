#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "richards/assembly.hpp"
#include "richards/constitutive.hpp"
#include "richards/eqflux.hpp"
#include "richards/field.hpp"
#include "richards/mesh.hpp"
#include "richards/quadrature.hpp"

namespace richards {

/// A-posteriori bound on the next iteration's error, computable from two
/// consecutive iterates. value already carries the 2/(2 - C_N) prefactor
/// where one applies; available is false when C_N >= 2 voids the bound.
struct SwitchEstimate {
  double value = std::numeric_limits<double>::infinity();
  double poten_part = 0.0;  // zero-order residual term, weighted
  double flux_part = 0.0;   // conductivity-difference flux term, weighted
  double c_n = 0.0;
  double degenerate_fraction = 0.0;  // elements excluded from the poten term
  bool available = false;
};

/// Elements where theta'(psi) drops below epsilon at some quadrature point.
/// Sampling the same points the indicator integrals use keeps the exclusion
/// and the rerouted residual consistent: an element is excluded exactly when
/// one of its potential-term quadrature weights would degenerate. Vertex
/// values stay out of the test for the same reason.
template <constitutive_model M>
std::vector<char> degenerate_elements(const Mesh& mesh, const QuadratureRule& rule,
                                      const DiscreteField& psi, double epsilon, const M& model) {
  std::vector<char> mask(mesh.element_count(), 0);
  for (int e = 0; e < mesh.element_count(); ++e) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& bary : rule.points) lo = std::min(lo, model.theta_prime(psi.at(e, bary)));
    mask[e] = lo < epsilon ? 1 : 0;
  }
  return mask;
}

/// Smallest constant with tau |K^{-1/2} (K o theta)'(psi) grad(psi + z)|^2
/// <= C_N^2 theta'(psi) pointwise, maximized over the assembly quadrature
/// points. Conventions at theta' = 0: a vanishing numerator gives 0, a
/// positive one gives +inf. Diagnostic form on the raw iterate gradient; the
/// switch bounds use the flux-reconstruction overload below.
template <constitutive_model M>
double convection_constant(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& psi,
                           double tau, const M& model) {
  double best = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Vec2 grad = psi.gradient(e);
    const Vec2 gz{grad.x, grad.z + 1.0};
    const double g2 = dot(gz, gz);
    for (const auto& bary : rule.points) {
      const double p = psi.at(e, bary);
      const double kp = model.conductivity_prime(p);
      if (kp == 0.0 || g2 == 0.0) continue;  // vanishing numerator: contributes 0
      const double num = tau * kp * kp * g2 / model.conductivity(p);
      if (num == 0.0) continue;
      const double tp = model.theta_prime(p);
      if (tp == 0.0) return std::numeric_limits<double>::infinity();
      best = std::max(best, num / tp);
    }
  }
  return std::sqrt(best);
}

/// Convection constant entering the switch bounds, with the Darcy velocity
/// expressed through the reconstructed flux sigma instead of the raw iterate
/// gradient: grad(psi + z) = -K^{-1} sigma turns the pointwise quantity into
/// tau (K o theta)'(psi)^2 |sigma|^2 / (K(psi)^3 theta'(psi)). The raw P1
/// gradient is unusable here: any kink inherited from discontinuous initial
/// data (a one-cell front carries |grad| ~ 1/h) inflates the constant by
/// orders of magnitude although the actual flux through the front stays
/// bounded. An empty sigma is the zero reconstruction, so the constant
/// vanishes and the 2/(2 - C_N) prefactor is exactly 1.
template <constitutive_model M>
double convection_constant(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& psi,
                           double tau, const M& model, const RTField& sigma) {
  if (sigma.empty()) return 0.0;
  double best = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    for (const auto& bary : rule.points) {
      const Vec2 x = mesh.point(e, bary);
      const Vec2 sv = sigma.value(e, x);
      const double s2 = dot(sv, sv);
      const double p = psi.at(e, bary);
      const double kp = model.conductivity_prime(p);
      if (kp == 0.0 || s2 == 0.0) continue;  // vanishing numerator: contributes 0
      const double k = model.conductivity(p);
      const double num = tau * kp * kp * s2 / (k * k * k);
      if (num == 0.0) continue;
      const double tp = model.theta_prime(p);
      if (tp == 0.0) return std::numeric_limits<double>::infinity();
      best = std::max(best, num / tp);
    }
  }
  return std::sqrt(best);
}

namespace detail {

/// Shared quadrature loop for the three indicators. poten_res and flux_vec
/// produce the raw residual integrands; poten_weight divides the squared
/// zero-order residual (theta' for the switch bounds, L for the L-to-L one).
template <class PR, class PW, class FV, class KI>
std::pair<double, double> indicator_parts(const Mesh& mesh, const QuadratureRule& rule,
                                          const std::vector<char>& skip_poten, PR&& poten_res,
                                          PW&& poten_weight, FV&& flux_vec, KI&& k_i) {
  double poten2 = 0.0, flux2 = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double area = mesh.geometry(e).area;
    const bool skip = !skip_poten.empty() && skip_poten[e];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint qp{rule.points[q], mesh.point(e, rule.points[q])};
      const double s = rule.weights[q] * area;
      if (!skip) {
        const double r = poten_res(e, qp);
        poten2 += s * r * r / poten_weight(e, qp);
      }
      const Vec2 fv = flux_vec(e, qp);
      flux2 += s * dot(fv, fv) / k_i(e, qp);
    }
  }
  return {poten2, flux2};
}

}  // namespace detail

/// Bound on the error of a Newton step following an L-scheme step.
template <constitutive_model M>
SwitchEstimate eta_l_to_n(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& psi_i,
                          const DiscreteField& psi_im1, double tau, double l_value, double epsilon,
                          const M& model, const RTField* sigma = nullptr) {
  SwitchEstimate out;
  const std::vector<char> deg = degenerate_elements(mesh, rule, psi_i, epsilon, model);
  int count = 0;
  for (char c : deg) count += c;
  out.degenerate_fraction = static_cast<double>(count) / std::max(1, mesh.element_count());
  static const RTField no_flux;
  out.c_n = convection_constant(mesh, rule, psi_i, tau, model, sigma ? *sigma : no_flux);

  auto [poten2, flux2] = detail::indicator_parts(
      mesh, rule, deg,
      [&](int e, const QPoint& qp) {
        const double pi = psi_i.at(e, qp.bary), pm = psi_im1.at(e, qp.bary);
        return l_value * (pi - pm) - (model.theta(pi) - model.theta(pm));
      },
      [&](int e, const QPoint& qp) { return model.theta_prime(psi_i.at(e, qp.bary)); },
      [&](int e, const QPoint& qp) -> Vec2 {
        const Vec2 grad = psi_i.gradient(e);
        const Vec2 gz{grad.x, grad.z + 1.0};
        const double dk = model.conductivity(psi_i.at(e, qp.bary)) -
                          model.conductivity(psi_im1.at(e, qp.bary));
        Vec2 v = dk * gz;
        if (sigma && !sigma->empty()) v = v + sigma->value(e, qp.x);
        return v;
      },
      [&](int e, const QPoint& qp) { return model.conductivity(psi_i.at(e, qp.bary)); });
  out.poten_part = std::sqrt(poten2);
  out.flux_part = std::sqrt(flux2);
  if (out.c_n < 2.0) {
    out.available = true;
    out.value = 2.0 / (2.0 - out.c_n) * std::sqrt(poten2 + tau * flux2);
  }
  return out;
}

/// Bound on the error of an L-scheme step following a Newton step.
template <constitutive_model M>
SwitchEstimate eta_n_to_l(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& psi_i,
                          const DiscreteField& psi_im1, double tau, double epsilon, const M& model,
                          const RTField* sigma = nullptr) {
  SwitchEstimate out;
  const std::vector<char> deg = degenerate_elements(mesh, rule, psi_i, epsilon, model);
  int count = 0;
  for (char c : deg) count += c;
  out.degenerate_fraction = static_cast<double>(count) / std::max(1, mesh.element_count());
  static const RTField no_flux;
  out.c_n = convection_constant(mesh, rule, psi_i, tau, model, sigma ? *sigma : no_flux);

  auto [poten2, flux2] = detail::indicator_parts(
      mesh, rule, deg,
      [&](int e, const QPoint& qp) {
        const double pi = psi_i.at(e, qp.bary), pm = psi_im1.at(e, qp.bary);
        return model.theta_prime(pm) * (pi - pm) - (model.theta(pi) - model.theta(pm));
      },
      [&](int e, const QPoint& qp) { return model.theta_prime(psi_i.at(e, qp.bary)); },
      [&](int e, const QPoint& qp) -> Vec2 {
        const Vec2 grad_i = psi_i.gradient(e);
        const Vec2 gz_i{grad_i.x, grad_i.z + 1.0};
        const Vec2 grad_m = psi_im1.gradient(e);
        const Vec2 gz_m{grad_m.x, grad_m.z + 1.0};
        const double pi = psi_i.at(e, qp.bary), pm = psi_im1.at(e, qp.bary);
        const double dk = model.conductivity(pi) - model.conductivity(pm);
        Vec2 v = dk * gz_i - (model.conductivity_prime(pm) * (pi - pm)) * gz_m;
        if (sigma && !sigma->empty()) v = v + sigma->value(e, qp.x);
        return v;
      },
      [&](int e, const QPoint& qp) { return model.conductivity(psi_i.at(e, qp.bary)); });
  out.poten_part = std::sqrt(poten2);
  out.flux_part = std::sqrt(flux2);
  if (out.c_n < 2.0) {
    out.available = true;
    out.value = 2.0 / (2.0 - out.c_n) * std::sqrt(poten2 + tau * flux2);
  }
  return out;
}

/// Bound on the next L-scheme error when staying on the L-scheme with the
/// same L: no convection prefactor and no degenerate-set exclusion.
template <constitutive_model M>
SwitchEstimate eta_l_to_l(const Mesh& mesh, const QuadratureRule& rule, const DiscreteField& psi_i,
                          const DiscreteField& psi_im1, double tau, double l_value,
                          const M& model) {
  SwitchEstimate out;
  static const std::vector<char> none;
  auto [poten2, flux2] = detail::indicator_parts(
      mesh, rule, none,
      [&](int e, const QPoint& qp) {
        const double pi = psi_i.at(e, qp.bary), pm = psi_im1.at(e, qp.bary);
        return l_value * (pi - pm) - (model.theta(pi) - model.theta(pm));
      },
      [&](int, const QPoint&) { return l_value; },
      [&](int e, const QPoint& qp) -> Vec2 {
        const Vec2 grad = psi_i.gradient(e);
        const Vec2 gz{grad.x, grad.z + 1.0};
        const double dk = model.conductivity(psi_i.at(e, qp.bary)) -
                          model.conductivity(psi_im1.at(e, qp.bary));
        return dk * gz;
      },
      [&](int e, const QPoint& qp) { return model.conductivity(psi_i.at(e, qp.bary)); });
  out.poten_part = std::sqrt(poten2);
  out.flux_part = std::sqrt(flux2);
  out.available = true;
  out.c_n = 0.0;
  out.value = std::sqrt(poten2 + tau * flux2);
  return out;
}

/// Ratio of the previous iteration's bound to the realized error of the step
/// it predicted; at least 1 whenever the bound's hypotheses hold.
inline double effectivity_index(double estimate_prev, double eta_lin_next) {
  if (eta_lin_next == 0.0) return std::numeric_limits<double>::infinity();
  return estimate_prev / eta_lin_next;
}

}  // namespace richards

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "richards/assembly.hpp"
#include "richards/constitutive.hpp"
#include "richards/field.hpp"
#include "richards/mesh.hpp"
#include "richards/quadrature.hpp"
#include "richards/sparse.hpp"

namespace richards {

/// One-step linearizations of the backward-Euler system
///   (theta(psi^n) - theta(psi^{n-1}), v) + tau (K(theta(psi^n)) grad(psi^n + z), grad v) = tau (f^n, v).
/// Every scheme solves for the increment d = psi^{n,j} - psi^{n,j-1} with the
/// scheme weight in front of the mass term:
///   (w d, v) + tau (K grad d, grad v) [+ Newton convection]
///     = tau (f^n, v) - (theta(psi^{n,j-1}) - theta(psi^{n-1}), v)
///       - tau (K grad(psi^{n,j-1} + z), grad v),
/// so Dirichlet data lives in the iterate and increments vanish on the
/// Dirichlet set.
enum class Scheme {
  Picard,           // w = 0
  ModifiedPicard,   // w = theta'(psi)
  JaegerKacur,      // w = sup_xi secant slope of theta from psi
  LScheme,          // w = L (constant)
  ModifiedLScheme,  // w = theta'(psi) + M tau
  Newton,           // w = theta'(psi) plus convection of the frozen gradient
};

struct StepResult {
  DiscreteField next;
  double eta_lin = 0.0;  // increment size in the executing scheme's norm
  bool ok = false;
  std::string error;
  double rel_residual = 0.0;
};

/// Shared inputs of a single linearized solve within one time step.
template <constitutive_model M>
struct StepContext {
  const Mesh* mesh = nullptr;
  const M* model = nullptr;
  const QuadratureRule* rule = &default_rule();
  double tau = 1.0;
  std::function<double(double, double)> source;  // f^n(x, z); empty means 0
  const std::vector<int>* dirichlet = nullptr;   // increment dofs clamped to 0
  double l_value = 0.0;                          // LScheme weight
  double m_value = 0.0;                          // ModifiedLScheme: w = theta' + m_value * tau
};

/// Largest secant slope of theta seen from psi, the Jaeger-Kacur weight.
/// Grid scan over the model's working range refined by golden section;
/// theta'(psi) enters as the degenerate-secant candidate.
template <constitutive_model M>
double jaeger_kacur_weight(const M& model, double psi, double lo, double hi) {
  auto slope = [&](double xi) {
    if (xi == psi) return model.theta_prime(psi);
    return (model.theta(xi) - model.theta(psi)) / (xi - psi);
  };
  const int samples = 400;
  double best = model.theta_prime(psi);
  int best_i = -1;
  for (int i = 0; i <= samples; ++i) {
    const double xi = lo + (hi - lo) * i / samples;
    const double v = slope(xi);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (best_i >= 0) {
    const double dp = (hi - lo) / samples;
    double a = lo + dp * std::max(0, best_i - 1);
    double b = lo + dp * std::min(samples, best_i + 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = slope(c), fd = slope(d);
    for (int it = 0; it < 120 && (b - a) > 1e-12; ++it) {
      if (fc < fd) {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = slope(d);
      } else {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = slope(c);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

/// One linearized iteration. prev_time is theta's state at the previous time
/// level, prev_iter the previous iterate (with Dirichlet data of the new time
/// level already imposed).
template <constitutive_model M>
StepResult generic_step(Scheme scheme, const DiscreteField& prev_time,
                        const DiscreteField& prev_iter, const StepContext<M>& ctx) {
  const Mesh& mesh = *ctx.mesh;
  const M& model = *ctx.model;
  const QuadratureRule& rule = *ctx.rule;
  StepResult out;

  auto psi_at = [&](int e, const QPoint& qp) { return prev_iter.at(e, qp.bary); };
  auto cond = [&](int e, const QPoint& qp) { return model.conductivity(psi_at(e, qp)); };

  // Scheme weight in front of the zero-order term.
  std::function<double(int, const QPoint&)> weight;
  switch (scheme) {
    case Scheme::Picard:
      weight = [](int, const QPoint&) { return 0.0; };
      break;
    case Scheme::ModifiedPicard:
      weight = [&](int e, const QPoint& qp) { return model.theta_prime(psi_at(e, qp)); };
      break;
    case Scheme::JaegerKacur:
      weight = [&](int e, const QPoint& qp) {
        return jaeger_kacur_weight(model, psi_at(e, qp), -50.0, 5.0);
      };
      break;
    case Scheme::LScheme:
      weight = [&](int, const QPoint&) { return ctx.l_value; };
      break;
    case Scheme::ModifiedLScheme:
      weight = [&](int e, const QPoint& qp) {
        return model.theta_prime(psi_at(e, qp)) + ctx.m_value * ctx.tau;
      };
      break;
    case Scheme::Newton:
      weight = [&](int e, const QPoint& qp) { return model.theta_prime(psi_at(e, qp)); };
      break;
  }

  SparseMatrix A = assemble_weighted_mass(mesh, rule, weight)
                       .plus(assemble_weighted_stiffness(mesh, rule, cond, ctx.tau));
  if (scheme == Scheme::Newton) {
    auto bvec = [&](int e, const QPoint& qp) -> Vec2 {
      const Vec2 grad = prev_iter.gradient(e);
      return model.conductivity_prime(psi_at(e, qp)) * Vec2{grad.x, grad.z + 1.0};
    };
    A = A.plus(assemble_convection(mesh, rule, bvec, ctx.tau));
  }

  auto f = [&](int e, const QPoint& qp) {
    return ctx.source ? ctx.source(qp.x.x, qp.x.z) : 0.0;
  };
  auto theta_prev = [&](int e, const QPoint& qp) { return model.theta(psi_at(e, qp)); };
  auto theta_old = [&](int e, const QPoint& qp) { return model.theta(prev_time.at(e, qp.bary)); };
  auto gvec = [&](int e, const QPoint&) -> Vec2 {
    const Vec2 grad = prev_iter.gradient(e);
    return {grad.x, grad.z + 1.0};
  };
  Eigen::VectorXd rhs = assemble_rhs(mesh, rule, ctx.tau, f, theta_prev, theta_old, cond, gvec);

  static const std::vector<int> no_dofs;
  const std::vector<int>& dofs = ctx.dirichlet ? *ctx.dirichlet : no_dofs;
  auto [Ad, bd] = apply_dirichlet(A, rhs, dofs, std::vector<double>(dofs.size(), 0.0));

  LinearSolveResult sol = solve_linear(Ad, bd);
  out.rel_residual = sol.rel_residual;
  if (!sol.ok) {
    out.error = "linear solve failed: " + sol.message;
    return out;
  }

  out.next = DiscreteField(mesh, prev_iter.values + sol.x);
  if (!out.next.finite()) {
    out.error = "non-finite iterate";
    return out;
  }
  DiscreteField incr(mesh, sol.x);
  out.eta_lin = weighted_energy_norm(mesh, rule, incr, weight, cond, ctx.tau);
  if (!std::isfinite(out.eta_lin)) {
    out.error = "non-finite increment norm";
    return out;
  }
  out.ok = true;
  return out;
}

template <constitutive_model M>
StepResult l_scheme_step(const DiscreteField& prev_time, const DiscreteField& prev_iter,
                         const StepContext<M>& ctx) {
  if (!(ctx.l_value > 0.0)) throw std::invalid_argument("l_scheme_step: L must be positive");
  return generic_step(Scheme::LScheme, prev_time, prev_iter, ctx);
}

template <constitutive_model M>
StepResult newton_step(const DiscreteField& prev_time, const DiscreteField& prev_iter,
                       const StepContext<M>& ctx) {
  return generic_step(Scheme::Newton, prev_time, prev_iter, ctx);
}

}  // namespace richards

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "richards/constitutive.hpp"
#include "richards/eqflux.hpp"
#include "richards/estimate.hpp"
#include "richards/field.hpp"
#include "richards/linearize.hpp"
#include "richards/mesh.hpp"

namespace richards {

enum class Strategy {
  PureL,       // fixed-L L-scheme
  PureNewton,  // Newton only
  AdaptiveLN,  // a-posteriori switching between L-scheme and Newton
  AdaptiveL,   // L-scheme with a-posteriori L adjustment
};

struct SolverConfig {
  Strategy strategy = Strategy::AdaptiveLN;
  double l_value = std::numeric_limits<double>::quiet_NaN();  // NaN: use the case's L1
  double c_tol = 1.5;
  double stop_tol = 1e-7;
  int max_iters = 500;
  double epsilon_deg = std::numeric_limits<double>::quiet_NaN();  // NaN: 1e-4 * sup theta'
  // Equilibrated flux feeding the switch indicators and their convection
  // constant. Costs one RT0 solve per iteration only while degenerate
  // elements exist; with none the flux is identically zero, so non-degenerate
  // runs reduce to the zero-sigma form at no cost. Keeping it on is what
  // makes the convection gate hold the L-scheme through the early iterations
  // of a saturated start instead of handing a near-saturation state to
  // Newton.
  bool use_eqflux = true;
  double divergence_factor = 1e8;  // eta_lin beyond this multiple of the first one diverges
};

/// One linearized solve within a time step, with everything the logs and the
/// indicator plots need. Optional entries stay empty where a quantity is not
/// defined for the executed scheme (or C_N >= 2 voided a bound).
struct IterationRecord {
  int step = 0;
  int iter = 0;       // 1-based within the step
  char scheme = 'L';  // 'L' or 'N'
  double eta_lin = 0.0;
  std::optional<double> eta_ln, eta_nl, eta_ll, c_n, eff_index;
  double l_value = 0.0;  // L in force (L-scheme rows)
  double wall_ms = 0.0;
};

struct StepSummary {
  int step = 0;
  int iters = 0, l_iters = 0, n_iters = 0;
  bool converged = false;
};

/// A recorded breach of a proven bound: eta_lin of iteration iter exceeded
/// the bound computed at the preceding iteration.
struct GuaranteeViolation {
  int step = 0, iter = 0;
  char kind = ' ';  // 'S' switch bound, 'A' same-L bound
  double eta_next = 0.0, bound = 0.0;
};

struct RunReport {
  std::vector<IterationRecord> records;
  std::vector<StepSummary> steps;
  bool converged = false;
  int failed_step = 0;  // 1-based step that diverged; 0 if none
  std::string failure;
  int total_iters = 0, total_l = 0, total_n = 0;
  std::vector<GuaranteeViolation> violations;
  double wall_ms = 0.0;
  DiscreteField final_field;  // last completed state
};

/// Dirichlet region paired with its time-dependent boundary value g(t, x, z).
struct DirichletCondition {
  BoundaryRegion region;
  std::function<double(double, double, double)> value;
};

/// Complete problem statement plus discretization defaults.
template <constitutive_model M>
struct CaseSpec {
  std::string name;
  Rect domain{};
  int nx = 1, nz = 1;
  double tau = 1.0;
  int steps = 1;
  M model;
  double l1 = 0.0, l2 = 0.0;  // reference L-scheme weights (l2 ~ sup theta')
  std::function<double(double, double)> initial;            // psi at t = 0
  std::function<double(double, double, double)> source;     // f(t, x, z); empty = 0
  std::vector<DirichletCondition> dirichlet;
  std::vector<std::string> notes;  // provenance remarks copied into manifests
};

/// Next scheme per the switching algorithm: on the L-scheme, stay while
/// C_N >= 2, switch to Newton once the switch bound drops to c_tol times the
/// current error; on Newton, fall back to the L-scheme as soon as the reverse
/// bound exceeds the current error (an unavailable bound counts as infinite).
inline Scheme switching_decision(Scheme current, double eta_lin, const SwitchEstimate& est_ln,
                                 const SwitchEstimate& est_nl, double c_tol) {
  if (current == Scheme::LScheme) {
    if (!(est_ln.c_n < 2.0)) return Scheme::LScheme;
    if (est_ln.available && est_ln.value <= c_tol * eta_lin) return Scheme::Newton;
    return Scheme::LScheme;
  }
  const double bound = est_nl.available ? est_nl.value : std::numeric_limits<double>::infinity();
  return bound > eta_lin ? Scheme::LScheme : Scheme::Newton;
}

struct LAdaptState {
  double l = 0.0;    // L in force
  double l_m = 0.0;  // highest L that was still too small
  double l_max = 0.0;
};

/// L update from the history of (eta_ll, eta_lin) pairs of this time step,
/// newest last. A breached same-L bound raises L by sqrt(2) up to l_max and
/// records the old L as too small; three consecutive ratios above 0.8 lower L
/// by 10%, never below 1.1 * l_m.
inline LAdaptState l_adaptive_update(LAdaptState s,
                                     const std::vector<std::pair<double, double>>& history) {
  if (history.empty()) return s;
  const auto [ll, lin] = history.back();
  if (ll > lin) {
    s.l_m = s.l;
    s.l = std::min(std::sqrt(2.0) * s.l, s.l_max);
    return s;
  }
  if (history.size() >= 3) {
    bool all = true;
    for (std::size_t k = history.size() - 3; k < history.size(); ++k)
      all = all && history[k].first > 0.8 * history[k].second;
    if (all) s.l = std::max(0.9 * s.l, 1.1 * s.l_m);
  }
  return s;
}

namespace detail {

template <constitutive_model M>
struct RunScratch {
  const Mesh* mesh = nullptr;
  std::vector<int> dirichlet_dofs;
  std::vector<std::pair<int, std::size_t>> dof_sources;  // (vertex, condition index)
  std::unique_ptr<FluxEquilibrator> equilibrator;
};

template <constitutive_model M>
void impose_dirichlet_values(DiscreteField& psi, const CaseSpec<M>& spec,
                             const RunScratch<M>& scratch, double t) {
  for (const auto& [v, ci] : scratch.dof_sources) {
    const Vec2 p = psi.mesh->vertex(v);
    psi.values[v] = spec.dirichlet[ci].value(t, p.x, p.z);
  }
}

}  // namespace detail

/// One backward-Euler step solved with the configured iteration strategy.
/// psi_old is the converged state of the previous time level; on success the
/// returned field is the new time level. Records, summaries and violations
/// append to the report.
template <constitutive_model M>
std::optional<DiscreteField> solve_time_step(const CaseSpec<M>& spec, const SolverConfig& config,
                                             const Mesh& mesh, detail::RunScratch<M>& scratch,
                                             const DiscreteField& psi_old, int step_index,
                                             double t_new, RunReport& report) {
  const QuadratureRule& rule = default_rule();
  // The switch indicators sample their nonlinear coefficients at element
  // corners (see vertex_rule); assembly and the iteration energy norm keep
  // the interior rule so the linear systems and the contraction measurements
  // stay at full accuracy.
  const QuadratureRule& irule = vertex_rule();
  const double l_theta = spec.model.sup_theta_prime();
  const double epsilon =
      std::isnan(config.epsilon_deg) ? 1e-4 * l_theta : config.epsilon_deg;

  StepContext<M> ctx;
  ctx.mesh = &mesh;
  ctx.model = &spec.model;
  ctx.rule = &rule;
  ctx.tau = spec.tau;
  if (spec.source)
    ctx.source = [&spec, t_new](double x, double z) { return spec.source(t_new, x, z); };
  ctx.dirichlet = &scratch.dirichlet_dofs;

  LAdaptState lstate;
  double l_cur;
  switch (config.strategy) {
    case Strategy::AdaptiveL:
      lstate.l_max = l_theta;
      lstate.l_m = l_theta / 8.0;
      lstate.l = lstate.l_m;
      l_cur = lstate.l;
      break;
    default:
      l_cur = std::isnan(config.l_value) ? spec.l1 : config.l_value;
      break;
  }
  Scheme scheme = config.strategy == Strategy::PureNewton ? Scheme::Newton : Scheme::LScheme;

  DiscreteField psi_prev = psi_old;  // previous iterate
  detail::impose_dirichlet_values(psi_prev, spec, scratch, t_new);

  StepSummary summary;
  summary.step = step_index;

  // Bound computed at the previous iteration, applicable to this one.
  std::optional<double> prev_switch_bound;  // valid when this iter runs Newton
  std::optional<double> prev_same_l_bound;  // valid when this iter repeats the same L
  double prev_l = 0.0;
  Scheme prev_scheme = scheme;
  std::vector<std::pair<double, double>> lad_history;
  double first_eta = 0.0;

  auto fail = [&](const std::string& why) {
    report.converged = false;
    report.failed_step = step_index;
    report.failure = why;
    return std::nullopt;
  };

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const auto tic = std::chrono::steady_clock::now();
    ctx.l_value = l_cur;
    StepResult sr = scheme == Scheme::Newton ? newton_step(psi_old, psi_prev, ctx)
                                             : l_scheme_step(psi_old, psi_prev, ctx);
    if (!sr.ok) {
      report.steps.push_back(summary);
      return fail("iteration " + std::to_string(iter) + ": " + sr.error);
    }

    IterationRecord rec;
    rec.step = step_index;
    rec.iter = iter;
    rec.scheme = scheme == Scheme::Newton ? 'N' : 'L';
    rec.eta_lin = sr.eta_lin;
    rec.l_value = scheme == Scheme::Newton ? 0.0 : l_cur;

    // Indicators on the completed pair (sr.next, psi_prev).
    RTField sigma;
    const RTField* sigma_ptr = nullptr;
    if (config.use_eqflux) {
      if (!scratch.equilibrator)
        scratch.equilibrator =
            std::make_unique<FluxEquilibrator>(mesh, spec.model.conductivity(0.0));
      const std::vector<char> deg = degenerate_elements(mesh, irule, sr.next, epsilon, spec.model);
      if (scheme == Scheme::Newton) {
        sigma = equilibrated_flux(
            mesh, irule, sr.next, psi_prev, spec.tau,
            [&](int e, const QPoint& qp) { return spec.model.theta_prime(psi_prev.at(e, qp.bary)); },
            deg, spec.model, *scratch.equilibrator);
      } else {
        sigma = equilibrated_flux(
            mesh, irule, sr.next, psi_prev, spec.tau,
            [&](int, const QPoint&) { return l_cur; }, deg, spec.model, *scratch.equilibrator);
      }
      sigma_ptr = &sigma;
    }

    SwitchEstimate est_ln, est_nl, est_ll;
    const bool adaptive = config.strategy == Strategy::AdaptiveLN;
    if (scheme == Scheme::LScheme) {
      if (adaptive) {
        est_ln = eta_l_to_n(mesh, irule, sr.next, psi_prev, spec.tau, l_cur, epsilon, spec.model,
                            sigma_ptr);
        rec.c_n = est_ln.c_n;
        if (est_ln.available) rec.eta_ln = est_ln.value;
      }
      est_ll = eta_l_to_l(mesh, irule, sr.next, psi_prev, spec.tau, l_cur, spec.model);
      rec.eta_ll = est_ll.value;
    } else {
      // An executed Newton pair has no unresolved front between its iterates,
      // so this indicator keeps the interior rule the norms use.
      est_nl = eta_n_to_l(mesh, rule, sr.next, psi_prev, spec.tau, epsilon, spec.model, sigma_ptr);
      rec.c_n = est_nl.c_n;
      if (est_nl.available) rec.eta_nl = est_nl.value;
    }

    // Realized-error checks against the bounds from the previous iteration.
    // A Newton bound presumes the convection constant stays below 2 across the
    // executed pair; availability already guarantees that at the issuing
    // iterate, so only the landing iterate needs checking. A step that lands
    // with C_N >= 2 left the regime the bound covers (the controller discards
    // that trajectory anyway), so no effectivity is recorded for it.
    constexpr double slack = 1.0 + 1e-9;
    if (scheme == Scheme::Newton && prev_switch_bound && rec.c_n && *rec.c_n < 2.0) {
      rec.eff_index = effectivity_index(*prev_switch_bound, sr.eta_lin);
      if (sr.eta_lin > *prev_switch_bound * slack)
        report.violations.push_back({step_index, iter, 'S', sr.eta_lin, *prev_switch_bound});
    }
    if (scheme == Scheme::LScheme && prev_scheme == Scheme::LScheme && prev_same_l_bound &&
        prev_l == l_cur) {
      if (sr.eta_lin > *prev_same_l_bound * slack)
        report.violations.push_back({step_index, iter, 'A', sr.eta_lin, *prev_same_l_bound});
    }

    summary.iters += 1;
    (scheme == Scheme::Newton ? summary.n_iters : summary.l_iters) += 1;

    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic)
                      .count();
    report.records.push_back(rec);

    if (sr.eta_lin < config.stop_tol) {
      summary.converged = true;
      report.steps.push_back(summary);
      return sr.next;
    }
    if (iter == 1) {
      first_eta = sr.eta_lin;
    } else if (sr.eta_lin > config.divergence_factor * first_eta) {
      report.steps.push_back(summary);
      return fail("iteration " + std::to_string(iter) + ": eta_lin exceeded " +
                  std::to_string(config.divergence_factor) + " times the first iteration");
    }

    // Hand-over state for the next iteration.
    prev_scheme = scheme;
    prev_l = l_cur;
    prev_switch_bound.reset();
    prev_same_l_bound.reset();
    if (scheme == Scheme::LScheme) {
      if (adaptive && est_ln.available) prev_switch_bound = est_ln.value;
      prev_same_l_bound = est_ll.value;
    } else if (est_nl.available) {
      prev_switch_bound = est_nl.value;
    }

    switch (config.strategy) {
      case Strategy::AdaptiveLN:
        scheme = switching_decision(scheme, sr.eta_lin, est_ln, est_nl, config.c_tol);
        break;
      case Strategy::AdaptiveL:
        lad_history.emplace_back(est_ll.value, sr.eta_lin);
        lstate = l_adaptive_update(lstate, lad_history);
        l_cur = lstate.l;
        break;
      default:
        break;
    }
    psi_prev = sr.next;
  }
  report.steps.push_back(summary);
  return fail("no convergence within " + std::to_string(config.max_iters) + " iterations");
}

/// Time loop over the case's backward-Euler steps.
template <constitutive_model M>
RunReport run_case(const CaseSpec<M>& spec, const SolverConfig& config) {
  if (spec.steps < 1) throw std::invalid_argument("run_case: steps must be >= 1");
  if (!(spec.tau > 0.0)) throw std::invalid_argument("run_case: tau must be positive");
  if (!spec.initial) throw std::invalid_argument("run_case: initial condition required");
  const auto tic = std::chrono::steady_clock::now();

  const Mesh mesh = Mesh::structured(spec.nx, spec.nz, spec.domain);
  detail::RunScratch<M> scratch;
  scratch.mesh = &mesh;
  for (std::size_t ci = 0; ci < spec.dirichlet.size(); ++ci) {
    for (int v : tag_boundary(mesh, spec.dirichlet[ci].region)) {
      scratch.dof_sources.emplace_back(v, ci);
      scratch.dirichlet_dofs.push_back(v);
    }
  }
  std::sort(scratch.dirichlet_dofs.begin(), scratch.dirichlet_dofs.end());
  scratch.dirichlet_dofs.erase(
      std::unique(scratch.dirichlet_dofs.begin(), scratch.dirichlet_dofs.end()),
      scratch.dirichlet_dofs.end());

  RunReport report;
  report.converged = true;
  DiscreteField psi = DiscreteField::interpolate(mesh, spec.initial);
  report.final_field = psi;

  for (int n = 1; n <= spec.steps; ++n) {
    const double t_new = spec.tau * n;
    auto next = solve_time_step(spec, config, mesh, scratch, psi, n, t_new, report);
    if (!next) {
      report.converged = false;
      break;
    }
    psi = std::move(*next);
    report.final_field = psi;
  }

  for (const auto& s : report.steps) {
    report.total_iters += s.iters;
    report.total_l += s.l_iters;
    report.total_n += s.n_iters;
  }
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic).count();
  return report;
}

}  // namespace richards

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "richards/constitutive.hpp"
#include "richards/driver.hpp"
#include "richards/mesh.hpp"

namespace richards {

/// Strictly unsaturated medium on the unit square, one backward-Euler step.
/// The lower quarter starts at hydrostatic -z - 1/4, the rest at -4; the top
/// boundary holds the initial value, everything else is no-flow.
inline CaseSpec<VanGenuchtenModel> case_unsaturated() {
  VanGenuchtenParams p;
  p.theta_r = 0.026;
  p.theta_s = 0.42;
  p.k_s = 0.12;
  p.alpha = 0.551;
  p.n = 2.9;
  const Rect box{0.0, 0.0, 1.0, 1.0};
  return CaseSpec<VanGenuchtenModel>{
      .name = "case1",
      .domain = box,
      .nx = 20,
      .nz = 20,
      .tau = 0.01,
      .steps = 1,
      .model = VanGenuchtenModel(p),
      .l1 = 0.1,
      .l2 = 0.136,
      .initial = [](double, double z) { return z <= 0.25 ? -z - 0.25 : -4.0; },
      .source =
          [](double, double x, double z) {
            return z > 0.25 ? 0.06 * std::cos(4.0 * M_PI / 3.0 * z) * std::sin(x) : 0.0;
          },
      .dirichlet = {{region_side(box, 2, "top"),
                     [](double, double, double) { return -4.0; }}},
      .notes = {"single step: the horizon equals the chosen time step size"},
  };
}

/// Variably saturated medium on the unit square, one backward-Euler step.
/// Groundwater below z = 1/4 (hydrostatic -z + 1/4, saturated), vadose zone
/// above (-3); the top boundary holds -3, everything else is no-flow.
/// alt_params swaps in the silt-loam parameter column that one reading of
/// the experiment description points at; the retention-curve column is the
/// default because its stabilization bound matches the quoted value.
inline CaseSpec<VanGenuchtenModel> case_variably_saturated(bool alt_params = false) {
  VanGenuchtenParams p;
  if (alt_params) {
    p.theta_r = 0.131;
    p.theta_s = 0.396;
    p.k_s = 4.96e-2;
    p.alpha = 0.423;
    p.n = 2.06;
  } else {
    p.theta_r = 0.026;
    p.theta_s = 0.42;
    p.k_s = 0.12;
    p.alpha = 0.95;
    p.n = 2.9;
  }
  const Rect box{0.0, 0.0, 1.0, 1.0};
  return CaseSpec<VanGenuchtenModel>{
      .name = "case2",
      .domain = box,
      .nx = 40,
      .nz = 40,
      .tau = 0.01,
      .steps = 1,
      .model = VanGenuchtenModel(p),
      .l1 = alt_params ? 3.501e-2 : 0.15,
      .l2 = alt_params ? 4.501e-2 : 0.2341,
      .initial = [](double, double z) { return z < 0.25 ? -z + 0.25 : -3.0; },
      .source =
          [](double, double x, double z) {
            return z >= 0.25
                       ? 0.006 * std::cos(4.0 * M_PI / 3.0 * (z - 1.0)) * std::sin(2.0 * M_PI * x)
                       : 0.0;
          },
      .dirichlet = {{region_side(box, 2, "top"),
                     [](double, double, double) { return -3.0; }}},
      .notes = {alt_params ? std::string("alternate silt-loam parameter column selected")
                           : std::string("retention-curve parameter column (default)")},
  };
}

/// Groundwater recharge from a drainage trench on [0,2]x[0,3] in silt loam,
/// nine steps of half an hour (time unit: days). The trench occupies the top
/// boundary for x <= 1 with pressure ramping from -2 to 0.2 during the first
/// hour and a half; the right boundary below z = 1 stays hydrostatic; the
/// rest is no-flow. 41x61 grid: square cells of side 0.05.
inline CaseSpec<VanGenuchtenModel> case_trench() {
  VanGenuchtenParams p;
  p.theta_r = 0.131;
  p.theta_s = 0.396;
  p.k_s = 4.96e-2;
  p.alpha = 0.423;
  p.n = 2.06;
  const Rect box{0.0, 0.0, 2.0, 3.0};
  const double tol = boundary_tolerance(box);
  BoundaryRegion trench{"trench", [=](double x, double z) {
                          return std::abs(z - box.z1) <= tol && x <= 1.0 + tol;
                        }};
  BoundaryRegion aquifer{"aquifer", [=](double x, double z) {
                           return std::abs(x - box.x1) <= tol && z <= 1.0 + tol;
                         }};
  return CaseSpec<VanGenuchtenModel>{
      .name = "case3",
      .domain = box,
      .nx = 40,
      .nz = 60,
      .tau = 1.0 / 48.0,
      .steps = 9,
      .model = VanGenuchtenModel(p),
      // The stabilization bound sup theta' evaluates to 4.501e-2 for these
      // retention parameters (the closed-form maximum reproduces the quoted
      // significand to four digits); l2 is that bound by definition and l1
      // the quasi-optimal choice below it.
      .l1 = 3.501e-2,
      .l2 = 4.501e-2,
      .initial = [](double, double z) { return 1.0 - z; },
      .source = {},
      .dirichlet = {{trench,
                     [](double t, double, double) {
                       return t <= 1.0 / 16.0 ? -2.0 + 35.2 * t : 0.2;
                     }},
                    {aquifer, [](double, double, double z) { return 1.0 - z; }}},
      .notes = {"node count fixes only the grid total; square cells adopted"},
  };
}

/// Case lookup by CLI id.
inline CaseSpec<VanGenuchtenModel> builtin_case(const std::string& id, bool case2_alt = false) {
  if (id == "1" || id == "case1") return case_unsaturated();
  if (id == "2" || id == "case2") return case_variably_saturated(case2_alt);
  if (id == "3" || id == "case3") return case_trench();
  throw std::invalid_argument("unknown case id: " + id);
}

}  // namespace richards

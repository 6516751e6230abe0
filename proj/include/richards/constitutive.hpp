#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>

namespace richards {

/// Requirements on a soil-water retention model. psi is pressure head;
/// conductivity is the composed K(theta(psi)) as a function of psi.
template <class M>
concept constitutive_model = requires(const M m, double psi) {
  { m.theta(psi) } -> std::convertible_to<double>;
  { m.theta_prime(psi) } -> std::convertible_to<double>;
  { m.conductivity(psi) } -> std::convertible_to<double>;
  { m.conductivity_prime(psi) } -> std::convertible_to<double>;
  { m.sup_theta_prime() } -> std::convertible_to<double>;
};

struct VanGenuchtenParams {
  double theta_r = 0.0;  // residual water content
  double theta_s = 1.0;  // saturated water content
  double k_s = 1.0;      // saturated conductivity
  double alpha = 1.0;    // inverse air-entry pressure scale
  double n = 2.0;        // pore-size distribution exponent, > 1
};

/// Capacity and conductivity extremes over a pressure-head working range,
/// found by dense scan plus golden-section refinement.
struct ModelBounds {
  double psi_lo = 0.0, psi_hi = 0.0;
  double l_theta = 0.0;   // sup theta'
  double theta_m = 0.0;   // inf theta'
  double kappa_m = 0.0;   // inf K(theta(psi))
  double kappa_M = 0.0;   // sup K(theta(psi))
  double l_kappa = 0.0;   // sup |(K o theta)'|
};

/// Mualem-van Genuchten water content and relative conductivity.
///
/// Saturated branch (psi >= 0): theta = theta_s, K = k_s, both derivatives 0,
/// which equals the unsaturated-side limit for n > 2. The unsaturated branch
/// is evaluated through u = (-alpha psi)^n in log space so that extreme
/// arguments neither overflow nor produce 0 * inf.
class VanGenuchtenModel {
 public:
  explicit VanGenuchtenModel(VanGenuchtenParams p, double psi_lo = -50.0, double psi_hi = 5.0)
      : p_(p), m_(1.0 - 1.0 / p.n) {
    if (!(p.n > 1.0)) throw std::invalid_argument("van Genuchten: n must be > 1");
    if (!(p.alpha > 0.0) || !(p.k_s > 0.0) || !(p.theta_s > p.theta_r))
      throw std::invalid_argument("van Genuchten: invalid parameters");
    compute_bounds(psi_lo, psi_hi);
  }

  double theta(double psi) const {
    if (psi >= 0.0) return p_.theta_s;
    return p_.theta_r + (p_.theta_s - p_.theta_r) * std::exp(-m_ * log1pu(psi));
  }

  double theta_prime(double psi) const {
    if (psi >= 0.0) return 0.0;
    const double lu = logu(psi);
    return (p_.theta_s - p_.theta_r) * p_.alpha * (p_.n - 1.0) *
           std::exp(m_ * lu - (m_ + 1.0) * log1pu(psi));
  }

  double conductivity(double psi) const {
    if (psi >= 0.0) return p_.k_s;
    const double l1p = log1pu(psi);
    const double b = bterm(psi, l1p);
    return p_.k_s * std::exp(-0.5 * m_ * l1p) * b * b;
  }

  double conductivity_prime(double psi) const {
    if (psi >= 0.0) return 0.0;
    const double lu = logu(psi);
    const double l1p = log1pu(psi);
    const double b = bterm(psi, l1p);
    const double t1 = 0.5 * b * b * std::exp(m_ * lu - (0.5 * m_ + 1.0) * l1p);
    const double t2 = 2.0 * b * std::exp((2.0 * m_ - 1.0) * lu - (1.5 * m_ + 1.0) * l1p);
    return p_.k_s * p_.alpha * m_ * p_.n * (t1 + t2);
  }

  double sup_theta_prime() const { return bounds_.l_theta; }
  const VanGenuchtenParams& params() const { return p_; }
  const ModelBounds& bounds() const { return bounds_; }

 private:
  // log u with u = (-alpha psi)^n; -inf when the argument underflows to 0.
  double logu(double psi) const { return p_.n * std::log(-p_.alpha * psi); }

  // log(1 + u), switching to log u once 1 is negligible against u.
  double log1pu(double psi) const {
    const double lu = logu(psi);
    if (lu > 700.0) return lu;
    return std::log1p(std::exp(lu));
  }

  // B = 1 - s^m with s = u/(1+u). log s = -log1p(1/u) avoids the cancellation
  // of log u - log(1+u) for large u; expm1 keeps B accurate as s -> 1.
  double bterm(double psi, double /*l1p*/) const {
    const double log_s = -std::log1p(std::exp(-logu(psi)));
    return -std::expm1(m_ * log_s);
  }

  template <class F>
  static double golden_max(F&& f, double a, double b) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
      if (fc < fd) {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = f(d);
      } else {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = f(c);
      }
    }
    return std::max(fc, fd);
  }

  template <class F>
  static double scan_max(F&& f, double lo, double hi, int samples) {
    double best = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= samples; ++i) {
      const double psi = lo + (hi - lo) * i / samples;
      const double v = f(psi);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    const double dp = (hi - lo) / samples;
    const double a = lo + dp * std::max(0, best_i - 1);
    const double b = lo + dp * std::min(samples, best_i + 1);
    return std::max(best, golden_max(f, a, b));
  }

  void compute_bounds(double psi_lo, double psi_hi) {
    if (!(psi_hi > psi_lo)) throw std::invalid_argument("van Genuchten: empty working range");
    bounds_.psi_lo = psi_lo;
    bounds_.psi_hi = psi_hi;
    const int samples = 4096;
    bounds_.l_theta = scan_max([this](double s) { return theta_prime(s); }, psi_lo, psi_hi, samples);
    bounds_.theta_m = -scan_max([this](double s) { return -theta_prime(s); }, psi_lo, psi_hi, samples);
    bounds_.kappa_M = scan_max([this](double s) { return conductivity(s); }, psi_lo, psi_hi, samples);
    bounds_.kappa_m = -scan_max([this](double s) { return -conductivity(s); }, psi_lo, psi_hi, samples);
    bounds_.l_kappa =
        scan_max([this](double s) { return std::abs(conductivity_prime(s)); }, psi_lo, psi_hi, samples);
  }

  VanGenuchtenParams p_;
  double m_;
  ModelBounds bounds_;
};

static_assert(constitutive_model<VanGenuchtenModel>);

}  // namespace richards

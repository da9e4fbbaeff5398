#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seplab/distributions.hpp"
#include "seplab/error.hpp"
#include "seplab/networks.hpp"
#include "seplab/numerics.hpp"

namespace seplab {

struct BoundReport {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  std::vector<std::pair<std::string, double>> params;

  double term(const std::string& name) const {
    for (const auto& [k, v] : terms)
      if (k == name) return v;
    throw Error(ErrorKind::ConfigInvalid, "no bound term named " + name);
  }
};

inline nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json terms = nlohmann::json::object(), params = nlohmann::json::object();
  for (const auto& [k, v] : r.terms) terms[k] = v;
  for (const auto& [k, v] : r.params) params[k] = v;
  return {{"total", r.total}, {"terms", terms}, {"params", params}};
}

// ------------------------------------------------------------------ kappa

struct KappaResult {
  double value = 0.0;
  double maximizer = 0.0;
  Vec critical_points;  // in [-pi, pi], ascending
};

// max |cos(x) sin(2x)|: the critical points in [-pi, pi] are the roots of
// tan(x) = 2 cot(2x), one per quarter period, plus +-pi/2.
inline KappaResult kappa() {
  auto h = [](double x) { return std::cos(x) * std::sin(2.0 * x); };
  auto g = [](double x) { return std::tan(x) - 2.0 / std::tan(2.0 * x); };
  KappaResult r;
  const double q = kPi / 2.0, edge = 1e-7;
  for (int z = -2; z <= 1; ++z) {
    const double lo = z * q + edge, hi = (z + 1) * q - edge;
    r.critical_points.push_back(find_root(g, lo, hi, 0.0));
  }
  r.critical_points.push_back(-q);
  r.critical_points.push_back(q);
  std::sort(r.critical_points.begin(), r.critical_points.end());
  for (double x : r.critical_points) r.value = std::max(r.value, std::abs(h(x)));
  for (double x : r.critical_points) {
    if (x > 0.0 && x < q && std::abs(h(x)) >= r.value * (1.0 - 1e-15)) {
      r.maximizer = x;
      break;
    }
  }
  return r;
}

inline double kappa_value() {
  static const double k = kappa().value;
  return k;
}

// ------------------------------------------------------------------ sigma_d

inline double sigma_grid_residual(int d, double eps, double x0, double sigma) {
  return x0 * x0 / (2.0 * sigma * sigma) - std::log(d * sigma / (kSqrt2Pi * eps * x0));
}

// Noise level at which all d coordinates stay inside the plateau with probability >= 1 - eps.
inline double sigma_d_grid(int d, double eps, double x0) {
  if (d < 1 || !(eps > 0.0 && eps < 1.0) || !(x0 > 0.0 && x0 < 0.25))
    throw Error(ErrorKind::ConfigInvalid, "sigma_d_grid: need d >= 1, eps in (0,1), x0 in (0,1/4)");
  return find_root([&](double s) { return sigma_grid_residual(d, eps, x0, s); }, 1e-8, 10.0, 0.0);
}

inline double sigma_sine_residual(int d, double sigma) {
  const double dd = d;
  return 1.0 / (2.0 * sigma * sigma) - std::log(std::numbers::sqrt2 * dd * dd * sigma / std::sqrt(kPi));
}

inline double sigma_d_sine(int d) {
  if (d < 1) throw Error(ErrorKind::ConfigInvalid, "sigma_d_sine: need d >= 1");
  return find_root([&](double s) { return sigma_sine_residual(d, s); }, 1e-8, 10.0, 0.0);
}

// ------------------------------------------------------------------ elementary bounds

struct GaussianTailBound {
  double prob_bound = 0.0;  // bound on P(X >= x)
  double mean_bound = 0.0;  // bound on E[X 1{X >= x}]
};

inline GaussianTailBound gaussian_tail(double x, double sigma) {
  const double e = std::exp(-x * x / (2.0 * sigma * sigma));
  return {sigma / (x * kSqrt2Pi) * e, sigma / kSqrt2Pi * e};
}

inline double pv_bound(double sup_uprime, double sup_ux, double delta) {
  return 2.0 * (sup_uprime + sup_ux / delta);
}

inline double spherical_cap_area(int d, double r, double angle, const QuadratureConfig& cfg = {}) {
  if (d < 2 || !(angle > 0.0 && angle <= kPi / 2.0) || !(r > 0.0))
    throw Error(ErrorKind::ConfigInvalid, "spherical_cap_area: need d >= 2, angle in (0, pi/2], r > 0");
  const double lead = std::log(2.0) + 0.5 * (d - 1) * std::log(kPi) - std::lgamma(0.5 * (d - 1)) + (d - 1) * std::log(r);
  QuadratureConfig q = cfg;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-13;
  const double integral = d == 2 ? angle : integrate_adaptive([d](double t) { return std::pow(std::sin(t), d - 2); }, 0.0, angle, q);
  return std::exp(lead) * integral;
}

inline double sphere_area(int d, double r = 1.0) {
  return std::exp(std::log(2.0) + 0.5 * d * std::log(kPi) - std::lgamma(0.5 * d) + (d - 1) * std::log(r));
}

// Moments of theta_1 for theta uniform on the unit sphere in R^d.
inline double sphere_moment2(int d) { return 1.0 / d; }
inline double sphere_moment4(int d) { return 3.0 / (double(d) * (d + 2.0)); }

// Bound on E[exp(-ell^2 (1 - theta_1^2) / sigma^2)], splitting the colatitude
// range at pi/4 on each hemisphere.
inline double cap_expectation_bound(int d, double ell, double sigma) {
  if (d == 1) return 1.0;
  const double ratio = std::exp(std::lgamma(0.5 * d) - std::lgamma(0.5 * (d - 1)) - 0.5 * std::log(kPi));
  return 2.0 * ratio * (kPi / 4.0) * (std::pow(2.0, -0.5 * (d - 2)) + std::exp(-ell * ell / (2.0 * sigma * sigma)));
}

// ------------------------------------------------------------------ two-layer bound

struct USupBounds {
  double B1 = 0.0;  // bounds sup |u'|
  double B2 = 0.0;  // bounds sup |t u(t)|
};

// The undefined "a" of the source display is read as |b|.
inline USupBounds u_sup_bounds(int d, double sigma, double b) {
  const double k = kappa_value(), e = std::exp(1.0), se = std::sqrt(e), dd = d, ab = std::abs(b);
  const double re1 = 2.0 * sigma * sigma / e + 5.0 + b * b + 6.0 * dd * sigma / (k * se) + 4.0 * dd * dd / (k * k) +
                     dd * (dd - 1.0) / (k * k) + 4.0 * dd * (dd - 1.0) / (k * k);
  const double im1 = 2.0 * ab * sigma / se + 6.0 * dd * ab / k;
  const double re2 = 2.0 / e + 2.0 * dd * ab / (sigma * k * se) + 2.0 * dd / (sigma * k * se);
  const double im2 = ab / (sigma * se);
  const double kd = std::pow(k, d);
  return {kd * std::hypot(re1, im1), kd * std::hypot(re2, im2)};
}

// Bound on sup over (theta, b) of the single-neuron witness for the grid pair, d >= 2.
// Without b: the interior term is evaluated at the worst |b| = d + sqrt(d). Beyond
// that, every component mean sits at distance >= d - sqrt(d)/2 from b (grid points
// have norm up to 1.5 sqrt(d)), which gives the tail term.
inline BoundReport upper_bound_2l_explicit(int d, double sigma, std::optional<double> b = std::nullopt,
                                           const ActivationSpec& act = ActivationSpec::relu()) {
  if (d < 2) throw Error(ErrorKind::ConfigInvalid, "upper_bound_2l_explicit needs d >= 2");
  const double sd = std::sqrt(double(d));
  const double bmax = d + sd;
  const double bb = b ? std::min(std::abs(*b), bmax) : bmax;
  const auto u = u_sup_bounds(d, sigma, bb);
  const double pvb = pv_bound(u.B1, u.B2, 1.0);
  const double interior = std::sqrt(2.0 / kPi) * std::abs(act.pv_coeff()) * pvb;
  const double slope = std::abs(act.c_plus) + std::abs(act.c_minus);
  const double tail = slope * gaussian_tail(d - 0.5 * sd, sigma).mean_bound;
  BoundReport r;
  r.terms = {{"B1", u.B1}, {"B2", u.B2}, {"pv_bound", pvb}, {"interior", interior}, {"tail", tail}};
  r.params = {{"d", double(d)}, {"sigma", sigma}, {"b", bb}};
  r.total = std::max(interior, tail);
  return r;
}

// ------------------------------------------------------------------ sine pair bounds

struct VSegmentBounds {
  double first = 0.0;   // t in [0, 2 sigma^2 / (ell |theta_1|)]
  double second = 0.0;  // t in [2 sigma^2 / (ell |theta_1|), 1]
  double third = 0.0;   // t in [1, inf)
};

// Segment bounds on int sin(tb) (e^{-|t theta - ell e1|^2/2s^2} - e^{-|t theta + ell e1|^2/2s^2}) / t^2 dt.
// The second bound assumes ell >= 1.
inline VSegmentBounds sec4_v_bounds(const SinePairSpec& spec, const Vec& theta, double b) {
  const double t1 = std::abs(theta.at(0));
  if (t1 == 0.0) throw Error(ErrorKind::DegenerateTheta, "theta_1 = 0: the integrand vanishes identically");
  const double s2 = spec.sigma * spec.sigma, l = spec.ell, e = std::exp(1.0);
  VSegmentBounds r;
  // on the first segment sinh(ell t theta_1 / s^2)/t <= (ell theta_1 / s^2) cosh(2)
  r.first = 2.0 * (e * e + 1.0 / (e * e)) * std::abs(b) * std::exp(-l * l / (2.0 * s2));
  r.second = l * l * t1 * t1 * std::exp(-(l - 1.0) * (l - 1.0) / (2.0 * s2)) / (4.0 * s2 * s2);
  r.third = std::sqrt(2.0 * kPi * s2) * std::exp(-l * l * (1.0 - t1 * t1) / (2.0 * s2));
  return r;
}

// Pointwise bound on |sine witness(theta, b)|.
inline double sine_witness_bound(const SinePairSpec& spec, const Vec& theta, double b,
                                 const ActivationSpec& act = ActivationSpec::relu()) {
  const double t1 = std::abs(theta.at(0));
  if (t1 == 0.0) return 0.0;
  const auto v = sec4_v_bounds(spec, theta, b);
  const double s2 = spec.sigma * spec.sigma, l = spec.ell;
  const double kprime = l * t1 / s2 * std::exp(-l * l / (2.0 * s2));
  return std::sqrt(2.0 / kPi) * (std::abs(act.delta_coeff()) * kprime + std::abs(act.pv_coeff()) * (v.first + v.second + v.third));
}

// Bound on the random-feature MMD: square the pointwise bound (factor 4 for the
// four terms), average over theta ~ Unif(S^{d-1}), b ~ N(0,1), and sum the
// square roots of the resulting terms.
inline BoundReport rkhs_upper_bound_explicit(const SinePairSpec& spec, const ActivationSpec& act = ActivationSpec::relu()) {
  spec.validate();
  const int d = spec.d;
  const double s2 = spec.sigma * spec.sigma, l = spec.ell, e = std::exp(1.0);
  const double a2 = std::norm(act.pv_coeff()), dl2 = std::norm(act.delta_coeff());
  const double pre = 8.0 / kPi;
  const double cap = cap_expectation_bound(d, l, spec.sigma);
  const double m2 = sphere_moment2(d), m4 = sphere_moment4(d), eb2 = 1.0;
  const double delta_term = pre * dl2 * l * l * m2 * std::exp(-l * l / s2) / (s2 * s2);
  const double cap_term = pre * a2 * 2.0 * kPi * s2 * cap;
  const double c1 = 2.0 * (e * e + 1.0 / (e * e));
  const double near_zero_term = pre * a2 * c1 * c1 * eb2 * std::exp(-l * l / s2);
  const double middle_term = pre * a2 * std::pow(l, 4) * m4 * std::exp(-(l - 1.0) * (l - 1.0) / s2) / (16.0 * std::pow(s2, 4));
  BoundReport r;
  r.terms = {{"delta_term", delta_term},
             {"cap_term", cap_term},
             {"near_zero_term", near_zero_term},
             {"middle_term", middle_term},
             {"cap_expectation_bound", cap}};
  r.params = {{"d", double(d)}, {"sigma", spec.sigma}, {"ell", l}};
  r.total = std::sqrt(delta_term) + std::sqrt(cap_term) + std::sqrt(near_zero_term) + std::sqrt(middle_term);
  return r;
}

inline double three_layer_lower_formula(int d) {
  const double dd = d;
  return 1.0 / (513.0 * dd * dd + 512.0 * dd + 1.0);
}

}  // namespace seplab

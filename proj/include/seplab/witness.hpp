#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seplab/bounds.hpp"
#include "seplab/distributions.hpp"
#include "seplab/error.hpp"
#include "seplab/networks.hpp"
#include "seplab/numerics.hpp"

namespace seplab {

enum class IpmMethod { enumeration, fourier_pv, monte_carlo, random_feature };

inline const char* to_string(IpmMethod m) {
  switch (m) {
    case IpmMethod::enumeration: return "enumeration";
    case IpmMethod::fourier_pv: return "fourier_pv";
    case IpmMethod::monte_carlo: return "monte_carlo";
    case IpmMethod::random_feature: return "random_feature";
  }
  return "unknown";
}

struct Neuron {
  Vec theta;
  double b = 0.0;
};

struct IpmEstimate {
  double value = 0.0;
  double std_error = 0.0;
  IpmMethod method = IpmMethod::enumeration;
  std::uint64_t n_samples = 0;
  std::optional<Neuron> argmax;
  std::uint64_t seed = 0;
  std::optional<double> tail_bound;  // searches only: bound on the witness beyond the searched |b|
};

inline nlohmann::json to_json(const IpmEstimate& e) {
  nlohmann::json j = {{"value", e.value}, {"std_error", e.std_error}, {"method", to_string(e.method)},
                      {"n", e.n_samples}, {"seed", e.seed}};
  j["argmax"] = e.argmax ? nlohmann::json{{"theta", e.argmax->theta}, {"b", e.argmax->b}} : nlohmann::json(nullptr);
  if (e.tail_bound) j["tail_bound"] = *e.tail_bound;
  return j;
}

inline IpmEstimate ipm_estimate_from_json(const nlohmann::json& j) {
  IpmEstimate e;
  e.value = j.at("value").get<double>();
  e.std_error = j.at("std_error").get<double>();
  const auto m = j.at("method").get<std::string>();
  if (m == "enumeration") e.method = IpmMethod::enumeration;
  else if (m == "fourier_pv") e.method = IpmMethod::fourier_pv;
  else if (m == "monte_carlo") e.method = IpmMethod::monte_carlo;
  else if (m == "random_feature") e.method = IpmMethod::random_feature;
  else throw Error(ErrorKind::IoFailure, "unknown method " + m);
  e.n_samples = j.at("n").get<std::uint64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("argmax").is_null()) e.argmax = Neuron{j["argmax"].at("theta").get<Vec>(), j["argmax"].at("b").get<double>()};
  if (j.contains("tail_bound")) e.tail_bound = j["tail_bound"].get<double>();
  return e;
}

// E[(Z - b)_+] for Z ~ N(m, s^2).
inline double relu_gaussian_mean(double m, double s, double b) {
  const double z = (m - b) / s;
  return (m - b) * normal_cdf(z) + s * normal_pdf(z);
}

// E[act(Z - b)] for Z ~ N(m, s^2), alpha = 1.
inline double act_gaussian_mean(const ActivationSpec& act, double m, double s, double b) {
  double r = 0.0;
  if (act.c_plus != 0.0) r += act.c_plus * relu_gaussian_mean(m, s, b);
  if (act.c_minus != 0.0) r += act.c_minus * relu_gaussian_mean(-m, s, -b);
  return r;
}

namespace detail {

inline void require_unit(const Vec& theta, int d) {
  if (int(theta.size()) != d) throw Error(ErrorKind::DimensionMismatch, "theta dimension differs from spec");
  if (std::abs(norm2(theta) - 1.0) > 1e-10) throw Error(ErrorKind::ConfigInvalid, "theta must be a unit vector");
}

inline void require_alpha1(const ActivationSpec& act) {
  if (act.alpha != 1) throw Error(ErrorKind::ConfigInvalid, "witness routes are implemented for alpha = 1");
}

}  // namespace detail

// The grid pair's signed measure pushed forward by x -> <theta, x>: 4^d Gaussian
// components of width sigma at <theta, beta>, each with weight +-2/4^d.
class GridProjection {
 public:
  GridProjection(const GridPairSpec& spec, const Vec& theta) : sigma_(spec.sigma) {
    if (spec.d > 12) throw Error(ErrorKind::DimensionTooLarge, "enumeration route supports d <= 12");
    detail::require_unit(theta, spec.d);
    means_.assign(1, 0.0);
    negative_.assign(1, 0);
    for (double t : theta) {
      std::vector<double> m2;
      std::vector<std::uint8_t> n2;
      m2.reserve(means_.size() * 4);
      n2.reserve(means_.size() * 4);
      for (std::size_t k = 0; k < means_.size(); ++k) {
        for (double beta : kGrid) {
          m2.push_back(means_[k] + t * beta);
          n2.push_back(negative_[k] ^ std::uint8_t(beta < 0));
        }
      }
      means_.swap(m2);
      negative_.swap(n2);
    }
    weight_ = 2.0 / double(means_.size());
  }

  double witness(double b, const ActivationSpec& act) const {
    double pos = 0.0, neg = 0.0;
    for (std::size_t k = 0; k < means_.size(); ++k) {
      const double v = act_gaussian_mean(act, means_[k], sigma_, b);
      (negative_[k] ? neg : pos) += v;
    }
    return weight_ * (pos - neg);
  }

 private:
  double sigma_;
  double weight_ = 0.0;
  std::vector<double> means_;
  std::vector<std::uint8_t> negative_;
};

inline double grid_witness_exact(const GridPairSpec& spec, const Vec& theta, double b,
                                 const ActivationSpec& act = ActivationSpec::relu()) {
  detail::require_alpha1(act);
  return GridProjection(spec, theta).witness(b, act);
}

struct FourierWitness {
  double value = 0.0;
  double imag_residual = 0.0;
};

inline QuadratureConfig default_witness_quadrature() {
  QuadratureConfig q;
  q.abs_tol = 1e-12;
  q.rel_tol = 1e-10;
  q.max_subdivisions = 20000;
  return q;
}

// Witness through the transform of the activation: with
//   u(t) = e^{-sigma^2 t^2/2 - i t b} prod_i sin(t theta_i) cos(t theta_i / 2),
// the integral equals sqrt(2/pi) i^d (-a p.v.[1/t](u') - delta u'(0)), where a and
// delta are the activation's principal-value and delta' coefficients.
inline FourierWitness grid_witness_fourier_detail(const GridPairSpec& spec, const Vec& theta, double b,
                                                  const ActivationSpec& act = ActivationSpec::relu(),
                                                  const QuadratureConfig& cfg = default_witness_quadrature()) {
  detail::require_alpha1(act);
  detail::require_unit(theta, spec.d);
  const int d = spec.d;
  const double s2 = spec.sigma * spec.sigma;
  auto uprime = [&](double t) -> cplx {
    thread_local Vec g, gp, suffix;
    g.resize(d);
    gp.resize(d);
    suffix.resize(d + 1);
    for (int i = 0; i < d; ++i) {
      const double x = t * theta[i];
      const double sx = std::sin(x), cx = std::cos(x), sh = std::sin(0.5 * x), ch = std::cos(0.5 * x);
      g[i] = sx * ch;
      gp[i] = theta[i] * (cx * ch - 0.5 * sx * sh);
    }
    suffix[d] = 1.0;
    for (int i = d - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * g[i];
    double prefix = 1.0, dP = 0.0;
    for (int i = 0; i < d; ++i) {
      dP += gp[i] * prefix * suffix[i + 1];
      prefix *= g[i];
    }
    const double P = prefix;
    const cplx E = std::exp(cplx(-0.5 * s2 * t * t, -t * b));
    return E * (dP + cplx(-s2 * t, -b) * P);
  };
  QuadratureConfig q = cfg;
  q.tail_cutoff = 12.0 / spec.sigma;
  // enough initial panels to resolve the oscillation of the product
  double freq = std::abs(b);
  for (double t : theta) freq += 1.5 * std::abs(t);
  q.initial_panels = std::max(cfg.initial_panels, int(std::ceil(q.tail_cutoff * freq / (2.0 * kPi))) + 1);
  const cplx pv = pv_integral(uprime, q);
  const cplx id = std::pow(cplx(0.0, 1.0), d);
  const cplx w = std::sqrt(2.0 / kPi) * id * (-act.pv_coeff() * pv - act.delta_coeff() * uprime(0.0));
  return {w.real(), w.imag()};
}

inline double grid_witness_fourier(const GridPairSpec& spec, const Vec& theta, double b,
                                   const ActivationSpec& act = ActivationSpec::relu(),
                                   const QuadratureConfig& cfg = default_witness_quadrature()) {
  const auto r = grid_witness_fourier_detail(spec, theta, b, act, cfg);
  if (std::abs(r.imag_residual) > 1e-8 * (1.0 + std::abs(r.value)))
    throw Error(ErrorKind::ImaginaryResidual, "imaginary part " + std::to_string(r.imag_residual));
  return r.value;
}

// Enumeration up to this dimension, transform route above it.
inline constexpr int kExactRouteMaxDim = 8;

inline double grid_witness(const GridPairSpec& spec, const Vec& theta, double b,
                           const ActivationSpec& act = ActivationSpec::relu()) {
  return spec.d <= kExactRouteMaxDim ? grid_witness_exact(spec, theta, b, act)
                                     : grid_witness_fourier(spec, theta, b, act);
}

// ------------------------------------------------------------------ sine pair witness

// Closed form through the transform of the activation. With q = ell |theta_1| and
// R = e^{-ell^2 (1 - theta_1^2) / 2 sigma^2} factored out,
//   W = sign(theta_1) R sqrt(2/pi) (-a J - i delta (q / sigma^2) e^{-q^2 / 2 sigma^2}),
//   J = int_0^inf sin(tb) e^{-(t-q)^2/2 sigma^2} (1 - e^{-2tq/sigma^2}) / t^2 dt.
inline double sine_witness(const SinePairSpec& spec, const Vec& theta, double b,
                           const ActivationSpec& act = ActivationSpec::relu(),
                           const QuadratureConfig& cfg = default_witness_quadrature()) {
  detail::require_alpha1(act);
  detail::require_unit(theta, spec.d);
  const double t1 = theta[0];
  if (t1 == 0.0) return 0.0;
  const double s2 = spec.sigma * spec.sigma, l = spec.ell;
  const double q = l * std::abs(t1), sgn = t1 > 0 ? 1.0 : -1.0;
  const double R = std::exp(-l * l * (1.0 - t1 * t1) / (2.0 * s2));
  const double g0 = std::exp(-q * q / (2.0 * s2));
  const double at_zero = b * 2.0 * q / s2 * g0;
  auto f = [&](double t) {
    if (t < 1e-6) return at_zero;
    return std::sin(t * b) * std::exp(-(t - q) * (t - q) / (2.0 * s2)) * -std::expm1(-2.0 * t * q / s2) / (t * t);
  };
  QuadratureConfig qc = cfg;
  const double upper = q + 40.0 * spec.sigma;
  qc.initial_panels = std::max(cfg.initial_panels, int(std::ceil(upper * std::abs(b) / (2.0 * kPi))) + 4);
  const double J = integrate_adaptive(f, 0.0, upper, qc);
  const cplx w = std::sqrt(2.0 / kPi) * (-act.pv_coeff() * J - cplx(0.0, 1.0) * act.delta_coeff() * (q / s2) * g0);
  if (std::abs(w.imag()) > 1e-8 * (1.0 + std::abs(w.real())))
    throw Error(ErrorKind::ImaginaryResidual, "sine witness imaginary part " + std::to_string(w.imag()));
  return sgn * R * w.real();
}

inline SinePairSpec sec4_spec(int d) { return {d, sigma_d_sine(d), std::sqrt(double(d))}; }

// |witness| at theta = e_1, b = pi / (2 ell), where sin(b ell) = 1.
inline double sec4_two_layer_lower(const SinePairSpec& spec, const ActivationSpec& act = ActivationSpec::relu()) {
  Vec e1(spec.d, 0.0);
  e1[0] = 1.0;
  return std::abs(sine_witness(spec, e1, kPi / (2.0 * spec.ell), act));
}

// ------------------------------------------------------------------ two-layer search

namespace detail {

inline Vec project_theta_b(Vec p, double bmax) {
  const std::size_t d = p.size() - 1;
  double n = 0.0;
  for (std::size_t i = 0; i < d; ++i) n += p[i] * p[i];
  n = std::sqrt(n);
  if (n == 0.0) {
    p[0] = 1.0;
    n = 1.0;
  }
  for (std::size_t i = 0; i < d; ++i) p[i] /= n;
  p[d] = std::clamp(p[d], -bmax, bmax);
  return p;
}

template <class Witness>
IpmEstimate search_witness(int d, Witness&& witness, const SearchConfig& cfg, RngStream& rng,
                           const std::vector<Vec>& forced_thetas, IpmMethod method) {
  const double bmax = d + std::sqrt(double(d));
  auto objective = [&](const Vec& p) {
    Vec th(p.begin(), p.end() - 1);
    return std::abs(witness(th, p.back()));
  };
  auto projector = [&](const Vec& p) { return project_theta_b(p, bmax); };
  // a coarse scan over b picks the starting offset for each direction
  auto with_best_b = [&](const Vec& theta) {
    const int n = 61;
    Vec p(theta);
    p.push_back(0.0);
    p = project_theta_b(p, bmax);
    Vec th(p.begin(), p.end() - 1);
    double best = -1.0, best_b = 0.0;
    for (int k = 0; k < n; ++k) {
      const double b = -bmax + 2.0 * bmax * k / (n - 1);
      const double v = std::abs(witness(th, b));
      if (v > best) {
        best = v;
        best_b = b;
      }
    }
    p.back() = best_b;
    return p;
  };
  std::vector<Vec> forced;
  for (const auto& th : forced_thetas) forced.push_back(with_best_b(th));
  auto sampler = [&](RngStream& r) { return with_best_b(sample_sphere(d, r)); };
  auto res = maximize_multistart(objective, projector, cfg, rng, sampler, forced);
  IpmEstimate e;
  e.value = res.value;
  e.method = method;
  e.seed = rng.seed();
  e.argmax = Neuron{Vec(res.argmax.begin(), res.argmax.end() - 1), res.argmax.back()};
  return e;
}

}  // namespace detail

// sup over |theta| = 1, |b| <= d + sqrt(d) of |witness|. The diagonal direction is
// always among the starts.
inline IpmEstimate two_layer_ipm_search(const GridPairSpec& spec, const ActivationSpec& act,
                                        const SearchConfig& cfg, RngStream& rng) {
  spec.validate();
  auto witness = [&](const Vec& th, double b) { return grid_witness(spec, th, b, act); };
  const Vec diag(spec.d, 1.0 / std::sqrt(double(spec.d)));
  auto e = detail::search_witness(spec.d, witness, cfg, rng, {diag},
                                  spec.d <= kExactRouteMaxDim ? IpmMethod::enumeration : IpmMethod::fourier_pv);
  if (spec.d >= 2) e.tail_bound = upper_bound_2l_explicit(spec.d, spec.sigma, std::nullopt, act).term("tail");
  return e;
}

inline IpmEstimate two_layer_ipm_search(const SinePairSpec& spec, const ActivationSpec& act,
                                        const SearchConfig& cfg, RngStream& rng,
                                        const std::vector<Neuron>& extra_starts = {}) {
  spec.validate();
  auto witness = [&](const Vec& th, double b) { return sine_witness(spec, th, b, act); };
  Vec e1(spec.d, 0.0);
  e1[0] = 1.0;
  const double bmax = spec.d + std::sqrt(double(spec.d));
  auto objective = [&](const Vec& p) { return std::abs(witness(Vec(p.begin(), p.end() - 1), p.back())); };
  auto projector = [&](const Vec& p) { return detail::project_theta_b(p, bmax); };
  std::vector<Vec> forced;
  Vec p0 = e1;
  p0.push_back(kPi / (2.0 * spec.ell));
  forced.push_back(p0);
  for (const auto& n : extra_starts) {
    Vec p = n.theta;
    p.push_back(n.b);
    forced.push_back(p);
  }
  auto sampler = [&](RngStream& r) {
    Vec p = sample_sphere(spec.d, r);
    p.push_back(bmax * (2.0 * r.uniform() - 1.0));
    return p;
  };
  auto res = maximize_multistart(objective, projector, cfg, rng, sampler, forced);
  IpmEstimate e;
  e.value = res.value;
  e.method = IpmMethod::fourier_pv;
  e.seed = rng.seed();
  e.argmax = Neuron{Vec(res.argmax.begin(), res.argmax.end() - 1), res.argmax.back()};
  return e;
}

// ------------------------------------------------------------------ three-layer gap

struct ThreeLayerGap {
  IpmEstimate estimate;  // value = orientation * (E F(Z+) - E F(Z-))
  int orientation = 1;   // +1 when d = 0, 1 mod 4, -1 otherwise
  double mean_plus = 0.0;
  double mean_minus = 0.0;
};

inline ThreeLayerGap three_layer_gap(const GridPairSpec& spec, std::size_t n, RngStream& rng) {
  spec.validate();
  if (n < 1000) throw Error(ErrorKind::ConfigInvalid, "three_layer_gap needs n >= 1000");
  const auto F = build_F(spec);
  const auto relu = ActivationSpec::relu();
  auto moments = [&](const SampleBatch& batch) {
    double s = 0.0, ss = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      const double v = eval_three_layer(F, relu, batch.point(j));
      s += v;
      ss += v * v;
    }
    const double mean = s / n;
    return std::pair{mean, std::max(0.0, ss / n - mean * mean) * n / (n - 1.0)};
  };
  const auto [mp, vp] = moments(grid_sample(spec, Label::plus, n, rng));
  const auto [mm, vm] = moments(grid_sample(spec, Label::minus, n, rng));
  ThreeLayerGap g;
  g.orientation = plateau_orientation(spec.d);
  g.mean_plus = mp;
  g.mean_minus = mm;
  g.estimate.value = g.orientation * (mp - mm);
  g.estimate.std_error = std::sqrt(vp / n + vm / n);
  g.estimate.method = IpmMethod::monte_carlo;
  g.estimate.n_samples = n;
  g.estimate.seed = rng.seed();
  return g;
}

struct ThreeLayerCertificate {
  double lower_bound = 0.0;  // (gap - 3 SE) / PN_b(F)
  bool passes = false;
  double formula = 0.0;
  double path_norm = 0.0;
  ThreeLayerGap gap;
};

inline ThreeLayerCertificate three_layer_certificate(const GridPairSpec& spec, std::size_t n, RngStream& rng) {
  ThreeLayerCertificate c;
  c.gap = three_layer_gap(spec, n, rng);
  c.path_norm = path_norm_b(build_F(spec));
  c.lower_bound = (c.gap.estimate.value - 3.0 * c.gap.estimate.std_error) / c.path_norm;
  c.formula = three_layer_lower_formula(spec.d);
  c.passes = c.lower_bound >= c.formula;
  return c;
}

// ------------------------------------------------------------------ MMD

inline Neuron sample_feature(int d, RngStream& rng) {
  Neuron n;
  n.theta = sample_sphere(d, rng);
  n.b = rng.normal();
  return n;
}

namespace detail {

inline IpmEstimate rms_estimate(const Vec& w, IpmMethod method, std::uint64_t seed) {
  const double m = double(w.size());
  // scale first: at large d the witnesses sit far below sqrt(DBL_MIN)
  double scale = 0.0;
  for (double x : w) scale = std::max(scale, std::abs(x));
  IpmEstimate e;
  e.method = method;
  e.n_samples = w.size();
  e.seed = seed;
  if (scale == 0.0) return e;
  double s = 0.0, ss = 0.0;
  for (double x : w) {
    const double y = (x / scale) * (x / scale);
    s += y;
    ss += y * y;
  }
  const double mean = s / m;
  const double var = std::max(0.0, ss / m - mean * mean) * m / (m - 1.0);
  e.value = scale * std::sqrt(mean);
  e.std_error = scale * std::sqrt(var / m) / (2.0 * std::sqrt(mean));
  return e;
}

}  // namespace detail

// sqrt(E_tau[witness^2]) with tau = Unif(S^{d-1}) x N(0,1), Monte Carlo over tau and
// the deterministic witness inside. The error bar is the delta method on the mean.
template <class Spec>
IpmEstimate mmd_estimate(const Spec& spec, const ActivationSpec& act, int m_features, RngStream& rng) {
  if (m_features < 100) throw Error(ErrorKind::ConfigInvalid, "mmd_estimate needs at least 100 features");
  Vec w(m_features);
  for (int j = 0; j < m_features; ++j) {
    const auto f = sample_feature(spec.d, rng);
    if constexpr (std::is_same_v<Spec, SinePairSpec>) w[j] = sine_witness(spec, f.theta, f.b, act);
    else w[j] = grid_witness(spec, f.theta, f.b, act);
  }
  return detail::rms_estimate(w, IpmMethod::random_feature, rng.seed());
}

struct RandomFeatureMmd {
  double value = 0.0;
  double tau_se = 0.0;    // from the finite number of features
  double noise_se = 0.0;  // RMS standard error of the per-feature mean differences
};

inline RandomFeatureMmd random_feature_mmd(const SampleBatch& mu, const SampleBatch& nu,
                                           const std::vector<Neuron>& features, const ActivationSpec& act) {
  if (mu.d != nu.d) throw Error(ErrorKind::DimensionMismatch, "batches differ in dimension");
  const int d = mu.d;
  Vec delta(features.size());
  double noise = 0.0;
  auto moments = [&](const SampleBatch& batch, const Neuron& f) {
    double s = 0.0, ss = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      const double* x = batch.data.data() + j * d;
      double z = -f.b;
      for (int k = 0; k < d; ++k) z += f.theta[k] * x[k];
      const double v = act(z);
      s += v;
      ss += v * v;
    }
    const double n = double(batch.size());
    const double mean = s / n;
    return std::pair{mean, std::max(0.0, ss / n - mean * mean) * n / (n - 1.0) / n};
  };
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto [m1, v1] = moments(mu, features[k]);
    const auto [m2, v2] = moments(nu, features[k]);
    delta[k] = m1 - m2;
    noise += v1 + v2;
  }
  const auto e = detail::rms_estimate(delta, IpmMethod::monte_carlo, 0);
  return {e.value, e.std_error, std::sqrt(noise / double(features.size()))};
}

template <class Spec>
IpmEstimate mmd_sample_crosscheck(const Spec& spec, const ActivationSpec& act, int m_features,
                                  std::size_t n_samples, RngStream& rng) {
  if (n_samples < 1000) throw Error(ErrorKind::ConfigInvalid, "mmd_sample_crosscheck needs n_samples >= 1000");
  std::vector<Neuron> features;
  for (int j = 0; j < m_features; ++j) features.push_back(sample_feature(spec.d, rng));
  SampleBatch mu, nu;
  if constexpr (std::is_same_v<Spec, SinePairSpec>) {
    const auto pair = make_sine_pair(spec);
    mu = sine_sample(pair, Label::plus, n_samples, rng);
    nu = sine_sample(pair, Label::minus, n_samples, rng);
  } else {
    mu = grid_sample(spec, Label::plus, n_samples, rng);
    nu = grid_sample(spec, Label::minus, n_samples, rng);
  }
  const auto r = random_feature_mmd(mu, nu, features, act);
  IpmEstimate e;
  e.value = r.value;
  e.std_error = std::hypot(r.tau_se, r.noise_se);
  e.method = IpmMethod::monte_carlo;
  e.n_samples = n_samples;
  e.seed = rng.seed();
  return e;
}

}  // namespace seplab

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "seplab/error.hpp"

namespace seplab {

using Vec = std::vector<double>;
using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2Pi = 2.5066282746310002;  // sqrt(2*pi)

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  // Truncation radius for improper integrals.
  double tail_cutoff = 50.0;
  // The interval is cut into this many equal panels before adapting.
  int initial_panels = 1;
};

namespace detail {

// 21-point Kronrod rule with its embedded 10-point Gauss rule on [-1, 1].
struct KronrodRule {
  std::vector<double> x;   // non-negative nodes, x[0] = 0
  std::vector<double> wk;  // Kronrod weights
  std::vector<double> wg;  // Gauss weights, zero where the node is Kronrod-only

  static const KronrodRule& get() {
    static const KronrodRule rule = [] {
      using boost::math::quadrature::gauss;
      using boost::math::quadrature::gauss_kronrod;
      KronrodRule r;
      const auto& ka = gauss_kronrod<double, 21>::abscissa();
      const auto& kw = gauss_kronrod<double, 21>::weights();
      const auto& ga = gauss<double, 10>::abscissa();
      const auto& gw = gauss<double, 10>::weights();
      r.x.assign(ka.begin(), ka.end());
      r.wk.assign(kw.begin(), kw.end());
      r.wg.assign(ka.size(), 0.0);
      for (std::size_t i = 0; i < ga.size(); ++i) {
        for (std::size_t j = 0; j < ka.size(); ++j) {
          if (std::abs(ka[j] - ga[i]) < 1e-15) r.wg[j] = gw[i];
        }
      }
      return r;
    }();
    return rule;
  }
};

template <class T>
struct Panel {
  double a, b;
  T value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

// One Kronrod panel; the error estimate uses the usual QUADPACK scaling.
template <class T, class F>
Panel<T> kronrod_panel(F& f, double a, double b) {
  const auto& r = KronrodRule::get();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const std::size_t n = r.x.size();
  std::vector<T> fv(2 * n - 1);
  fv[0] = f(c);
  for (std::size_t j = 1; j < n; ++j) {
    fv[2 * j - 1] = f(c - h * r.x[j]);
    fv[2 * j] = f(c + h * r.x[j]);
  }
  T k = r.wk[0] * fv[0], g = r.wg[0] * fv[0];
  double resabs = r.wk[0] * std::abs(fv[0]);
  for (std::size_t j = 1; j < n; ++j) {
    T s = fv[2 * j - 1] + fv[2 * j];
    k += r.wk[j] * s;
    g += r.wg[j] * s;
    resabs += r.wk[j] * (std::abs(fv[2 * j - 1]) + std::abs(fv[2 * j]));
  }
  const T mean = 0.5 * k;
  double resasc = r.wk[0] * std::abs(fv[0] - mean);
  for (std::size_t j = 1; j < n; ++j)
    resasc += r.wk[j] * (std::abs(fv[2 * j - 1] - mean) + std::abs(fv[2 * j] - mean));
  k *= h;
  g *= h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs(k - g);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
  if (roundoff > std::numeric_limits<double>::min()) err = std::max(err, roundoff);
  return {a, b, k, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod quadrature for real or complex integrands.
// An infinite endpoint is replaced by +-tail_cutoff; the integrand must already
// be negligible there, which is checked at a few points past the cutoff.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
  using T = std::decay_t<decltype(f(a))>;
  if (a == b) return T{};
  if (a > b) return T(-integrate_adaptive(f, b, a, cfg));

  auto check_tail = [&](double t) {
    const double span = std::max(1.0, std::abs(t));
    for (double s : {1.0, 1.5, 2.0}) {
      if (std::abs(f(s * t)) * span > cfg.abs_tol)
        throw Error(ErrorKind::NonConvergence,
                    "integrand not negligible beyond the truncation radius " + std::to_string(t));
    }
  };
  if (std::isinf(a) || std::isinf(b)) {
    const double T_ = cfg.tail_cutoff;
    if (std::isinf(b)) {
      if (a >= T_) return T{};
      check_tail(T_);
      b = T_;
    }
    if (std::isinf(a)) {
      if (b <= -T_) return T{};
      check_tail(-T_);
      a = -T_;
    }
  }

  std::priority_queue<detail::Panel<T>> heap;
  const int p0 = std::max(1, cfg.initial_panels);
  T total{};
  double total_err = 0.0;
  for (int i = 0; i < p0; ++i) {
    double lo = a + (b - a) * i / p0, hi = (i + 1 == p0) ? b : a + (b - a) * (i + 1) / p0;
    auto p = detail::kronrod_panel<T>(f, lo, hi);
    total += p.value;
    total_err += p.err;
    heap.push(p);
  }
  int splits = 0;
  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (splits >= cfg.max_subdivisions)
      throw Error(ErrorKind::NonConvergence,
                  "adaptive quadrature exhausted max_subdivisions, error estimate " +
                      std::to_string(total_err));
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw Error(ErrorKind::NonConvergence, "panel cannot be split further");
    auto left = detail::kronrod_panel<T>(f, worst.a, mid);
    auto right = detail::kronrod_panel<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++splits;
    if (splits % 64 == 0) {
      // refresh the running sums so cancellation does not accumulate
      auto copy = heap;
      total = T{};
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().err;
        copy.pop();
      }
    }
  }
  T sum{};
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

// Gauss-Hermite rule for the weight e^{-x^2}, from the Jacobi matrix eigenproblem.
struct HermiteRule {
  Vec nodes, weights;
};

inline const HermiteRule& gauss_hermite(int order = 200) {
  static std::mutex mu;
  static std::map<int, HermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  HermiteRule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  const double sqrt_pi = std::sqrt(kPi);
  for (int k = 0; k < order; ++k) {
    r.nodes[k] = es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    r.weights[k] = sqrt_pi * v0 * v0;
  }
  return cache.emplace(order, std::move(r)).first->second;
}

// E[f(X)] for X ~ N(mean, sd^2).
template <class F>
double gaussian_expectation(F&& f, double mean, double sd, int order = 200) {
  const auto& r = gauss_hermite(order);
  double s = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k)
    s += r.weights[k] * f(mean + std::numbers::sqrt2 * sd * r.nodes[k]);
  return s / std::sqrt(kPi);
}

// Bisection. Stops once |f| <= tol, the bracket is narrower than tol, or the
// bracket has no representable midpoint.
template <class F>
double find_root(F&& f, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(std::signbit(flo) != std::signbit(fhi)) || std::isnan(flo) || std::isnan(fhi))
    throw Error(ErrorKind::NoBracket, "f(lo) and f(hi) have the same sign");
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi) || hi - lo <= tol) break;
    const double fm = f(mid);
    if (std::abs(fm) <= tol || fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// p.v. int u(t)/t dt = int_0^inf (u(t) - u(-t))/t dt, truncated at tail_cutoff.
// Inside |t| < eps_sing the integrand is replaced by 2u'(0) (central difference).
template <class U>
cplx pv_integral(U&& u, const QuadratureConfig& cfg, double eps_sing = 1e-6) {
  const double T = cfg.tail_cutoff;
  const auto& rule = detail::KronrodRule::get();
  const double first_node = (T / std::max(1, cfg.initial_panels)) * 0.5 * (1.0 - rule.x.back());
  if (eps_sing >= first_node)
    throw Error(ErrorKind::SingularitySpacing,
                "singular window " + std::to_string(eps_sing) +
                    " reaches the first quadrature node " + std::to_string(first_node));
  const cplx at_zero = (cplx(u(eps_sing)) - cplx(u(-eps_sing))) / eps_sing;
  auto g = [&](double t) -> cplx {
    if (t < eps_sing) return at_zero;
    return (cplx(u(t)) - cplx(u(-t))) / t;
  };
  if (std::abs(cplx(u(T))) + std::abs(cplx(u(-T))) > cfg.abs_tol)
    throw Error(ErrorKind::NonConvergence, "u does not decay by the truncation radius");
  return integrate_adaptive(g, 0.0, T, cfg);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x5e91ab01u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double uniform() { return unif_(engine_); }
  double normal() { return norm_(engine_); }
  std::uint64_t bits() { return engine_(); }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_, stream_id_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

inline double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec sample_sphere(int d, RngStream& rng) {
  Vec v(d);
  double n = 0.0;
  do {
    for (auto& x : v) x = rng.normal();
    n = norm2(v);
  } while (n == 0.0);
  for (auto& x : v) x /= n;
  return v;
}

struct SearchConfig {
  int n_starts = 8;
  int max_iters = 60;
  double step_init = 0.1;
  double grad_tol = 1e-14;
};

struct SearchResult {
  Vec argmax;
  double value = -std::numeric_limits<double>::infinity();
};

namespace detail {

// Projected ascent along the normalized finite-difference gradient, with a
// step that doubles on success and halves on failure.
template <class Obj, class Proj>
SearchResult ascend(Obj& obj, Proj& proj, Vec x, const SearchConfig& cfg) {
  x = proj(x);
  double fx = obj(x);
  double step = cfg.step_init;
  const double min_step = 1e-12;
  Vec g(x.size()), y(x.size());
  for (int it = 0; it < cfg.max_iters && step >= min_step; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      y = x;
      y[i] += h;
      g[i] = (obj(proj(y)) - fx) / h;
    }
    const double gn = norm2(g);
    if (!(gn > cfg.grad_tol)) break;
    bool moved = false;
    while (step >= min_step) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + step * g[i] / gn;
      Vec py = proj(y);
      const double fy = obj(py);
      if (fy > fx) {
        x = std::move(py);
        fx = fy;
        step = std::min(2.0 * step, 4.0 * cfg.step_init);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {x, fx};
}

}  // namespace detail

// Multistart maximization: forced starts first, then cfg.n_starts draws from
// `sampler(rng)`. Ties keep the first-found maximizer.
template <class Obj, class Proj, class Sampler>
SearchResult maximize_multistart(Obj&& objective, Proj&& projector, const SearchConfig& cfg,
                                 RngStream& rng, Sampler&& sampler,
                                 const std::vector<Vec>& forced_starts = {}) {
  SearchResult best;
  auto consider = [&](const Vec& start) {
    auto r = detail::ascend(objective, projector, start, cfg);
    if (best.argmax.empty() || r.value > best.value) best = std::move(r);
  };
  for (const auto& s : forced_starts) consider(s);
  for (int k = 0; k < cfg.n_starts; ++k) consider(sampler(rng));
  return best;
}

// Same, with starts drawn as projected standard Gaussian vectors of size dim.
template <class Obj, class Proj>
SearchResult maximize_multistart(Obj&& objective, Proj&& projector, int dim,
                                 const SearchConfig& cfg, RngStream& rng) {
  auto sampler = [dim](RngStream& r) {
    Vec v(dim);
    for (auto& x : v) x = r.normal();
    return v;
  };
  return maximize_multistart(objective, projector, cfg, rng, sampler);
}

}  // namespace seplab

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "seplab/numerics.hpp"

using namespace seplab;

TEST(Integrate, Polynomial) {
  EXPECT_NEAR(integrate_adaptive([](double x) { return x; }, 0.0, 1.0), 0.5, 1e-15);
}

TEST(Integrate, GaussianOverRealLine) {
  auto f = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  EXPECT_NEAR(integrate_adaptive(f, -INFINITY, INFINITY), 1.0, 1e-10);
}

TEST(Integrate, DampedSineHalfLine) {
  auto f = [](double x) { return std::exp(-x) * std::sin(x); };
  EXPECT_NEAR(integrate_adaptive(f, 0.0, INFINITY), 0.5, 1e-8);
  // Riemann cross-check on [0, 50]
  double s = 0.0;
  const int n = 1000000;
  const double h = 50.0 / n;
  for (int i = 0; i < n; ++i) s += f((i + 0.5) * h) * h;
  EXPECT_NEAR(s, 0.5, 1e-8);
}

TEST(Integrate, OddIntegrandVanishes) {
  auto f = [](double x) { return x * x * x * std::exp(-x * x) + std::sin(3.0 * x); };
  EXPECT_NEAR(integrate_adaptive(f, -4.0, 4.0), 0.0, 1e-10);
}

TEST(Integrate, ComplexIntegrand) {
  auto f = [](double x) { return std::exp(cplx(0.0, x)); };
  const cplx expect = (std::exp(cplx(0.0, 1.0)) - 1.0) / cplx(0.0, 1.0);
  EXPECT_LT(std::abs(integrate_adaptive(f, 0.0, 1.0) - expect), 1e-14);
}

TEST(Integrate, NonConvergenceIsReported) {
  QuadratureConfig q;
  q.max_subdivisions = 3;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-15;
  auto f = [](double x) { return std::sin(1.0 / (x + 1e-3)); };
  try {
    integrate_adaptive(f, 0.0, 1.0, q);
    FAIL() << "expected NonConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
  }
}

TEST(GaussHermite, Moments) {
  EXPECT_NEAR(gaussian_expectation([](double x) { return x * x; }, 0.7, 1.3), 0.49 + 1.69, 1e-12);
  EXPECT_NEAR(gaussian_expectation([](double x) { return std::cos(x); }, 0.3, 0.8),
              std::cos(0.3) * std::exp(-0.32), 1e-12);
}

TEST(FindRoot, Examples) {
  EXPECT_NEAR(find_root([](double x) { return x - 1.0; }, 0.0, 2.0, 1e-14), 1.0, 1e-14);
  EXPECT_NEAR(find_root([](double x) { return x * x - 2.0; }, 1.0, 2.0, 1e-12), std::sqrt(2.0), 1e-8);
  auto g = [](double x) { return std::tan(x) - 2.0 / std::tan(2.0 * x); };
  const double r = find_root(g, 1e-3, M_PI / 2 - 1e-3, 0.0);
  // closed form: tan^2 x = 1/2
  EXPECT_NEAR(r, std::atan(1.0 / std::sqrt(2.0)), 1e-12);
}

TEST(FindRoot, ResidualWithinTenTol) {
  const double tol = 1e-9;
  auto f = [](double x) { return std::exp(x) - 3.0; };
  const double r = find_root(f, 0.0, 5.0, tol);
  EXPECT_LE(std::abs(f(r)), 10 * tol);
}

TEST(FindRoot, NoBracket) {
  try {
    find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoBracket);
  }
}

TEST(NormalCdf, Values) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(40.0), 1.0, 1e-15);
  const double q = integrate_adaptive([](double x) { return normal_pdf(x); }, -INFINITY, 1.0, oracle::tight());
  EXPECT_NEAR(normal_cdf(1.0), q, 1e-11);
  EXPECT_NEAR(normal_cdf(1.0), 0.841344746, 1e-9);
  for (double x : {0.1, 1.7, 3.3}) EXPECT_NEAR(normal_cdf(-x), 1.0 - normal_cdf(x), 1e-15);
}

TEST(PrincipalValue, Examples) {
  QuadratureConfig q = oracle::tight();
  q.tail_cutoff = 12.0;
  q.initial_panels = 4;
  auto even = [](double t) { return cplx(std::exp(-t * t)); };
  EXPECT_LT(std::abs(pv_integral(even, q)), 1e-12);
  auto lin = [](double t) { return cplx(t * std::exp(-t * t)); };
  EXPECT_LT(std::abs(pv_integral(lin, q) - std::sqrt(M_PI)), 1e-8);
  // p.v. int sin(t) e^{-t^2/2} / t dt = pi erf(1/sqrt 2)
  auto sn = [](double t) { return cplx(std::sin(t) * std::exp(-0.5 * t * t)); };
  EXPECT_LT(std::abs(pv_integral(sn, q) - M_PI * std::erf(1.0 / std::sqrt(2.0))), 1e-6);
}

TEST(PrincipalValue, SingularWindowTooWide) {
  QuadratureConfig q;
  q.tail_cutoff = 1.0;
  auto u = [](double t) { return cplx(t * std::exp(-t * t)); };
  try {
    pv_integral(u, q, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularitySpacing);
  }
}

TEST(Rng, Determinism) {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool all_same = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.normal(), y = b.normal(), z = c.normal();
    all_same = all_same && x == y;
    any_diff = any_diff || x != z;
  }
  EXPECT_TRUE(all_same);
  EXPECT_TRUE(any_diff);
}

TEST(SampleSphere, Properties) {
  RngStream rng(1, 1);
  int pos = 0;
  for (int i = 0; i < 10000; ++i) pos += sample_sphere(1, rng)[0] > 0;
  EXPECT_LT(std::abs(pos / 1e4 - 0.5), 0.02);

  const int n = 100000;
  Vec mean(3, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto v = sample_sphere(3, rng);
    EXPECT_NEAR(norm2(v), 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) mean[k] += v[k] / n;
  }
  for (double m : mean) EXPECT_LT(std::abs(m), 3.0 / std::sqrt(3.0 * n));

  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_sphere(8, rng)[0];
    s += t * t;
    ss += t * t * t * t;
  }
  const double m2 = s / n, se = std::sqrt((ss / n - m2 * m2) / n);
  EXPECT_LT(std::abs(m2 - 1.0 / 8.0), 3.0 * se);
}

TEST(Multistart, Examples) {
  RngStream rng(5, 0);
  SearchConfig cfg;
  cfg.max_iters = 200;
  auto neg_sq = [](const Vec& x) { return -(x[0] * x[0] + x[1] * x[1]); };
  auto ident = [](const Vec& x) { return x; };
  EXPECT_NEAR(maximize_multistart(neg_sq, ident, 2, cfg, rng).value, 0.0, 1e-6);

  const Vec c = {0.3, -1.2, 0.5, 2.0};
  auto lin = [&](const Vec& x) { return dot(c, x); };
  auto to_sphere = [](Vec x) {
    const double n = norm2(x);
    for (auto& v : x) v /= n;
    return x;
  };
  EXPECT_NEAR(maximize_multistart(lin, to_sphere, 4, cfg, rng).value, norm2(c), 1e-6);

  auto h = [](const Vec& x) { return std::cos(x[0]) * std::sin(2.0 * x[0]); };
  auto clamp = [](Vec x) {
    x[0] = std::clamp(x[0], -M_PI, M_PI);
    return x;
  };
  auto uniform = [](RngStream& r) { return Vec{M_PI * (2.0 * r.uniform() - 1.0)}; };
  const auto res = maximize_multistart(h, clamp, cfg, rng, uniform);
  EXPECT_NEAR(res.value, 4.0 / (3.0 * std::sqrt(3.0)), 1e-6);
}

TEST(Multistart, NotBelowAnyStart) {
  RngStream rng(9, 0);
  SearchConfig cfg;
  cfg.max_iters = 5;
  auto f = [](const Vec& x) { return std::sin(5.0 * x[0]) + 0.1 * x[0]; };
  auto id = [](const Vec& x) { return x; };
  const Vec s1 = {0.3}, s2 = {-2.0};
  auto none = [](RngStream& r) { return Vec{r.normal()}; };
  const auto res = maximize_multistart(f, id, cfg, rng, none, {s1, s2});
  EXPECT_GE(res.value, f(s1));
  EXPECT_GE(res.value, f(s2));
}

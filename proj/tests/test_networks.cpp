#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace seplab;

namespace {

// f1 drawn from its picture: trapezoids of height sign(beta).
double f1_ref(double x, double x0) {
  double r = 0.0;
  for (double beta : {-1.5, -0.5, 0.5, 1.5}) {
    const double t = std::abs(x - beta);
    const double h = t <= x0 ? 1.0 : (t >= 2 * x0 ? 0.0 : (2 * x0 - t) / x0);
    r += (beta > 0 ? 1.0 : -1.0) * h;
  }
  return r;
}

// f2: linear interpolation of the alternating values, constant outside [-d, d].
double f2_ref(double y, int d) {
  auto node = [&](int k) {
    // even d: nodes at even integers, f2(0) = 1; odd d: nodes at odd integers, f2(1) = 1
    if (d % 2 == 0) return ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    return (((k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  };
  const double yc = std::clamp(y, -double(d), double(d));
  const int first = d % 2 == 0 ? 0 : 1;
  // nodes are first + 2k, symmetric: f2 is even for even d and odd for odd d
  const double ay = std::abs(yc);
  double val;
  if (d % 2 == 1 && ay < 1.0) {
    val = ay;  // segment from f2(-1) = -1 to f2(1) = 1, taken on |y|
  } else {
    const int k0 = first + 2 * int(std::floor((ay - first) / 2.0));
    const int k1 = std::min(k0 + 2, d);
    const double t = k1 == k0 ? 0.0 : (ay - k0) / (k1 - k0);
    val = (1 - t) * node(std::abs(k0)) + t * node(k1);
  }
  if (d % 2 == 1 && yc < 0) val = -val;
  return val;
}

}  // namespace

TEST(Eval, SingleUnit) {
  TwoLayerNet net;
  net.d = 3;
  net.units.push_back({{1.0, 0.0, 0.0}, 0.0, 1.0});
  const auto relu = ActivationSpec::relu();
  EXPECT_EQ(eval_two_layer(net, relu, Vec{2.0, 5.0, -1.0}), 2.0);
  EXPECT_EQ(eval_two_layer(net, relu, Vec{-2.0, 5.0, -1.0}), 0.0);
  EXPECT_THROW(eval_two_layer(net, relu, Vec{1.0}), Error);
  EXPECT_NEAR(path_norm_b(net), 1.0, 1e-15);
  EXPECT_NEAR(path_norm_nb(net), 1.0, 1e-15);
}

TEST(F1, PlateausAndSlopes) {
  const auto relu = ActivationSpec::relu();
  const auto f1 = build_f1(0.1);
  EXPECT_EQ(f1.units.size(), 16u);
  EXPECT_NEAR(eval_two_layer(f1, relu, 1.5), 1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f1, relu, 0.5), 1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f1, relu, -0.45), -1.0, 1e-12);  // still on the plateau
  EXPECT_NEAR(eval_two_layer(f1, relu, -0.35), -0.5, 1e-12);  // halfway down the slope
  EXPECT_NEAR(eval_two_layer(f1, relu, -0.45), f1_ref(-0.45, 0.1), 1e-12);
  EXPECT_NEAR(eval_two_layer(f1, relu, 0.0), 0.0, 1e-12);
  RngStream rng(30, 0);
  for (int k = 0; k < 2000; ++k) {
    const double x = 2.5 * (2 * rng.uniform() - 1);
    const double v = eval_two_layer(f1, relu, x);
    EXPECT_NEAR(v, f1_ref(x, 0.1), 1e-12) << x;
    EXPECT_LE(std::abs(v), 1.0 + 1e-12);
  }
  EXPECT_THROW(build_f1(0.3), Error);
}

TEST(F2, AlternatingValues) {
  const auto relu = ActivationSpec::relu();
  const auto f4 = build_f2(4);
  EXPECT_NEAR(eval_two_layer(f4, relu, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f4, relu, 2.0), -1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f4, relu, 4.0), 1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f4, relu, 1.0), 0.0, 1e-12);
  const auto f5 = build_f2(5);
  EXPECT_NEAR(eval_two_layer(f5, relu, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f5, relu, 3.0), -1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f5, relu, 5.0), 1.0, 1e-12);
  EXPECT_NEAR(eval_two_layer(f5, relu, -1.0), -1.0, 1e-12);
  for (int d = 2; d <= 12; ++d) {
    const auto f = build_f2(d);
    for (double y = -d - 3.0; y <= d + 3.0; y += 0.125)
      EXPECT_NEAR(eval_two_layer(f, relu, y), f2_ref(y, d), 1e-12) << "d=" << d << " y=" << y;
  }
}

TEST(F, WidthsAndComposition) {
  const auto relu = ActivationSpec::relu();
  RngStream rng(31, 0);
  for (int d : {2, 3, 4, 7}) {
    GridPairSpec s{d, 0.1};
    const auto F = build_F(s);
    EXPECT_EQ(F.m1(), std::size_t(16 * d));
    EXPECT_EQ(F.m2(), std::size_t(d % 2 == 0 ? d + 2 : d + 3));
    const auto f1 = build_f1(s.x0);
    const auto f2 = build_f2(d);
    for (int k = 0; k < 200; ++k) {
      Vec x(d);
      for (auto& v : x) v = 2.0 * (2 * rng.uniform() - 1);
      double sum = 0.0;
      for (double v : x) sum += eval_two_layer(f1, relu, v);
      EXPECT_NEAR(eval_three_layer(F, relu, x), eval_two_layer(f2, relu, sum), 1e-12);
    }
  }
}

TEST(F, PlateauExamples) {
  const auto relu = ActivationSpec::relu();
  const auto F4 = build_F(GridPairSpec{4, 0.1});
  EXPECT_NEAR(eval_three_layer(F4, relu, Vec{0.5, 0.5, 0.5, 0.5}), 1.0, 1e-12);
  EXPECT_NEAR(eval_three_layer(F4, relu, Vec{-0.5, 0.5, 0.5, 0.5}), -1.0, 1e-12);
  const auto F6 = build_F(GridPairSpec{6, 0.1});
  EXPECT_NEAR(eval_three_layer(F6, relu, Vec(6, 0.5)), -1.0, 1e-12);
}

TEST(F, PlateauPropertyAllGridPoints) {
  const auto relu = ActivationSpec::relu();
  RngStream rng(32, 0);
  const double grid[4] = {-1.5, -0.5, 0.5, 1.5};
  for (int d = 2; d <= 8; ++d) {
    GridPairSpec s{d, 0.1};
    const auto F = build_F(s);
    const long count = 1L << (2 * d);
    const long stride = d <= 6 ? 1 : 7;
    for (long idx = 0; idx < count; idx += stride) {
      Vec x(d);
      double sign = plateau_orientation(d);
      long rest = idx;
      for (int i = 0; i < d; ++i, rest >>= 2) {
        x[i] = grid[rest & 3] + s.x0 * (2 * rng.uniform() - 1);
        sign *= grid[rest & 3] > 0 ? 1.0 : -1.0;
      }
      ASSERT_NEAR(eval_three_layer(F, relu, x), sign, 1e-12) << "d=" << d << " idx=" << idx;
    }
  }
}

TEST(F, BoundedEverywhere) {
  const auto relu = ActivationSpec::relu();
  RngStream rng(33, 0);
  for (int d = 2; d <= 10; ++d) {
    const auto F = build_F(GridPairSpec{d, 0.1});
    for (int k = 0; k < 10000; ++k) {
      Vec x(d);
      for (auto& v : x) v = 2.5 * rng.normal();
      EXPECT_LE(std::abs(eval_three_layer(F, relu, x)), 1.0 + 1e-12);
    }
  }
}

TEST(PathNorms, ClosedForms) {
  for (int d = 2; d <= 50; ++d) {
    GridPairSpec s{d, 0.1, 0.125};
    const auto F = build_F(s);
    const double expect = d % 2 == 0 ? 32.0 * d * d / s.x0 : (32.0 * d * d + 32.0 * d) / s.x0;
    EXPECT_NEAR(path_norm_nb(F), expect, 1e-9 * expect);
    const double bound = d % 2 == 0 ? (64.0 / s.x0 + 1) * d * d + 1 : (64.0 / s.x0 + 1) * d * d + 64.0 * d / s.x0 + 2;
    EXPECT_LE(path_norm_b(F), bound);
  }
  EXPECT_EQ(path_norm_nb(build_F(GridPairSpec{4, 0.1})), 4096.0);
  EXPECT_EQ(path_norm_nb(build_F(GridPairSpec{5, 0.1})), 7680.0);
  EXPECT_LE(path_norm_b(build_F(GridPairSpec{6, 0.1})), 18469.0);
}

TEST(PathNorms, Normalization) {
  const auto relu = ActivationSpec::relu();
  const auto F = build_F(GridPairSpec{4, 0.1});
  const double pn = path_norm_b(F);
  const auto G = normalize_to_unit_path_norm(F);
  EXPECT_NEAR(path_norm_b(G), 1.0, 1e-12);
  const Vec x(4, 0.5);
  EXPECT_NEAR(eval_three_layer(G, relu, x), 1.0 / pn, 1e-15);
  const auto H = normalize_to_unit_path_norm(G);
  EXPECT_NEAR(path_norm_b(H), 1.0, 1e-12);
  RngStream rng(34, 0);
  for (int k = 0; k < 100; ++k) {
    Vec y(4);
    for (auto& v : y) v = 2.0 * rng.normal();
    EXPECT_NEAR(eval_three_layer(G, relu, y) * pn, eval_three_layer(F, relu, y), 1e-9);
  }
  ThreeLayerNet zero = F;
  for (auto& w : zero.w) w = 0.0;
  zero.w0 = 0.0;
  try {
    normalize_to_unit_path_norm(zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroNetwork);
  }
}

TEST(Activation, FourierConstants) {
  const auto [A, B] = activation_fourier_constants(ActivationSpec::relu());
  EXPECT_NEAR(A.real(), 0.398942, 1e-6);
  EXPECT_EQ(A.imag(), 0.0);
  EXPECT_NEAR(B.imag(), 1.253314, 1e-6);
  EXPECT_NEAR(B.real(), 0.0, 1e-16);
  // the decomposition coefficients agree with these for plain ReLU
  EXPECT_LT(std::abs(ActivationSpec::relu().pv_coeff() - A), 1e-16);
  EXPECT_LT(std::abs(ActivationSpec::relu().delta_coeff() - B), 1e-15);

  const auto leaky = ActivationSpec::leaky_relu(-0.5);
  const auto [La, Lb] = activation_fourier_constants(leaky);
  EXPECT_NEAR(La.real(), 0.5 / std::sqrt(2.0 * M_PI), 1e-15);
  EXPECT_NEAR(Lb.real(), 0.0, 1e-15);
  EXPECT_NEAR(Lb.imag(), 0.5 * std::sqrt(M_PI / 2.0) + 0.5, 1e-15);
  EXPECT_THROW(ActivationSpec(1, 1.0, -1.0), Error);
}

TEST(Json, RoundTrip) {
  const auto relu = ActivationSpec::relu();
  const auto F = build_F(GridPairSpec{3, 0.1});
  const auto j = to_json(F, relu);
  const auto [G, act] = three_layer_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(G.theta, F.theta);
  EXPECT_EQ(G.b, F.b);
  EXPECT_EQ(G.W, F.W);
  EXPECT_EQ(G.w, F.w);
  EXPECT_EQ(G.w0, F.w0);
  EXPECT_EQ(act.c_plus, relu.c_plus);

  const auto f1 = build_f1(0.125);
  const auto [g1, a1] = two_layer_from_json(nlohmann::json::parse(to_json(f1, relu).dump()));
  ASSERT_EQ(g1.units.size(), f1.units.size());
  for (std::size_t i = 0; i < f1.units.size(); ++i) {
    EXPECT_EQ(g1.units[i].b, f1.units[i].b);
    EXPECT_EQ(g1.units[i].w, f1.units[i].w);
  }
}

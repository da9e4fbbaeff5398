#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seplab/distributions.hpp"
#include "seplab/error.hpp"
#include "seplab/numerics.hpp"

namespace seplab {

// sigma(x) = c_plus * (x)_+^alpha + c_minus * (-x)_+^alpha
struct ActivationSpec {
  int alpha = 1;
  double c_plus = 1.0;
  double c_minus = 0.0;

  ActivationSpec() = default;
  ActivationSpec(int a, double cp, double cm) : alpha(a), c_plus(cp), c_minus(cm) { validate(); }

  static ActivationSpec relu() { return {1, 1.0, 0.0}; }
  static ActivationSpec leaky_relu(double c) { return {1, 1.0, c}; }

  void validate() const {
    if (alpha < 1) throw Error(ErrorKind::ConfigInvalid, "activation: alpha must be >= 1");
    if (!(c_minus > -1.0)) throw Error(ErrorKind::ConfigInvalid, "activation: c_minus must be > -1");
  }

  double operator()(double x) const {
    if (x > 0.0) return c_plus * (alpha == 1 ? x : std::pow(x, alpha));
    if (x < 0.0) return c_minus * (alpha == 1 ? -x : std::pow(-x, alpha));
    return 0.0;
  }

  // Fourier coefficients of the principal-value and delta-derivative parts, as
  // given by the closed-form expressions for this activation family.
  cplx a_const() const {
    const cplx i(0.0, 1.0);
    return std::pow(i, alpha - 1) * (std::tgamma(alpha + 1.0) / kSqrt2Pi) *
           (c_plus - std::pow(-1.0, alpha) * c_minus);
  }
  cplx b_const() const {
    const cplx i(0.0, 1.0);
    return std::pow(i, alpha) * std::sqrt(kPi / 2.0) * (c_plus - std::pow(-1.0, alpha) * c_minus) +
           std::pow(-i, alpha) * c_minus;
  }

  // For alpha = 1: sigma(x) = (c_plus + c_minus) x_+ - c_minus x. These are the
  // coefficients of p.v.[1/t]' and delta' in its transform; the first equals
  // a_const(), the second equals b_const() only when c_minus = 0.
  cplx pv_coeff() const { return (c_plus + c_minus) / kSqrt2Pi; }
  cplx delta_coeff() const { return cplx(0.0, std::sqrt(kPi / 2.0) * (c_plus - c_minus)); }
};

inline std::pair<cplx, cplx> activation_fourier_constants(const ActivationSpec& act) {
  return {act.a_const(), act.b_const()};
}

struct TwoLayerUnit {
  Vec theta;
  double b = 0.0;
  double w = 0.0;
};

struct TwoLayerNet {
  int d = 1;
  std::vector<TwoLayerUnit> units;
  double w0 = 0.0;
};

struct ThreeLayerNet {
  int d = 1;
  std::vector<Vec> theta;  // m1 first-layer directions
  Vec b;                   // m1 first-layer offsets: sigma(<theta_j, x> - b_j)
  std::vector<Vec> W;      // m2 rows of length m1 + 1, column 0 is the bias W_{i,0}
  Vec w;                   // m2 outer weights
  double w0 = 0.0;

  std::size_t m1() const { return theta.size(); }
  std::size_t m2() const { return W.size(); }
};

inline double eval_two_layer(const TwoLayerNet& net, const ActivationSpec& act, std::span<const double> x) {
  if (int(x.size()) != net.d) throw Error(ErrorKind::DimensionMismatch, "input dimension differs from network");
  double s = net.w0;
  for (const auto& u : net.units) {
    double z = -u.b;
    for (int k = 0; k < net.d; ++k) z += u.theta[k] * x[k];
    s += u.w * act(z);
  }
  return s;
}

inline double eval_three_layer(const ThreeLayerNet& net, const ActivationSpec& act, std::span<const double> x) {
  if (int(x.size()) != net.d) throw Error(ErrorKind::DimensionMismatch, "input dimension differs from network");
  const std::size_t m1 = net.m1();
  thread_local Vec h;
  h.resize(m1);
  for (std::size_t j = 0; j < m1; ++j) {
    double z = -net.b[j];
    const auto& th = net.theta[j];
    for (int k = 0; k < net.d; ++k) z += th[k] * x[k];
    h[j] = act(z);
  }
  double s = net.w0;
  for (std::size_t i = 0; i < net.m2(); ++i) {
    const auto& row = net.W[i];
    double z = row[0];
    for (std::size_t j = 0; j < m1; ++j) z += row[j + 1] * h[j];
    s += net.w[i] * act(z);
  }
  return s;
}

inline double eval_two_layer(const TwoLayerNet& net, const ActivationSpec& act, double x) {
  return eval_two_layer(net, act, std::span<const double>(&x, 1));
}

// Sum over grid points of trapezoids: sign(beta) on [beta - x0, beta + x0],
// zero outside [beta - 2 x0, beta + 2 x0].
inline TwoLayerNet build_f1(double x0) {
  if (!(x0 > 0.0 && x0 < 0.25)) throw Error(ErrorKind::BadPlateau, "x0 must lie in (0, 1/4)");
  TwoLayerNet net;
  net.d = 1;
  const int shifts[4] = {-2, -1, 1, 2};
  const double coeff[4] = {1.0, -1.0, -1.0, 1.0};
  for (double beta : kGrid) {
    const double s = beta > 0 ? 1.0 : -1.0;
    for (int k = 0; k < 4; ++k) net.units.push_back({{1.0}, beta + shifts[k] * x0, s * coeff[k] / x0});
  }
  return net;
}

// Piecewise-linear f2 with alternating values +-1 at integers of the parity of d,
// constant outside [-d, d].
inline TwoLayerNet build_f2(int d) {
  if (d < 2) throw Error(ErrorKind::ConfigInvalid, "f2 needs d >= 2");
  TwoLayerNet net;
  net.d = 1;
  auto pair = [&](double offset, double w_pos, double w_neg) {
    net.units.push_back({{1.0}, offset, w_pos});
    net.units.push_back({{-1.0}, offset, w_neg});
  };
  if (d % 2 == 0) {
    net.w0 = 1.0;
    pair(0.0, -1.0, -1.0);
    const double s = (d / 2) % 2 == 0 ? 1.0 : -1.0;
    pair(double(d), -s, -s);
    for (int i = 1; i <= (d - 2) / 2; ++i) {
      const double si = i % 2 == 0 ? 1.0 : -1.0;
      pair(2.0 * i, -2.0 * si, -2.0 * si);
    }
  } else {
    net.w0 = 0.0;
    pair(0.0, 1.0, -1.0);
    const double s = ((d - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
    pair(double(d), -s, s);
    for (int i = 0; i <= (d - 3) / 2; ++i) {
      const double si = i % 2 == 0 ? 1.0 : -1.0;
      pair(2.0 * i + 1.0, -2.0 * si, 2.0 * si);
    }
  }
  return net;
}

// F(x) = f2(sum_i f1(x_i)) as one three-layer ReLU network.
inline ThreeLayerNet build_F(const GridPairSpec& spec) {
  if (spec.d < 2) throw Error(ErrorKind::ConfigInvalid, "F needs d >= 2");
  const auto f1 = build_f1(spec.x0);
  const auto f2 = build_f2(spec.d);
  ThreeLayerNet net;
  net.d = spec.d;
  Vec a;  // f1 output weights, one per first-layer unit
  for (int k = 0; k < spec.d; ++k) {
    for (const auto& u : f1.units) {
      Vec th(spec.d, 0.0);
      th[k] = u.theta[0];
      net.theta.push_back(std::move(th));
      net.b.push_back(u.b);
      a.push_back(u.w);
    }
  }
  for (const auto& u : f2.units) {
    Vec row(a.size() + 1);
    row[0] = -u.b;
    for (std::size_t j = 0; j < a.size(); ++j) row[j + 1] = u.theta[0] * a[j];
    net.W.push_back(std::move(row));
    net.w.push_back(u.w);
  }
  net.w0 = f2.w0;
  return net;
}

// s_d in F(beta + t) = s_d * prod sign(beta_i) on the plateaus.
inline int plateau_orientation(int d) { return (d % 4 == 0 || d % 4 == 1) ? 1 : -1; }

inline double path_norm_b(const TwoLayerNet& net) {
  double s = std::abs(net.w0);
  for (const auto& u : net.units) s += std::abs(u.w) * std::hypot(norm2(u.theta), u.b);
  return s;
}

// Uses |theta| (the bias is excluded, as in the three-layer definition).
inline double path_norm_nb(const TwoLayerNet& net) {
  double s = 0.0;
  for (const auto& u : net.units) s += std::abs(u.w) * norm2(u.theta);
  return s;
}

inline double path_norm_b(const ThreeLayerNet& net) {
  Vec first(net.m1());
  for (std::size_t j = 0; j < net.m1(); ++j) first[j] = std::hypot(norm2(net.theta[j]), net.b[j]);
  double s = std::abs(net.w0);
  for (std::size_t i = 0; i < net.m2(); ++i) {
    double inner = std::abs(net.W[i][0]);
    for (std::size_t j = 0; j < net.m1(); ++j) inner += std::abs(net.W[i][j + 1]) * first[j];
    s += std::abs(net.w[i]) * inner;
  }
  return s;
}

inline double path_norm_nb(const ThreeLayerNet& net) {
  Vec first(net.m1());
  for (std::size_t j = 0; j < net.m1(); ++j) first[j] = norm2(net.theta[j]);
  double s = 0.0;
  for (std::size_t i = 0; i < net.m2(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < net.m1(); ++j) inner += std::abs(net.W[i][j + 1]) * first[j];
    s += std::abs(net.w[i]) * inner;
  }
  return s;
}

inline ThreeLayerNet normalize_to_unit_path_norm(const ThreeLayerNet& net) {
  const double pn = path_norm_b(net);
  if (!(pn > 0.0)) throw Error(ErrorKind::ZeroNetwork, "path norm is zero");
  ThreeLayerNet out = net;
  for (auto& wi : out.w) wi /= pn;
  out.w0 /= pn;
  return out;
}

// Closed forms for the constructed F.
inline double path_norm_nb_F(int d, double x0) {
  return d % 2 == 0 ? 32.0 * d * d / x0 : (32.0 * d * d + 32.0 * d) / x0;
}

inline double path_norm_b_bound_F(int d, double x0) {
  const double dd = d;
  return d % 2 == 0 ? (64.0 / x0 + 1.0) * dd * dd + 1.0 : (64.0 / x0 + 1.0) * dd * dd + 64.0 * dd / x0 + 2.0;
}

// ------------------------------------------------------------------ JSON

inline nlohmann::json to_json(const ActivationSpec& a) {
  return {{"alpha", a.alpha}, {"c_plus", a.c_plus}, {"c_minus", a.c_minus}};
}

inline ActivationSpec activation_from_json(const nlohmann::json& j) {
  return ActivationSpec(j.at("alpha").get<int>(), j.at("c_plus").get<double>(), j.at("c_minus").get<double>());
}

inline nlohmann::json to_json(const TwoLayerNet& net, const ActivationSpec& act) {
  nlohmann::json theta = nlohmann::json::array(), b = nlohmann::json::array(), w = nlohmann::json::array();
  for (const auto& u : net.units) {
    theta.push_back(u.theta);
    b.push_back(u.b);
    w.push_back(u.w);
  }
  return {{"activation", to_json(act)},
          {"input_dim", net.d},
          {"layers", {{{"kind", "input"}, {"theta", theta}, {"b", b}},
                      {{"kind", "output"}, {"w", w}, {"w0", net.w0}}}}};
}

inline nlohmann::json to_json(const ThreeLayerNet& net, const ActivationSpec& act) {
  return {{"activation", to_json(act)},
          {"input_dim", net.d},
          {"layers", {{{"kind", "input"}, {"theta", net.theta}, {"b", net.b}},
                      {{"kind", "hidden"}, {"W", net.W}},
                      {{"kind", "output"}, {"w", net.w}, {"w0", net.w0}}}}};
}

inline std::pair<TwoLayerNet, ActivationSpec> two_layer_from_json(const nlohmann::json& j) {
  try {
    const auto& layers = j.at("layers");
    if (layers.size() != 2) throw Error(ErrorKind::IoFailure, "two-layer network needs 2 layers");
    TwoLayerNet net;
    net.d = j.at("input_dim").get<int>();
    auto theta = layers[0].at("theta").get<std::vector<Vec>>();
    auto b = layers[0].at("b").get<Vec>();
    auto w = layers[1].at("w").get<Vec>();
    if (theta.size() != b.size() || b.size() != w.size()) throw Error(ErrorKind::IoFailure, "layer sizes disagree");
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (int(theta[k].size()) != net.d) throw Error(ErrorKind::DimensionMismatch, "theta length differs from input_dim");
      net.units.push_back({theta[k], b[k], w[k]});
    }
    net.w0 = layers[1].at("w0").get<double>();
    return {net, activation_from_json(j.at("activation"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoFailure, std::string("network JSON: ") + e.what());
  }
}

inline std::pair<ThreeLayerNet, ActivationSpec> three_layer_from_json(const nlohmann::json& j) {
  try {
    const auto& layers = j.at("layers");
    if (layers.size() != 3) throw Error(ErrorKind::IoFailure, "three-layer network needs 3 layers");
    ThreeLayerNet net;
    net.d = j.at("input_dim").get<int>();
    net.theta = layers[0].at("theta").get<std::vector<Vec>>();
    net.b = layers[0].at("b").get<Vec>();
    net.W = layers[1].at("W").get<std::vector<Vec>>();
    net.w = layers[2].at("w").get<Vec>();
    net.w0 = layers[2].at("w0").get<double>();
    if (net.theta.size() != net.b.size() || net.W.size() != net.w.size())
      throw Error(ErrorKind::IoFailure, "layer sizes disagree");
    for (const auto& row : net.W)
      if (row.size() != net.m1() + 1) throw Error(ErrorKind::IoFailure, "W rows must have m1 + 1 entries");
    for (const auto& th : net.theta)
      if (int(th.size()) != net.d) throw Error(ErrorKind::DimensionMismatch, "theta length differs from input_dim");
    return {net, activation_from_json(j.at("activation"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoFailure, std::string("network JSON: ") + e.what());
  }
}

}  // namespace seplab

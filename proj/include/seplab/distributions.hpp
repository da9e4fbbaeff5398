#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seplab/error.hpp"
#include "seplab/numerics.hpp"

namespace seplab {

// Grid points of each coordinate, with their signs.
inline constexpr std::array<double, 4> kGrid = {-1.5, -0.5, 0.5, 1.5};

struct GridPairSpec {
  int d = 2;
  double sigma = 0.1;
  double x0 = 0.125;
  double eps = 0.125;

  void validate() const {
    if (d < 1) throw Error(ErrorKind::ConfigInvalid, "grid spec: d must be >= 1");
    if (!(sigma > 0.0)) throw Error(ErrorKind::ConfigInvalid, "grid spec: sigma must be > 0");
    if (!(x0 > 0.0 && x0 < 0.25)) throw Error(ErrorKind::BadPlateau, "grid spec: x0 must lie in (0, 1/4)");
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::ConfigInvalid, "grid spec: eps must lie in (0, 1)");
  }
};

struct SinePairSpec {
  int d = 2;
  double sigma = 1.0;  // the Gaussian factor is exp(-sigma^2 |x|^2 / 2)
  double ell = 1.0;

  void validate() const {
    if (d < 1) throw Error(ErrorKind::ConfigInvalid, "sine spec: d must be >= 1");
    if (!(sigma > 0.0)) throw Error(ErrorKind::ConfigInvalid, "sine spec: sigma must be > 0");
    if (!(ell > 0.0)) throw Error(ErrorKind::ConfigInvalid, "sine spec: ell must be > 0");
  }
};

struct SignedDensityValue {
  double value = 0.0;
  double positive_part = 0.0;
  double negative_part = 0.0;
};

enum class Label { plus, minus };

inline const char* to_string(Label l) { return l == Label::plus ? "plus" : "minus"; }

struct SampleBatch {
  int d = 0;
  Label label = Label::plus;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<double> data;  // row-major, size() * d values

  std::size_t size() const { return d > 0 ? data.size() / d : 0; }
  std::span<const double> point(std::size_t i) const { return {data.data() + i * d, std::size_t(d)}; }
};

// ---------------------------------------------------------------- grid pair

enum class DensityMode { factorized, enumeration };

namespace detail {

struct GridCoord {
  std::array<double, 4> g;  // component densities, each carrying weight 1/4
  double P = 0.0, S = 0.0;
};

inline GridCoord grid_coord(double x, double sigma) {
  GridCoord c;
  const double norm = 1.0 / (4.0 * kSqrt2Pi * sigma);
  for (int k = 0; k < 4; ++k) {
    const double z = (x - kGrid[k]) / sigma;
    c.g[k] = norm * std::exp(-0.5 * z * z);
  }
  // mirrored pairs first, so S is exactly odd in x
  c.P = (c.g[0] + c.g[3]) + (c.g[1] + c.g[2]);
  c.S = (c.g[3] - c.g[0]) + (c.g[2] - c.g[1]);
  return c;
}

}  // namespace detail

inline SignedDensityValue grid_signed_density(const GridPairSpec& spec, std::span<const double> x,
                                              DensityMode mode = DensityMode::factorized) {
  if (int(x.size()) != spec.d) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from spec");
  std::vector<detail::GridCoord> c(spec.d);
  for (int i = 0; i < spec.d; ++i) c[i] = detail::grid_coord(x[i], spec.sigma);

  SignedDensityValue r;
  if (mode == DensityMode::factorized) {
    double prodP = 1.0, prodS = 1.0;
    for (const auto& ci : c) {
      prodP *= ci.P;
      prodS *= ci.S;
    }
    r.value = 2.0 * prodS;
    r.positive_part = prodP + prodS;
    r.negative_part = prodP - prodS;
    return r;
  }
  if (spec.d > 15) throw Error(ErrorKind::DimensionTooLarge, "enumeration mode supports d <= 15");
  const std::uint64_t count = std::uint64_t(1) << (2 * spec.d);
  double pos = 0.0, neg = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    double w = 1.0;
    bool negative = false;
    std::uint64_t rest = idx;
    for (int i = 0; i < spec.d; ++i, rest >>= 2) {
      const int k = int(rest & 3u);
      w *= c[i].g[k];
      negative ^= (kGrid[k] < 0);
    }
    (negative ? neg : pos) += 2.0 * w;
  }
  r.positive_part = pos;
  r.negative_part = neg;
  r.value = pos - neg;
  return r;
}

// Fourier transform (unitary convention, kernel e^{-i<w,x>}) of the signed density.
inline cplx grid_fourier(const GridPairSpec& spec, std::span<const double> w) {
  if (int(w.size()) != spec.d) throw Error(ErrorKind::DimensionMismatch, "frequency dimension differs from spec");
  cplx r = 2.0;
  const cplx f(0.0, -1.0 / kSqrt2Pi);
  for (double wi : w)
    r *= f * std::exp(-0.5 * spec.sigma * spec.sigma * wi * wi) * std::sin(wi) * std::cos(0.5 * wi);
  return r;
}

inline SampleBatch grid_sample(const GridPairSpec& spec, Label label, std::size_t n, RngStream& rng) {
  SampleBatch b;
  b.d = spec.d;
  b.label = label;
  b.seed = rng.seed();
  b.stream_id = rng.stream_id();
  b.data.resize(n * spec.d);
  for (std::size_t j = 0; j < n; ++j) {
    double* p = b.data.data() + j * spec.d;
    bool negative = false;
    for (int i = 0; i < spec.d; ++i) {
      const double mag = rng.coin() ? 1.5 : 0.5;
      bool neg_i;
      if (i + 1 < spec.d) {
        neg_i = rng.coin();
        negative ^= neg_i;
      } else {
        neg_i = (label == Label::plus) ? negative : !negative;
      }
      p[i] = (neg_i ? -mag : mag) + spec.sigma * rng.normal();
    }
  }
  return b;
}

struct GridMomentReport {
  double total_mass = 0.0;
  Vec first_moment;
  double positive_mass = 0.0;
  double negative_mass = 0.0;
};

// Masses and first moments from 1-D quadratures of the per-coordinate sums.
inline GridMomentReport grid_moment_checks(const GridPairSpec& spec, const QuadratureConfig& cfg = {}) {
  if (spec.d > 6) throw Error(ErrorKind::DimensionTooLarge, "moment checks support d <= 6");
  QuadratureConfig q = cfg;
  q.abs_tol = std::min(cfg.abs_tol, 1e-13);
  q.initial_panels = std::max(cfg.initial_panels, 16);
  const double lim = 2.0 + 40.0 * spec.sigma;
  auto S = [&](double x) { return detail::grid_coord(x, spec.sigma).S; };
  auto P = [&](double x) { return detail::grid_coord(x, spec.sigma).P; };
  const double intS = integrate_adaptive(S, -lim, lim, q);
  const double intP = integrate_adaptive(P, -lim, lim, q);
  const double intXS = integrate_adaptive([&](double x) { return x * S(x); }, -lim, lim, q);

  GridMomentReport r;
  r.total_mass = 2.0 * std::pow(intS, spec.d);
  r.first_moment.assign(spec.d, 2.0 * intXS * std::pow(intS, spec.d - 1));
  r.positive_mass = std::pow(intP, spec.d) + std::pow(intS, spec.d);
  r.negative_mass = std::pow(intP, spec.d) - std::pow(intS, spec.d);
  return r;
}

// ---------------------------------------------------------------- sine pair

// Integral of |rho| over R^d, i.e. 2 E|sin(ell X)| with X ~ N(0, 1/sigma^2),
// integrated panel by panel between consecutive zeros of the sine.
inline double sine_abs_mass(const SinePairSpec& spec, const QuadratureConfig& cfg = {}) {
  spec.validate();
  const double s = 1.0 / spec.sigma;
  const double zmax = 40.0 * s;
  const double half = kPi / spec.ell;
  auto f = [&](double z) { return std::abs(std::sin(spec.ell * z)) * std::exp(-0.5 * (z / s) * (z / s)) / (kSqrt2Pi * s); };
  QuadratureConfig q = cfg;
  q.abs_tol = 1e-14;
  double total = 0.0;
  if (half >= zmax) {
    total = integrate_adaptive(f, 0.0, zmax, q);
  } else {
    const long panels = long(std::ceil(zmax / half));
    for (long k = 0; k < panels; ++k) {
      const double a = k * half, b = std::min((k + 1) * half, zmax);
      total += integrate_adaptive(f, a, b, q);
    }
  }
  // E|sin| = 2 * (half-line integral); the mass is twice that again
  return std::min(2.0, 4.0 * total);
}

struct SinePair {
  SinePairSpec spec;
  double abs_mass = 0.0;
};

inline SinePair make_sine_pair(const SinePairSpec& spec) { return {spec, sine_abs_mass(spec)}; }

inline double sine_signed_value(const SinePairSpec& spec, std::span<const double> x) {
  if (int(x.size()) != spec.d) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from spec");
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double s2 = spec.sigma * spec.sigma;
  return 2.0 * std::pow(spec.sigma / kSqrt2Pi, spec.d) * std::exp(-0.5 * s2 * r2) * std::sin(spec.ell * x[0]);
}

inline double standard_gaussian_density(std::span<const double> x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return std::pow(kSqrt2Pi, -double(x.size())) * std::exp(-0.5 * r2);
}

inline SignedDensityValue sine_signed_density(const SinePair& pair, std::span<const double> x) {
  SignedDensityValue r;
  r.value = sine_signed_value(pair.spec, x);
  const double base = (1.0 - 0.5 * pair.abs_mass) * standard_gaussian_density(x);
  r.positive_part = base + std::max(0.0, r.value);
  r.negative_part = base + std::max(0.0, -r.value);
  return r;
}

inline SignedDensityValue sine_signed_density(const SinePairSpec& spec, std::span<const double> x) {
  return sine_signed_density(make_sine_pair(spec), x);
}

inline SampleBatch sine_sample(const SinePair& pair, Label label, std::size_t n, RngStream& rng) {
  const auto& spec = pair.spec;
  SampleBatch b;
  b.d = spec.d;
  b.label = label;
  b.seed = rng.seed();
  b.stream_id = rng.stream_id();
  b.data.resize(n * spec.d);
  const double p0 = 1.0 - 0.5 * pair.abs_mass;
  const double s = 1.0 / spec.sigma;
  const double sgn = label == Label::plus ? 1.0 : -1.0;
  std::uint64_t proposals = 0, accepted = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double* p = b.data.data() + j * spec.d;
    if (rng.uniform() < p0) {
      for (int i = 0; i < spec.d; ++i) p[i] = rng.normal();
      continue;
    }
    for (int i = 1; i < spec.d; ++i) p[i] = s * rng.normal();
    for (;;) {
      const double z = s * rng.normal();
      ++proposals;
      if (rng.uniform() < std::max(0.0, sgn * std::sin(spec.ell * z))) {
        ++accepted;
        p[0] = z;
        break;
      }
      if (proposals >= 100000 && double(accepted) < 1e-4 * double(proposals))
        throw Error(ErrorKind::RejectionStall, "acceptance rate below 1e-4 after " + std::to_string(proposals) + " proposals");
    }
  }
  return b;
}

inline SampleBatch sine_sample(const SinePairSpec& spec, Label label, std::size_t n, RngStream& rng) {
  return sine_sample(make_sine_pair(spec), label, n, rng);
}

inline cplx sine_fourier(const SinePairSpec& spec, std::span<const double> w) {
  if (int(w.size()) != spec.d) throw Error(ErrorKind::DimensionMismatch, "frequency dimension differs from spec");
  double rest = 0.0;
  for (int i = 1; i < spec.d; ++i) rest += w[i] * w[i];
  const double s2 = spec.sigma * spec.sigma;
  const double ep = std::exp(-0.5 * (rest + (w[0] + spec.ell) * (w[0] + spec.ell)) / s2);
  const double em = std::exp(-0.5 * (rest + (w[0] - spec.ell) * (w[0] - spec.ell)) / s2);
  return cplx(0.0, std::pow(kSqrt2Pi, -double(spec.d)) * (ep - em));
}

}  // namespace seplab

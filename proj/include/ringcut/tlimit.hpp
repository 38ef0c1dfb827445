#pragma once

// Infinite chain with one bond defect: free Green function, impurity T-matrix,
// scattering states and the two localized modes, and correlation-matrix
// entries as k-integrals over the occupied band.
//
// Conventions follow model.hpp: H0 has hopping -1 and diagonal -2h, so
// eps(k) = -2cos k - 2h and a state is occupied when eps < 0, i.e. for
// |k| < arccos(-h). The defect bond between -1/2 and +1/2 carries -j.

#include "corr.hpp"
#include "model.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcut::tl {

using cplx = std::complex<double>;
using std::numbers::pi;

inline constexpr double kEdgeTolerance = 1e-12;
inline constexpr double kPoleTolerance = 1e-10;

enum class Branch { Retarded, Advanced };

/// Band edges of eps(k) at field h.
inline double band_bottom(double h) { return -2.0 - 2.0 * h; }
inline double band_top(double h) { return 2.0 - 2.0 * h; }

inline double band_energy(double k, double h) { return -2.0 * std::cos(k) - 2.0 * h; }

/// Occupied half-width of the band in k: eps(k) < 0 for |k| < k_occ.
inline double occupied_momentum(double h) { return std::acos(std::clamp(-h, -1.0, 1.0)); }

/// Decay factor xi = -x + sqrt(x^2 - 1), x = z/2 + h, on the branch |xi| <= 1.
/// For real z inside the band both roots have |xi| = 1; `branch` picks the
/// limit z +- i0.
inline cplx decay_factor(cplx z, double h, Branch branch = Branch::Retarded) {
  const cplx x = 0.5 * z + h;
  if (std::abs(x * x - 1.0) < kEdgeTolerance)
    throw NumericalError("free Green function evaluated at a band edge (z = " + std::to_string(z.real()) + ")");
  cplx w = std::sqrt(x * x - 1.0);
  cplx xi = -x + w;
  const double m = std::abs(xi);
  if (m > 1.0 + 1e-14) {
    w = -w;
    xi = -x + w;
  } else if (std::abs(m - 1.0) <= 1e-14) {
    // on the cut: retarded means outgoing waves, Im xi > 0
    const bool want_positive = branch == Branch::Retarded;
    if ((xi.imag() > 0) != want_positive) {
      w = -w;
      xi = -x + w;
    }
  }
  return xi;
}

/// <n| (z - H0)^{-1} |m> = xi^{|n-m|} / (2 sqrt(x^2 - 1)).
inline cplx g0(Site n, Site m, cplx z, double h, Branch branch = Branch::Retarded) {
  const cplx xi = decay_factor(z, h, branch);
  const cplx x = 0.5 * z + h;
  const cplx w = xi + x;
  return std::pow(xi, n.distance_to(m)) / (2.0 * w);
}

/// 2x2 blocks on the impurity sites, ordered (-1/2, +1/2).
using Block = Eigen::Matrix2cd;

/// H - H0 restricted to the impurity sites.
inline Block impurity_potential(double j) {
  Block v;
  v << 0.0, -(j - 1.0), -(j - 1.0), 0.0;
  return v;
}

inline Block g0_block(cplx z, double h, Branch branch = Branch::Retarded) {
  const Site a = Site::from_twice(-1), b = Site::from_twice(1);
  Block g;
  g << g0(a, a, z, h, branch), g0(a, b, z, h, branch), g0(b, a, z, h, branch), g0(b, b, z, h, branch);
  return g;
}

struct TMatrix {
  Block t;
  double spectral_radius = 0.0;  // of V G0; the Born series converges when < 1
  cplx determinant;              // det(1 - V G0)
};

/// T(z) = sum_l (V G0)^l V = (1 - V G0)^{-1} V, resummed exactly on the
/// impurity block. Fails only near a pole of the full Green function.
inline TMatrix t_matrix(cplx z, double j, double h, Branch branch = Branch::Retarded) {
  if (!(j >= 0.0)) throw std::invalid_argument("defect strength j must be >= 0");
  TMatrix r;
  const Block v = impurity_potential(j);
  if (j == 1.0) {
    r.t = Block::Zero();
    r.determinant = 1.0;
    return r;
  }
  const Block vg = v * g0_block(z, h, branch);
  r.spectral_radius = vg.eigenvalues().cwiseAbs().maxCoeff();
  const Block a = Block::Identity() - vg;
  r.determinant = a.determinant();
  if (std::abs(r.determinant) < kPoleTolerance)
    throw NumericalError("T-matrix at z = " + std::to_string(z.real()) + (z.imag() != 0 ? "+i" + std::to_string(z.imag()) : "") +
                         " is at a pole (|det(1 - V G0)| = " + std::to_string(std::abs(r.determinant)) + ")");
  r.t = a.inverse() * v;
  return r;
}

/// det(1 - V G0(z)) for real z outside the band, where it is real.
inline double impurity_determinant(double z, double j, double h) {
  const Block a = Block::Identity() - impurity_potential(j) * g0_block(z, h);
  return a.determinant().real();
}

/// Real poles of the full Green function, found by bisection on
/// det(1 - V G0) with brackets that grow geometrically away from each edge.
inline std::vector<BoundState> bound_state_poles(double j, double h, double tol = 1e-10) {
  std::vector<BoundState> out;
  if (j == 1.0) return out;
  for (BandSide side : {BandSide::Below, BandSide::Above}) {
    const double edge = side == BandSide::Below ? band_bottom(h) : band_top(h);
    const double dir = side == BandSide::Below ? -1.0 : 1.0;
    auto f = [&](double d) { return impurity_determinant(edge + dir * d, j, h); };
    double lo = 1e-9, flo = f(lo);
    for (double hi = 2 * lo; hi < 1e9; hi *= 2) {
      const double fhi = f(hi);
      if ((flo < 0) != (fhi < 0)) {
        double a = lo, b = hi, fa = flo;
        while (b - a > tol) {
          const double mid = 0.5 * (a + b);
          if (mid <= a || mid >= b) break;
          const double fm = f(mid);
          if ((fm < 0) == (fa < 0)) a = mid, fa = fm;
          else b = mid;
        }
        out.push_back({edge + dir * 0.5 * (a + b), side, -1});
      }
      lo = hi;
      flo = fhi;
    }
  }
  std::sort(out.begin(), out.end(), [](const BoundState& a, const BoundState& b) { return a.energy < b.energy; });
  return out;
}

/// Distortion of the band mode k at site n (the plane wave is e^{-ikn}).
/// The kn > 0 branch is the reflected wave, kn < 0 the transmitted one.
inline cplx distortion_f(double k, Site n, double j) {
  const double ak = std::abs(k);
  const double s = std::sin(ak);
  if (ak >= pi || s == 0.0) throw std::domain_error("distortion undefined at k = " + std::to_string(k));
  if (j == 1.0) return 0.0;
  const double j2 = j * j - 1.0;
  const cplx e = std::polar(1.0, ak);
  const cplx den = 2.0 * s - cplx(0, j2) * e;
  if (k * n.value() > 0) return cplx(0, j2) * std::polar(1.0, 2.0 * k * n.value()) / den;
  return (2.0 * (j - 1.0) * s + cplx(0, j2) * e) / den;
}

/// Scattering state u_k(n) = e^{-ikn} (1 + f_kn), energy eps(k).
inline cplx mode_function(double k, Site n, double j) {
  return std::polar(1.0, -k * n.value()) * (1.0 + distortion_f(k, n, j));
}

/// Same state from the resolvent: [(1 + G0+ T+) |k>](n) at E = eps(k).
inline cplx mode_function_from_t_matrix(double k, Site n, double j, double h = 0.0) {
  const double E = band_energy(k, h);
  const TMatrix T = t_matrix(E, j, h);
  const Site a = Site::from_twice(-1), b = Site::from_twice(1);
  Eigen::Vector2cd plane(std::polar(1.0, -k * a.value()), std::polar(1.0, -k * b.value()));
  const Eigen::Vector2cd tk = T.t * plane;
  return std::polar(1.0, -k * n.value()) + g0(n, a, E, h) * tk(0) + g0(n, b, E, h) * tk(1);
}

/// Localized modes for j > 1: the one below the band is nodeless, the one
/// above alternates in sign. Both decay as e^{-q|n|}, q = ln j.
inline double localized_amplitude(BandSide side, double j, Site n) {
  if (!(j > 1.0)) throw std::domain_error("localized modes exist only for j > 1");
  const double q = std::log(j);
  const double a = std::sqrt(std::sinh(q)) * std::exp(-q * n.abs_value());
  if (side == BandSide::Below) return a;
  const int parity = (n.twice() + 1) / 2;  // n + 1/2
  return (parity % 2 == 0) ? a : -a;
}

inline double localized_energy(BandSide side, double j, double h) {
  if (!(j > 1.0)) throw std::domain_error("localized modes exist only for j > 1");
  const double s = j + 1.0 / j;
  return side == BandSide::Below ? -2.0 * h - s : -2.0 * h + s;
}

struct Entry {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool zero_mode = false;
};

struct Options {
  double abs_tol = 1e-10;
  long max_evaluations = 1'000'000;
};

namespace detail {

inline Entry band_integral(double k_lo, double k_hi, Site n, Site m, double j, const Options& opt,
                           bool squared_norm = false) {
  auto integrand = [&](double k) {
    const cplx un = mode_function(k, n, j);
    if (squared_norm) return std::norm(un) / (2 * pi);
    return (std::conj(un) * mode_function(k, m, j)).real() / (2 * pi);
  };
  quad::Options qo;
  qo.abs_tol = opt.abs_tol;
  qo.max_evaluations = opt.max_evaluations;
  const auto r = quad::integrate(integrand, k_lo, k_hi, {0.0}, qo);
  if (!r.converged)
    throw NumericalError("band quadrature did not converge: error estimate " + std::to_string(r.error) +
                         " after " + std::to_string(r.evaluations) + " evaluations");
  return {r.value, r.error, r.evaluations, false};
}

}  // namespace detail

/// <c+_n c_m> in the infinite-chain ground state.
inline Entry correlation_entry(Site n, Site m, double j, double h, const Options& opt = {}) {
  if (!(j >= 0.0) || !std::isfinite(j)) throw std::invalid_argument("defect strength j must be finite and >= 0");
  if (!std::isfinite(h)) throw std::invalid_argument("field h must be finite");
  const double kf = occupied_momentum(h);
  Entry e;
  if (kf > 0.0) e = detail::band_integral(-kf, kf, n, m, j, opt);
  if (j > 1.0) {
    for (BandSide side : {BandSide::Below, BandSide::Above}) {
      const double E = localized_energy(side, j, h);
      if (std::abs(E) <= kZeroModeTolerance) e.zero_mode = true;
      if (E < -kZeroModeTolerance) e.value += localized_amplitude(side, j, n) * localized_amplitude(side, j, m);
    }
  }
  if (std::abs(std::abs(h) - 1.0) <= kZeroModeTolerance && j == 1.0) e.zero_mode = true;
  return e;
}

/// Left side of the completeness relation at site n; equals 1.
inline Entry completeness(Site n, double j, const Options& opt = {}) {
  Entry e = detail::band_integral(-pi, pi, n, n, j, opt, true);
  if (j > 1.0)
    for (BandSide side : {BandSide::Below, BandSide::Above}) e.value += std::pow(localized_amplitude(side, j, n), 2);
  return e;
}

/// Correlation matrix restricted to sites lo..hi, plus the summed quadrature
/// error estimate.
inline CorrelationMatrix correlation_window(Site lo, Site hi, double j, double h, double* err_est = nullptr,
                                            const Options& opt = {}) {
  if (hi < lo) throw std::invalid_argument("empty correlation window");
  const int size = lo.distance_to(hi) + 1;
  CorrelationMatrix C;
  C.c.resize(size, size);
  C.first = lo;
  double err = 0.0;
  for (int a = 0; a < size; ++a)
    for (int b = a; b < size; ++b) {
      const Entry e = correlation_entry(lo.shifted(a), lo.shifted(b), j, h, opt);
      C.c(a, b) = C.c(b, a) = e.value;
      err += e.error;
      C.zero_mode = C.zero_mode || e.zero_mode;
    }
  if (err_est) *err_est = err;
  return C;
}

struct BondEntry {
  int bond;
  double value;
  double error;
  bool zero_mode;
};

/// Nearest-neighbour xx or zz correlator on bonds b_lo..b_hi of the infinite
/// chain. Each bond only needs the three entries on its two sites.
inline std::vector<BondEntry> bond_profile(Axis axis, double j, double h, int b_lo, int b_hi,
                                           const Options& opt = {}) {
  if (b_lo > b_hi) throw std::invalid_argument("empty bond range");
  std::vector<BondEntry> out;
  for (int b = b_lo; b <= b_hi; ++b) {
    double err = 0.0;
    const CorrelationMatrix C = correlation_window(bond_left(b), bond_right(b), j, h, &err, opt);
    out.push_back({b, bond_correlator(C, axis, b), err, C.zero_mode});
  }
  return out;
}

}  // namespace ringcut::tl

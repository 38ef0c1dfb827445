#pragma once

// Two-spin reduced states and their entanglement / discord measures.
//
// Basis order is |uu>, |ud>, |du>, |dd> with the first factor the spin at
// site n; "u" is spin up, the occupied fermion state, so sigma^z|u> = +|u>.

#include "corr.hpp"
#include "model.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ringcut {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

inline constexpr double kPositivityTolerance = 1e-10;
inline constexpr double kXStructureTolerance = 1e-10;

namespace pauli {

inline Matrix2c id() { return Matrix2c::Identity(); }
inline Matrix2c x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix2c y() {
  Matrix2c m;
  m << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  return m;
}
inline Matrix2c z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}
inline std::array<Matrix2c, 3> xyz() { return {x(), y(), z()}; }

inline Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

}  // namespace pauli

struct TwoQubitState {
  Matrix4c rho = Matrix4c::Identity() / 4.0;
  Site n, m;
  std::string provenance;
};

/// Largest entry outside the diagonal and anti-diagonal.
inline double x_structure_violation(const Matrix4c& rho) {
  double worst = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (r != c && r + c != 3) worst = std::max(worst, std::abs(rho(r, c)));
  return worst;
}

inline void check_state(const Matrix4c& rho, const std::string& what) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw NumericalError(what + ": density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-12) throw NumericalError(what + ": density matrix trace differs from 1");
  const double lowest = Eigen::SelfAdjointEigenSolver<Matrix4c>(rho, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (lowest < -kPositivityTolerance)
    throw NumericalError(what + ": density matrix has negative eigenvalue " + std::to_string(lowest));
}

/// Pauli expansion rho = (1/4) sum T_ab sigma_a x sigma_b with the cross terms
/// (xy, xz, ...) zero, as U(1) and reflection symmetry force.
inline Matrix4c rdm_from_correlators(const SpinCorrelators& s) {
  using namespace pauli;
  Matrix4c rho = kron(id(), id()) + s.mz_n * kron(z(), id()) + s.mz_m * kron(id(), z()) + s.sx_sx * kron(x(), x()) +
                 s.sy_sy * kron(y(), y()) + s.sz_sz * kron(z(), z());
  return rho / 4.0;
}

/// The Pauli expansion above with the diagonal taken from the joint
/// occupations, which equal (1 +- <z_n> +- <z_m> + <zz>)/4 but keep full
/// relative accuracy when one of them vanishes.
inline TwoQubitState two_qubit_rdm(const CorrelationMatrix& C, Site n, Site m) {
  if (n == m) throw std::invalid_argument("two_qubit_rdm needs distinct sites");
  TwoQubitState st;
  st.rho = rdm_from_correlators(spin_correlators(C, n, m));
  const PairOccupations occ = pair_occupations(C, n, m);
  st.rho(0, 0) = occ.both;
  st.rho(1, 1) = occ.occ_empty;
  st.rho(2, 2) = occ.empty_occ;
  st.rho(3, 3) = occ.neither;
  st.n = n;
  st.m = m;
  st.provenance = "wick: mz_n, mz_m, xx, yy, zz";
  check_state(st.rho, "two_qubit_rdm");
  if (x_structure_violation(st.rho) > kXStructureTolerance) throw NumericalError("two_qubit_rdm: state is not X-shaped");
  return st;
}

/// Closed form for U(1)-symmetric X states:
///   max(0, |<xx>| - (1/2) sqrt((1 + <zz>)^2 - (<z_n> + <z_m>)^2)).
inline double concurrence_paper(const SpinCorrelators& s) {
  const double S = 1.0 + s.sz_sz;
  const double t = s.mz_n + s.mz_m;
  return std::max(0.0, std::abs(s.sx_sx) - 0.5 * std::sqrt(std::max(0.0, S * S - t * t)));
}

/// Same formula, with (1 + <zz>)^2 - (<z_n> + <z_m>)^2 factored as
/// (1 + <zz> + <z_n> + <z_m>)(1 + <zz> - <z_n> - <z_m>) = 16 <n n><(1-n)(1-n)>.
inline double concurrence_paper(const CorrelationMatrix& C, Site n, Site m) {
  const PairOccupations occ = pair_occupations(C, n, m);
  const double xx = xx_correlator(C, n, m);
  return std::max(0.0, std::abs(xx) - 2.0 * std::sqrt(std::max(0.0, occ.both * occ.neither)));
}

namespace detail {

inline Matrix4c hermitian_sqrt(const Matrix4c& a) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(a);
  const Eigen::Vector4d v = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Wootters: lambda_i = sqrt of the eigenvalues of sqrt(rho) rho~ sqrt(rho),
/// rho~ = (y x y) rho* (y x y); C = max(0, l1 - l2 - l3 - l4).
///
/// For X-shaped rho the product rho rho~ splits into the blocks {uu, dd} and
/// {ud, du}; their eigenvalues are taken from trace and determinant with
/// det(rho rho~) = det(rho) det(rho~) per block, so a vanishing eigenvalue
/// stays at rounding level instead of its square root.
inline double concurrence_wootters(const Matrix4c& rho) {
  const Matrix4c yy = pauli::kron(pauli::y(), pauli::y());
  const Matrix4c tilde = yy * rho.conjugate() * yy;
  if (x_structure_violation(rho) == 0.0) {
    const Matrix4c r = rho * tilde;
    std::array<double, 4> l{};
    int k = 0;
    for (auto [i, j] : {std::pair{0, 3}, std::pair{1, 2}}) {
      auto det2 = [&](const Matrix4c& a) { return a(i, i) * a(j, j) - a(i, j) * a(j, i); };
      const std::complex<double> tr = r(i, i) + r(j, j);
      const std::complex<double> det = det2(rho) * det2(tilde);
      const std::complex<double> root = std::sqrt(tr * tr - 4.0 * det);
      const std::complex<double> big = std::abs(tr + root) >= std::abs(tr - root) ? 0.5 * (tr + root) : 0.5 * (tr - root);
      const std::complex<double> small = std::abs(big) > 0.0 ? det / big : 0.0;
      l[k++] = std::sqrt(std::max(0.0, big.real()));
      l[k++] = std::sqrt(std::max(0.0, small.real()));
    }
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
  }
  const Matrix4c s = detail::hermitian_sqrt(rho);
  Matrix4c r = s * tilde * s;
  r = 0.5 * (r + r.adjoint());
  Eigen::Vector4d l = Eigen::SelfAdjointEigenSolver<Matrix4c>(r, Eigen::EigenvaluesOnly).eigenvalues();
  for (int i = 0; i < 4; ++i) l(i) = std::sqrt(std::max(0.0, l(i)));
  std::sort(l.data(), l.data() + 4, std::greater<>());
  return std::max(0.0, l(0) - l(1) - l(2) - l(3));
}

inline double concurrence_wootters(const TwoQubitState& st) { return concurrence_wootters(st.rho); }

/// -sum p log2 p over the eigenvalues, which are clipped to 0 when slightly
/// negative.
template <class Matrix>
double von_neumann_entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double p = es.eigenvalues()(i);
    if (p < -kPositivityTolerance) throw NumericalError("negative eigenvalue " + std::to_string(p) + " in entropy");
    if (p > 0.0) s -= p * std::log2(p);
  }
  return s;
}

/// Binary entropy in bits.
inline double binary_entropy(double p) {
  p = std::clamp(p, 0.0, 1.0);
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

inline Matrix2c partial_trace_b(const Matrix4c& rho) {
  Matrix2c a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
  return a;
}

inline Matrix2c partial_trace_a(const Matrix4c& rho) {
  Matrix2c b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) b(i, j) = rho(i, j) + rho(2 + i, 2 + j);
  return b;
}

inline double mutual_information(const Matrix4c& rho) {
  return von_neumann_entropy(partial_trace_b(rho)) + von_neumann_entropy(partial_trace_a(rho)) -
         von_neumann_entropy(rho);
}

inline double mutual_information(const TwoQubitState& st) { return mutual_information(st.rho); }

/// Bloch data of a two-qubit state: local vectors a, b and correlation
/// tensor T_ij = Tr(rho sigma_i x sigma_j).
struct PauliTensor {
  Eigen::Vector3d a, b;
  Eigen::Matrix3d t;
};

inline PauliTensor pauli_tensor(const Matrix4c& rho) {
  const auto s = pauli::xyz();
  PauliTensor p;
  for (int i = 0; i < 3; ++i) {
    p.a(i) = (rho * pauli::kron(s[i], pauli::id())).trace().real();
    p.b(i) = (rho * pauli::kron(pauli::id(), s[i])).trace().real();
    for (int j = 0; j < 3; ++j) p.t(i, j) = (rho * pauli::kron(s[i], s[j])).trace().real();
  }
  return p;
}

/// Average entropy of qubit A after a projective measurement of B along the
/// Bloch direction (theta, phi).
inline double conditional_entropy(const PauliTensor& p, double theta, double phi) {
  const Eigen::Vector3d nhat(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  const double bn = p.b.dot(nhat);
  const Eigen::Vector3d tn = p.t * nhat;
  double s = 0.0;
  for (double sign : {1.0, -1.0}) {
    const double prob = 0.5 * (1.0 + sign * bn);
    if (prob <= 1e-15) continue;
    const double r = ((p.a + sign * tn) / (1.0 + sign * bn)).norm();
    s += prob * binary_entropy(0.5 * (1.0 + std::min(r, 1.0)));
  }
  return s;
}

struct MeasurementOptimum {
  double conditional_entropy = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  bool phi_independent = true;
};

struct OptimizerError : NumericalError {
  double best;
  double bracket_lo, bracket_hi;
  OptimizerError(const std::string& what, double best_value, double lo, double hi)
      : NumericalError(what), best(best_value), bracket_lo(lo), bracket_hi(hi) {}
};

namespace detail {

template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  if (hi - lo > tol) throw OptimizerError("golden-section search did not converge", std::min(f1, f2), lo, hi);
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Dense grid on [lo, hi], then golden-section refinement around the best
// grid point. Endpoints are compared explicitly.
template <class F>
std::pair<double, double> grid_then_golden(F&& f, double lo, double hi, int points, double tol) {
  int best = 0;
  double best_val = f(lo);
  const double step = (hi - lo) / (points - 1);
  for (int i = 1; i < points; ++i) {
    const double v = f(lo + i * step);
    if (v < best_val) best_val = v, best = i;
  }
  const double a = lo + std::max(0, best - 1) * step;
  const double b = lo + std::min(points - 1, best + 1) * step;
  auto [x, v] = golden_section(f, a, b, tol);
  if (best_val < v) return {lo + best * step, best_val};
  return {x, v};
}

}  // namespace detail

/// Minimizes the post-measurement conditional entropy. The angle phi drops
/// out for X states with <xx> = <yy>; this is checked by sampling, and a
/// state that fails the check is optimized over both angles.
inline MeasurementOptimum optimize_measurement(const PauliTensor& p) {
  using std::numbers::pi;
  constexpr double kTol = 1e-9;
  MeasurementOptimum best;
  auto at_phi0 = [&](double th) { return conditional_entropy(p, th, 0.0); };
  auto [theta, value] = detail::grid_then_golden(at_phi0, 0.0, pi / 2, 201, kTol);
  best.theta = theta;
  best.conditional_entropy = value;

  for (double th : {theta, pi / 7, pi / 3, pi / 2})
    for (double ph : {pi / 4, pi / 2, 2.0, pi})
      if (std::abs(conditional_entropy(p, th, ph) - conditional_entropy(p, th, 0.0)) > 1e-12)
        best.phi_independent = false;
  if (best.phi_independent) return best;

  // full sphere: theta in [0, pi], phi in [0, pi) covers every axis
  double th = theta, ph = 0.0, val = value;
  for (int i = 0; i <= 60; ++i)
    for (int k = 0; k < 60; ++k) {
      const double t = pi * i / 60, f = pi * k / 60;
      const double v = conditional_entropy(p, t, f);
      if (v < val) th = t, ph = f, val = v;
    }
  for (int round = 0; round < 50; ++round) {
    const double before = val;
    auto in_theta = [&](double t) { return conditional_entropy(p, t, ph); };
    std::tie(th, val) = detail::golden_section(in_theta, std::max(0.0, th - 0.1), std::min(pi, th + 0.1), kTol);
    auto in_phi = [&](double f) { return conditional_entropy(p, th, f); };
    std::tie(ph, val) = detail::golden_section(in_phi, ph - 0.1, ph + 0.1, kTol);
    if (before - val < 1e-13) break;
  }
  best.theta = th;
  best.phi = ph;
  best.conditional_entropy = val;
  return best;
}

struct CorrelationMeasures {
  double concurrence = 0.0;
  double mutual_information = 0.0;
  double classical_correlations = 0.0;
  double quantum_discord = 0.0;
  MeasurementOptimum measurement;
};

/// CC = S(A) - min S(A | measurement on B), QD = I - CC.
inline CorrelationMeasures correlation_measures(const Matrix4c& rho) {
  check_state(rho, "correlation_measures");
  CorrelationMeasures r;
  r.concurrence = concurrence_wootters(rho);
  r.mutual_information = mutual_information(rho);
  r.measurement = optimize_measurement(pauli_tensor(rho));
  r.classical_correlations = von_neumann_entropy(partial_trace_b(rho)) - r.measurement.conditional_entropy;
  r.quantum_discord = r.mutual_information - r.classical_correlations;
  return r;
}

inline CorrelationMeasures correlation_measures(const TwoQubitState& st) { return correlation_measures(st.rho); }

inline double classical_correlations(const Matrix4c& rho) { return correlation_measures(rho).classical_correlations; }
inline double quantum_discord(const Matrix4c& rho) { return correlation_measures(rho).quantum_discord; }
inline double classical_correlations(const TwoQubitState& st) { return classical_correlations(st.rho); }
inline double quantum_discord(const TwoQubitState& st) { return quantum_discord(st.rho); }

}  // namespace ringcut

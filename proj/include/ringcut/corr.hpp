#pragma once

// Two-point fermion contractions and spin correlators via Wick's theorem.

#include "model.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ringcut {

namespace detail {

// R R^T with the upper triangle mirrored, so the result is symmetric bit for bit.
inline Eigen::MatrixXd gram_rows(const Eigen::Ref<const Eigen::MatrixXd>& r) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(r.rows(), r.rows());
  if (r.cols() == 0) return g;  // empty sea; Eigen's blocking divides by zero here
  g.selfadjointView<Eigen::Lower>().rankUpdate(r);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

}  // namespace detail

/// C(n, m) = <c+_n c_m> over a contiguous window of sites starting at `first`.
/// Finite systems store the whole lattice; the thermodynamic-limit engine
/// stores only the window it needs.
struct CorrelationMatrix {
  Eigen::MatrixXd c;
  // Optional factors: window rows of the occupied and empty orbitals, so
  // C = O O^T and 1 - C = E E^T. Used where 1 - C would lose digits.
  Eigen::MatrixXd occupied_rows, empty_rows;

  bool has_factors() const { return empty_rows.rows() == c.rows() && occupied_rows.rows() == c.rows(); }
  Site first = Site::from_twice(1);
  bool zero_mode = false;

  int size() const { return static_cast<int>(c.rows()); }
  Site last() const { return first.shifted(size() - 1); }
  bool contains(Site n) const { return n >= first && n <= last(); }

  int index(Site n) const {
    if (!contains(n))
      throw std::out_of_range("site " + std::to_string(n.value()) + " outside the correlation window");
    return first.distance_to(n);
  }

  double operator()(Site n, Site m) const { return c(index(n), index(m)); }

  double hole(Site n, Site m) const {
    const int a = index(n), b = index(m);
    if (has_factors()) return empty_rows.row(a).dot(empty_rows.row(b));
    return (a == b ? 1.0 : 0.0) - c(a, b);
  }
};

inline CorrelationMatrix correlation_matrix(const SlaterState& st, int half_length) {
  CorrelationMatrix C;
  C.c = detail::gram_rows(st.modes);
  if (st.empty_modes.rows() == st.modes.rows()) {
    C.occupied_rows = st.modes;
    C.empty_rows = st.empty_modes;
  }
  C.first = pos_to_site(0, half_length);
  C.zero_mode = st.zero_mode;
  return C;
}

inline CorrelationMatrix correlation_matrix(const Spectrum& s, const Occupation& o) {
  return correlation_matrix(dirac_sea(s, o), s.size() / 2);
}

/// Only the rows/columns for sites lo..hi, which is all that local
/// observables need on large rings.
inline CorrelationMatrix correlation_window(const SlaterState& st, int half_length, Site lo, Site hi) {
  const int a = site_to_pos(lo, half_length);
  const int b = site_to_pos(hi, half_length);
  if (b < a) throw std::invalid_argument("empty correlation window");
  const auto rows = st.modes.middleRows(a, b - a + 1);
  CorrelationMatrix C;
  C.c = detail::gram_rows(rows);
  if (st.empty_modes.rows() == st.modes.rows()) {
    C.occupied_rows = rows;
    C.empty_rows = st.empty_modes.middleRows(a, b - a + 1);
  }
  C.first = lo;
  C.zero_mode = st.zero_mode;
  return C;
}

/// <sigma^z_n> = 2 C(n,n) - 1 (spin up is an occupied site).
inline double magnetization(const CorrelationMatrix& C, Site n) { return 2.0 * C(n, n) - 1.0; }

inline double zz_correlator(const CorrelationMatrix& C, Site n, Site m) {
  if (n == m) throw std::invalid_argument("zz_correlator needs distinct sites (sigma_z^2 = 1)");
  const double cnm = C(n, m);
  return magnetization(C, n) * magnetization(C, m) - 4.0 * cnm * cnm;
}

namespace detail {

// Contraction signs fixed against exact diagonalization of small chains:
//   <B_i A_j> = 2 C(i,j) - delta_ij,   <A_i B_j> = delta_ij - 2 C(i,j)
// with A = c+ + c and B = c+ - c. The string between n < m is the
// Lieb-Schultz-Mattis product prod_{l=n}^{m-1} B_l A_{l+1}.
inline double determinant(const Eigen::MatrixXd& g) {
  if (g.rows() == 1) return g(0, 0);
  return g.partialPivLu().determinant();
}

inline Eigen::MatrixXd string_contractions(const CorrelationMatrix& C, Site n, Site m, bool a_first) {
  const int r = n.distance_to(m);
  const int i0 = C.index(n);
  C.index(m);
  Eigen::MatrixXd g(r, r);
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      const int i = i0 + p;
      const int j = i0 + q + 1;
      const double delta = i == j ? 1.0 : 0.0;
      const double bi_aj = 2.0 * C.c(i, j) - delta;
      g(p, q) = a_first ? -bi_aj : bi_aj;
    }
  return g;
}

}  // namespace detail

/// <sigma^x_n sigma^x_m> as the determinant of the string contractions. The
/// string runs between the two sites in window order, never across the wrap.
inline double xx_correlator(const CorrelationMatrix& C, Site n, Site m) {
  if (n == m) throw std::invalid_argument("xx_correlator needs distinct sites");
  if (m < n) std::swap(n, m);
  return detail::determinant(detail::string_contractions(C, n, m, false));
}

/// <sigma^y_n sigma^y_m> = (-1)^r det <A_{n+p} B_{n+q+1}>.
inline double yy_correlator(const CorrelationMatrix& C, Site n, Site m) {
  if (n == m) throw std::invalid_argument("yy_correlator needs distinct sites");
  if (m < n) std::swap(n, m);
  const int r = n.distance_to(m);
  const double d = detail::determinant(detail::string_contractions(C, n, m, true));
  return (r % 2 == 0) ? d : -d;
}

/// Joint occupations of two distinct sites, e.g. occ_empty = <n_a (1 - n_b)>.
/// Written with the hole contractions so that probabilities which vanish
/// exactly come out at rounding level squared rather than rounding level.
struct PairOccupations {
  double both = 0.0;
  double occ_empty = 0.0;
  double empty_occ = 0.0;
  double neither = 0.0;
};

inline PairOccupations pair_occupations(const CorrelationMatrix& C, Site n, Site m) {
  if (n == m) throw std::invalid_argument("pair_occupations needs distinct sites");
  const double cnn = C(n, n), cmm = C(m, m), cnm = C(n, m);
  const double hnn = C.hole(n, n), hmm = C.hole(m, m), hnm = C.hole(n, m);
  PairOccupations p;
  p.both = cnn * cmm - cnm * cnm;
  p.occ_empty = cnn * hmm + cnm * cnm;
  p.empty_occ = hnn * cmm + cnm * cnm;
  p.neither = hnn * hmm - hnm * hnm;
  if (C.has_factors()) {
    // Gram determinants as squared products of R's diagonal (QR of the two
    // rows), exact zero for rank-deficient pairs.
    auto gram = [&](const Eigen::MatrixXd& f) {
      if (f.cols() < 2) return 0.0;
      Eigen::MatrixXd t(f.cols(), 2);
      t.col(0) = f.row(C.index(n)).transpose();
      t.col(1) = f.row(C.index(m)).transpose();
      const Eigen::MatrixXd r = Eigen::HouseholderQR<Eigen::MatrixXd>(t).matrixQR();
      return std::pow(r(0, 0) * r(1, 1), 2);
    };
    p.both = gram(C.occupied_rows);
    p.neither = gram(C.empty_rows);
  }
  return p;
}

struct SpinCorrelators {
  Site n, m;
  double sx_sx = 0.0;
  double sy_sy = 0.0;
  double sz_sz = 0.0;
  double mz_n = 0.0;
  double mz_m = 0.0;
};

inline SpinCorrelators spin_correlators(const CorrelationMatrix& C, Site n, Site m) {
  SpinCorrelators s;
  s.n = n;
  s.m = m;
  s.sx_sx = xx_correlator(C, n, m);
  s.sy_sy = yy_correlator(C, n, m);
  s.sz_sz = zz_correlator(C, n, m);
  s.mz_n = magnetization(C, n);
  s.mz_m = magnetization(C, m);
  return s;
}

enum class Axis { X, Z };

inline double bond_correlator(const CorrelationMatrix& C, Axis axis, int b) {
  const Site l = bond_left(b), r = bond_right(b);
  return axis == Axis::X ? xx_correlator(C, l, r) : zz_correlator(C, l, r);
}

struct BondValue {
  int bond;
  double value;
};

/// g^{aa}_b on a finite ring for bonds b_lo..b_hi (each inside the lattice,
/// b in [-M+1, M-1]).
inline std::vector<BondValue> bond_profile(const ModelParams& p, Axis axis, int b_lo, int b_hi,
                                           bool* zero_mode = nullptr) {
  p.validate();
  const int M = p.half_length;
  if (b_lo > b_hi) throw std::invalid_argument("empty bond range");
  if (b_lo < -M + 1 || b_hi > M - 1)
    throw std::out_of_range("bond range must lie within [-M+1, M-1]");
  const SlaterState st = ground_state(p);
  const CorrelationMatrix C = correlation_window(st, M, bond_left(b_lo), bond_right(b_hi));
  if (zero_mode) *zero_mode = st.zero_mode;
  std::vector<BondValue> out;
  for (int b = b_lo; b <= b_hi; ++b) out.push_back({b, bond_correlator(C, axis, b)});
  return out;
}

}  // namespace ringcut

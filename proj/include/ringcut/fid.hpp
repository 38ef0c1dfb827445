#pragma once

// Ring-cut fidelity <Sigma| Tr_{+-1/2} |Omega><Omega| |Sigma> between the ring
// ground state with the impurity spins traced out and the ground state of the
// open segment of 2M-2 spins whose ends are the sites +-3/2.
//
// Both states are Slater determinants, so every overlap is a determinant of
// orbital overlaps. The partial trace splits into four terms, one per
// occupation of the two impurity sites; an occupied impurity site enters the
// bra as an extra unit orbital.

#include "model.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace ringcut {

/// Occupied orbitals as rows (particles x sites).
struct ModeMatrix {
  Eigen::MatrixXd rows;
  bool zero_mode = false;

  int particles() const { return static_cast<int>(rows.rows()); }
  int sites() const { return static_cast<int>(rows.cols()); }
};

inline ModeMatrix mode_matrix(const SlaterState& st) { return {st.modes.transpose(), st.zero_mode}; }

/// Array positions of the segment in chain order: +3/2 ... M-1/2, then across
/// the wrap -M+1/2 ... -3/2.
inline std::vector<int> segment_positions(int M) {
  std::vector<int> order;
  for (int p = M + 1; p < 2 * M; ++p) order.push_back(p);
  for (int p = 0; p <= M - 2; ++p) order.push_back(p);
  return order;
}

/// Spectrum of the open 2M-2 site segment, indexed along the chain.
inline Spectrum segment_spectrum(int M, double h) {
  if (M < 2) throw std::invalid_argument("segment needs M >= 2");
  return diagonalize(open_chain_hamiltonian(2 * M - 2, h));
}

/// Occupied segment orbitals embedded in the 2M-site ring, zero on +-1/2.
inline ModeMatrix embed_segment(const Spectrum& seg, int M) {
  const Occupation o = occupation(seg);
  const auto order = segment_positions(M);
  ModeMatrix out;
  out.rows = Eigen::MatrixXd::Zero(o.count, 2 * M);
  out.zero_mode = o.zero_mode;
  int k = 0;
  for (int i = 0; i < seg.size(); ++i) {
    if (!o.occupied[i]) continue;
    for (int c = 0; c < seg.size(); ++c) out.rows(k, order[c]) = seg.eigenvectors(c, i);
    ++k;
  }
  return out;
}

inline ModeMatrix segment_modes(int M, double h) { return embed_segment(segment_spectrum(M, h), M); }

namespace detail {

inline double overlap_determinant(const Eigen::MatrixXd& g) {
  if (g.rows() == 0) return 1.0;
  return g.partialPivLu().determinant();
}

}  // namespace detail

/// <0| prod chi_k prod xi+_k' |0> for chi = V c, xi = U c: zero unless the
/// particle numbers agree, otherwise det(V U^T).
inline double dirac_sea_overlap(const ModeMatrix& V, const ModeMatrix& U) {
  if (V.sites() != U.sites()) throw std::invalid_argument("mode matrices live on different lattices");
  if (V.particles() != U.particles()) return 0.0;
  return detail::overlap_determinant(V.rows * U.rows.transpose());
}

struct FidelityReport {
  double term_00 = 0.0;  // impurity sites empty
  double term_m = 0.0;   // c_{-1/2}
  double term_p = 0.0;   // c_{+1/2}
  double term_mp = 0.0;  // c_{-1/2} c_{+1/2}
  double total = 0.0;
  int ring_particles = 0;
  int segment_particles = 0;
  bool zero_mode = false;
};

/// Fidelity from a ring state and embedded segment orbitals on the same
/// lattice. Only terms whose particle numbers match are evaluated.
inline FidelityReport ring_cut_fidelity(const ModeMatrix& omega, const ModeMatrix& sigma, int M) {
  if (omega.sites() != 2 * M || sigma.sites() != 2 * M)
    throw std::invalid_argument("fidelity inputs must live on the 2M-site ring");
  FidelityReport r;
  r.ring_particles = omega.particles();
  r.segment_particles = sigma.particles();
  r.zero_mode = omega.zero_mode || sigma.zero_mode;

  const int extra = omega.particles() - sigma.particles();
  if (extra >= 0 && extra <= 2) {
    const Eigen::MatrixXd base = omega.rows * sigma.rows.transpose();
    const int K = omega.particles();
    auto with_sites = [&](std::initializer_list<int> pos) {
      Eigen::MatrixXd g(K, K);
      g.leftCols(base.cols()) = base;
      int c = static_cast<int>(base.cols());
      for (int p : pos) g.col(c++) = omega.rows.col(p);
      const double d = detail::overlap_determinant(g);
      return d * d;
    };
    const int minus = M - 1, plus = M;
    if (extra == 0) r.term_00 = with_sites({});
    if (extra == 1) {
      r.term_m = with_sites({minus});
      r.term_p = with_sites({plus});
    }
    if (extra == 2) r.term_mp = with_sites({minus, plus});
  }
  r.total = r.term_00 + r.term_m + r.term_p + r.term_mp;
  return r;
}

/// Ring-cut fidelity for one parameter point. The naive ring follows the
/// fermion Hamiltonian without a parity string; the parity-exact ring puts
/// the Jordan-Wigner seam on the defect bond so that tracing out the two
/// impurity sites is the same in spin and fermion language.
inline FidelityReport ring_cut_fidelity(const ModelParams& p) {
  p.validate();
  if (p.boundary == Boundary::OpenSegment) throw std::invalid_argument("ring-cut fidelity needs a ring");
  const Seam seam = p.boundary == Boundary::RingParityExact ? Seam::Defect : Seam::Wrap;
  const SlaterState omega = ground_state(p, seam);
  return ring_cut_fidelity(mode_matrix(omega), segment_modes(p.half_length, p.field), p.half_length);
}

struct FidelityPoint {
  int half_length;
  double defect;
  double field;
  FidelityReport report;
};

/// Grid of fidelities. Each (M, j) ring and each M segment is diagonalized
/// once and reused across fields.
inline std::vector<FidelityPoint> fidelity_sweep(const std::vector<int>& Ms, const std::vector<double>& hs,
                                                 const std::vector<double>& js,
                                                 Boundary boundary = Boundary::RingNaive) {
  std::vector<FidelityPoint> out;
  const Seam seam = boundary == Boundary::RingParityExact ? Seam::Defect : Seam::Wrap;
  for (int M : Ms) {
    const Spectrum seg = segment_spectrum(M, 0.0);
    for (double j : js) {
      const ModelSpectra ring = solve(ModelParams{M, j, 0.0, boundary}, seam);
      for (double h : hs) {
        const SlaterState omega = ground_state(ring, h);
        out.push_back({M, j, h, ring_cut_fidelity(mode_matrix(omega), embed_segment(with_field(seg, h), M), M)});
      }
    }
  }
  return out;
}

}  // namespace ringcut

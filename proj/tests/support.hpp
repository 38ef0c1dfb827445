#pragma once

#include <ringcut/corr.hpp>
#include <ringcut/model.hpp>
#include <ringcut/fid.hpp>
#include <ringcut/oracle.hpp>
#include <ringcut/qinfo.hpp>

#include <algorithm>
#include <cstdint>
#include <random>

namespace support {

using namespace ringcut;

inline int pos(Site n, int M) { return site_to_pos(n, M); }

inline double ed_z(const oracle::DenseGroundState& st, Site n, int M) {
  return oracle::ed_correlator(st, {{pos(n, M), oracle::Pauli::Z}});
}

inline double ed_pair(const oracle::DenseGroundState& st, oracle::Pauli p, Site n, Site m, int M) {
  return oracle::ed_correlator(st, {{pos(n, M), p}, {pos(m, M), p}});
}

// <c+_p c_q> of a Fock-space state, canonical ordering by position.
inline double fock_hopping(const oracle::DenseGroundState& st, int p, int q) {
  double acc = 0.0;
  for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(st.psi.size()); ++s) {
    if (!(s >> q & 1u) || st.psi(s) == 0.0) continue;
    const std::uint32_t s1 = s ^ (1u << q);
    if (p != q && (s1 >> p & 1u)) continue;
    const std::uint32_t s2 = s1 | (1u << p);
    acc += st.psi(s2) * st.psi(s) * oracle::detail::fermion_sign(s, q) * oracle::detail::fermion_sign(s1, p);
  }
  return acc;
}

inline Eigen::MatrixXd random_orthogonal(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

// Largest deviations between the free-fermion pipeline and spin ED over all
// site pairs of one small system.
struct Agreement {
  double magnetization = 0, xx = 0, zz = 0, rdm = 0, concurrence = 0, discord = 0, fidelity = 0;
  double worst() const { return std::max({magnetization, xx, zz, rdm, concurrence, fidelity}); }
};

inline Agreement compare_with_ed(ModelParams p) {
  auto ed = oracle::ed_ground_state(p);
  if (ed.degenerate) {
    p.field += 1e-6;
    ed = oracle::ed_ground_state(p);
  }
  const int M = p.half_length, n = p.sites();
  const CorrelationMatrix C = correlation_matrix(ground_state(p), M);
  Agreement a;
  auto bump = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };
  for (int i = 0; i < n; ++i) {
    const Site si = pos_to_site(i, M);
    bump(a.magnetization, magnetization(C, si) - ed_z(ed, si, M));
    for (int k = i + 1; k < n; ++k) {
      const Site sk = pos_to_site(k, M);
      bump(a.xx, xx_correlator(C, si, sk) - ed_pair(ed, oracle::Pauli::X, si, sk, M));
      bump(a.zz, zz_correlator(C, si, sk) - ed_pair(ed, oracle::Pauli::Z, si, sk, M));
      const TwoQubitState st = two_qubit_rdm(C, si, sk);
      const Matrix4c ref = oracle::ed_rdm(ed, i, k);
      bump(a.rdm, (st.rho - ref).cwiseAbs().maxCoeff());
      bump(a.concurrence, concurrence_paper(C, si, sk) - concurrence_wootters(ref));
      const auto mine = correlation_measures(st), theirs = correlation_measures(ref);
      bump(a.discord, mine.quantum_discord - theirs.quantum_discord);
      bump(a.discord, mine.classical_correlations - theirs.classical_correlations);
    }
  }
  if (p.boundary == Boundary::RingParityExact) bump(a.fidelity, ring_cut_fidelity(p).total - oracle::ed_fidelity(p));
  return a;
}

}  // namespace support

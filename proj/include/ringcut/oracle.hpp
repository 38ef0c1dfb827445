#pragma once

// Brute-force references: exact diagonalization of the spin Hamiltonian in the
// full tensor-product space, and of the quadratic fermion Hamiltonian in Fock
// space. Neither path uses single-particle orbitals; they exist to check the
// free-fermion pipeline on rings and chains of at most ten sites.

#include "model.hpp"
#include "spectrum.hpp"

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ringcut::oracle {

inline constexpr int kMaxSites = 10;

struct Bond {
  int a, b;
  double coupling;
};

/// H = -sum_bonds J/2 (sx sx + sy sy) - h sum sz over array positions.
struct SpinSystem {
  int sites = 0;
  std::vector<Bond> bonds;
  double field = 0.0;
};

inline SpinSystem spin_system(const ModelParams& p) {
  p.validate();
  SpinSystem s;
  s.sites = p.sites();
  s.field = p.field;
  const int n = s.sites, M = p.half_length;
  for (int i = 0; i + 1 < n; ++i) s.bonds.push_back({i, i + 1, i == M - 1 ? p.defect : 1.0});
  if (p.boundary == Boundary::OpenSegment) {
    s.bonds[M - 1].coupling = 1.0;
  } else {
    s.bonds.push_back({n - 1, 0, 1.0});
  }
  return s;
}

/// Open chain through the given array positions, in chain order.
inline SpinSystem open_spin_chain(const std::vector<int>& order, int sites, double field) {
  SpinSystem s;
  s.sites = sites;
  s.field = field;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) s.bonds.push_back({order[i], order[i + 1], 1.0});
  return s;
}

struct DenseGroundState {
  Eigen::VectorXd psi;  // amplitude of basis state s, bit p set = spin up at position p
  double energy = 0.0;
  bool degenerate = false;
  int sites = 0;
};

namespace detail {

inline std::vector<std::vector<std::uint32_t>> sectors(int sites) {
  std::vector<std::vector<std::uint32_t>> out(sites + 1);
  for (std::uint32_t s = 0; s < (1u << sites); ++s) out[std::popcount(s)].push_back(s);
  return out;
}

// Diagonalizes each particle-number block and keeps the global minimum.
template <class BlockBuilder>
DenseGroundState lowest_state(int sites, BlockBuilder&& build_block) {
  if (sites > kMaxSites) throw std::invalid_argument("exact diagonalization is capped at 10 sites");
  const auto blocks = sectors(sites);
  DenseGroundState gs;
  gs.sites = sites;
  gs.psi = Eigen::VectorXd::Zero(1 << sites);
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (const auto& basis : blocks) {
    const int d = static_cast<int>(basis.size());
    std::vector<int> lookup(1 << sites, -1);
    for (int i = 0; i < d; ++i) lookup[basis[i]] = i;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    build_block(basis, lookup, h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("oracle eigensolver failed");
    for (int k = 0; k < d; ++k) {
      const double e = es.eigenvalues()(k);
      if (e < best) {
        second = best;
        best = e;
        gs.psi.setZero();
        for (int i = 0; i < d; ++i) gs.psi(basis[i]) = es.eigenvectors()(i, k);
      } else if (e < second) {
        second = e;
      }
    }
  }
  gs.energy = best;
  gs.degenerate = second - best <= 1e-10;
  return gs;
}

inline double fermion_sign(std::uint32_t s, int p) {
  return (std::popcount(s & ((1u << p) - 1u)) % 2) ? -1.0 : 1.0;
}

}  // namespace detail

inline DenseGroundState ed_ground_state(const SpinSystem& sys) {
  return detail::lowest_state(sys.sites, [&](const auto& basis, const auto& lookup, Eigen::MatrixXd& h) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const std::uint32_t s = basis[i];
      h(i, i) = -sys.field * (2.0 * std::popcount(s) - sys.sites);
      for (const auto& bd : sys.bonds) {
        const bool ua = s >> bd.a & 1u, ub = s >> bd.b & 1u;
        if (ua == ub) continue;
        const std::uint32_t t = s ^ (1u << bd.a) ^ (1u << bd.b);
        h(lookup[t], i) += -bd.coupling;
      }
    }
  });
}

inline DenseGroundState ed_ground_state(const ModelParams& p) {
  if (p.sites() > kMaxSites) throw std::invalid_argument("exact diagonalization is capped at 10 sites");
  return ed_ground_state(spin_system(p));
}

/// Ground state of sum_pq t_pq c+_p c_q in Fock space, canonical ordering by
/// mode index.
inline DenseGroundState fock_ground_state(const Eigen::MatrixXd& t) {
  const int n = static_cast<int>(t.rows());
  return detail::lowest_state(n, [&](const auto& basis, const auto& lookup, Eigen::MatrixXd& h) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const std::uint32_t s = basis[i];
      for (int q = 0; q < n; ++q) {
        if (!(s >> q & 1u)) continue;
        const std::uint32_t s1 = s ^ (1u << q);
        const double sq = detail::fermion_sign(s, q);
        for (int p = 0; p < n; ++p) {
          if (t(p, q) == 0.0 || (s1 >> p & 1u)) continue;
          const std::uint32_t s2 = s1 | (1u << p);
          h(lookup[s2], i) += t(p, q) * sq * detail::fermion_sign(s1, p);
        }
      }
    }
  });
}

enum class Pauli { X, Y, Z };

struct PauliFactor {
  int pos;
  Pauli op;
};

inline std::complex<double> ed_expectation(const DenseGroundState& st, const std::vector<PauliFactor>& ops) {
  using cd = std::complex<double>;
  std::complex<double> acc = 0.0;
  for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(st.psi.size()); ++s) {
    if (st.psi(s) == 0.0) continue;
    std::uint32_t t = s;
    cd amp = st.psi(s);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
      const bool up = t >> it->pos & 1u;
      switch (it->op) {
        case Pauli::X: t ^= 1u << it->pos; break;
        case Pauli::Y: amp *= up ? cd(0, 1) : cd(0, -1); t ^= 1u << it->pos; break;
        case Pauli::Z: amp *= up ? 1.0 : -1.0; break;
      }
    }
    acc += st.psi(t) * amp;
  }
  return acc;
}

inline double ed_correlator(const DenseGroundState& st, const std::vector<PauliFactor>& ops) {
  if (st.degenerate)
    throw std::domain_error("degenerate ground state: correlators are ill-defined, perturb h by 1e-6");
  return ed_expectation(st, ops).real();
}

/// Two-site reduced density matrix in the basis |uu>, |ud>, |du>, |dd>
/// (first label = position a).
inline Eigen::Matrix4cd ed_rdm(const DenseGroundState& st, int a, int b) {
  if (st.degenerate)
    throw std::domain_error("degenerate ground state: reduced state is ill-defined, perturb h by 1e-6");
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  const std::uint32_t mask = (1u << a) | (1u << b);
  auto index = [&](std::uint32_t s) { return 2 * (s >> a & 1u ? 0 : 1) + (s >> b & 1u ? 0 : 1); };
  for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(st.psi.size()); ++s) {
    if (st.psi(s) == 0.0) continue;
    const std::uint32_t rest = s & ~mask;
    for (std::uint32_t local = 0; local < 4; ++local) {
      const std::uint32_t t = rest | ((local & 1u) << a) | ((local >> 1 & 1u) << b);
      rho(index(s), index(t)) += st.psi(s) * st.psi(t);
    }
  }
  return rho;
}

/// Array positions of the segment left after removing the impurity sites,
/// in chain order from +3/2 around the wrap to -3/2.
inline std::vector<int> segment_chain_order(int M) {
  std::vector<int> order;
  for (int p = M + 1; p < 2 * M; ++p) order.push_back(p);
  for (int p = 0; p <= M - 2; ++p) order.push_back(p);
  return order;
}

/// <Sigma| Tr_{+-1/2} |Omega><Omega| |Sigma> for the exact spin ground states,
/// built literally: reduced density matrix first, then the expectation value.
inline double ed_fidelity(const ModelParams& p) {
  if (p.boundary == Boundary::OpenSegment) throw std::invalid_argument("ring-cut fidelity needs a ring");
  const int M = p.half_length;
  const int n = p.sites();
  const auto omega = ed_ground_state(spin_system(p));
  const auto order = segment_chain_order(M);
  const int rest = n - 2;
  // Segment as its own chain on positions 0..rest-1.
  std::vector<int> chain(rest);
  for (int i = 0; i < rest; ++i) chain[i] = i;
  const auto sigma = ed_ground_state(open_spin_chain(chain, rest, p.field));
  if (omega.degenerate || sigma.degenerate)
    throw std::domain_error("degenerate ground state in the fidelity oracle, perturb h by 1e-6");

  auto embed = [&](std::uint32_t r) {
    std::uint32_t s = 0;
    for (int i = 0; i < rest; ++i)
      if (r >> i & 1u) s |= 1u << order[i];
    return s;
  };
  const int dim = 1 << rest;
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint32_t imp = 0; imp < 4; ++imp) {
    const std::uint32_t ib = ((imp & 1u) << (M - 1)) | ((imp >> 1 & 1u) << M);
    Eigen::VectorXd v(dim);
    for (int r = 0; r < dim; ++r) v(r) = omega.psi(embed(r) | ib);
    rho += v * v.transpose();
  }
  return sigma.psi.dot(rho * sigma.psi);
}

/// The four squared overlaps <Sigma~| c... |Omega> of the naive fermion
/// problem, from Fock-space ground states: {none, c_{-1/2}, c_{+1/2},
/// c_{-1/2} c_{+1/2}}.
inline std::array<double, 4> fock_fidelity_terms(const ModelParams& p) {
  ModelParams q = p;
  q.boundary = Boundary::RingNaive;
  const int M = q.half_length;
  const int n = q.sites();
  const Eigen::MatrixXd ring = build_hamiltonian(q).front().matrix();

  // Segment modes in ascending array order, impurity positions removed.
  std::vector<int> keep;
  for (int pos = 0; pos < n; ++pos)
    if (pos != M - 1 && pos != M) keep.push_back(pos);
  const int rest = n - 2;
  Eigen::MatrixXd seg = Eigen::MatrixXd::Zero(rest, rest);
  auto link = [&](int pa, int pb) {
    int ia = -1, ib = -1;
    for (int i = 0; i < rest; ++i) {
      if (keep[i] == pa) ia = i;
      if (keep[i] == pb) ib = i;
    }
    seg(ia, ib) = seg(ib, ia) = -1.0;
  };
  const auto order = segment_chain_order(M);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) link(order[i], order[i + 1]);
  seg.diagonal().setConstant(-2.0 * q.field);

  const auto omega = fock_ground_state(ring);
  const auto sigma = fock_ground_state(seg);
  if (omega.degenerate || sigma.degenerate)
    throw std::domain_error("degenerate Fock ground state in the fidelity oracle, perturb h by 1e-6");

  Eigen::VectorXd sigma_full = Eigen::VectorXd::Zero(1 << n);
  for (std::uint32_t r = 0; r < (1u << rest); ++r) {
    std::uint32_t s = 0;
    for (int i = 0; i < rest; ++i)
      if (r >> i & 1u) s |= 1u << keep[i];
    sigma_full(s) = sigma.psi(r);
  }

  auto annihilate = [&](const Eigen::VectorXd& v, int pos) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(v.size()); ++s) {
      if (!(s >> pos & 1u) || v(s) == 0.0) continue;
      out(s ^ (1u << pos)) += detail::fermion_sign(s, pos) * v(s);
    }
    return out;
  };
  const int a = M - 1, b = M;
  const Eigen::VectorXd& w0 = omega.psi;
  const Eigen::VectorXd wa = annihilate(w0, a);
  const Eigen::VectorXd wb = annihilate(w0, b);
  const Eigen::VectorXd wab = annihilate(wb, a);
  auto sq = [&](const Eigen::VectorXd& w) {
    const double o = sigma_full.dot(w);
    return o * o;
  };
  return {sq(w0), sq(wa), sq(wb), sq(wab)};
}

}  // namespace ringcut::oracle

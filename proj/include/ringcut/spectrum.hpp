#pragma once

// Single-particle spectra, Dirac-sea occupation and bound-state detection.

#include "model.hpp"

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcut {

/// Eigenvalues within this distance of zero count as Fermi-level modes.
inline constexpr double kZeroModeTolerance = 1e-9;
/// Margin outside the band edges used to call a mode localized.
inline constexpr double kBandTolerance = 1e-6;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending, includes the -2h shift
  Eigen::MatrixXd eigenvectors;  // column i belongs to eigenvalues(i)
  Eigen::VectorXi reflection_parity;  // +1 even, -1 odd under n <-> -n, 0 unknown
  ModelParams params;
  double field = 0.0;
  Sector sector = Sector::None;
  Seam seam = Seam::Wrap;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double band_bottom() const { return -2.0 * field - 2.0; }
  double band_top() const { return -2.0 * field + 2.0; }
};

/// Same eigenvectors at another field; the field only shifts the diagonal.
inline Spectrum with_field(const Spectrum& s, double h) {
  Spectrum out = s;
  out.eigenvalues.array() -= 2.0 * (h - s.field);
  out.field = h;
  out.params.field = h;
  return out;
}

namespace detail {

inline bool is_tridiagonal(const Eigen::MatrixXd& a) {
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r)
      if (std::abs(r - c) > 1 && a(r, c) != 0.0) return false;
  return true;
}

inline bool is_reflection_symmetric(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (a(r, c) != a(n - 1 - r, n - 1 - c)) return false;
  return true;
}

struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// MRRR (LAPACK dstevr) on the tridiagonal blocks: O(n^2) with eigenvectors,
// against O(n^3) for implicit QR.
inline Eigenpairs solve_tridiagonal(const Eigen::MatrixXd& a, const std::string& what) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd d = a.diagonal();
  Eigen::VectorXd e(n);
  e.head(n - 1) = a.diagonal(-1);
  e(n - 1) = 0.0;
  Eigenpairs ep;
  ep.values.resize(n);
  ep.vectors.resize(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, 0.0,
                                         &found, ep.values.data(), ep.vectors.data(), n, support.data());
  if (info != 0 || found != n)
    throw NumericalError("tridiagonal eigensolver failed on " + what + " (dimension " + std::to_string(n) +
                         ", info " + std::to_string(info) + ", eigenpair " + std::to_string(found) + ")");
  return ep;
}

inline Eigenpairs solve_symmetric(const Eigen::MatrixXd& a, const std::string& what) {
  if (is_tridiagonal(a) && a.rows() > 1) return solve_tridiagonal(a, what);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge on " + what + " (dimension " +
                         std::to_string(a.rows()) + ")");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace detail

/// Diagonalizes the field-free hopping matrix and shifts by -2h.
///
/// Reflection-symmetric matrices of even size are split into the even and odd
/// blocks A(p,p') +- A(p, N-1-p'), which are tridiagonal for every ring and
/// chain built in model.hpp. Anything else goes through the dense solver.
inline Spectrum diagonalize(const SingleParticleHamiltonian& H) {
  const Eigen::MatrixXd& a = H.hopping;
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n) throw std::invalid_argument("hopping matrix must be square and non-empty");
  if (!a.allFinite()) throw std::invalid_argument("hopping matrix has non-finite entries");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("hopping matrix is not symmetric");

  Spectrum s;
  s.params = H.params;
  s.field = H.field;
  s.sector = H.sector;
  s.seam = H.seam;

  std::vector<double> values;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<int> parity;
  values.reserve(n);
  vectors.reserve(n);

  if (n % 2 == 0 && detail::is_reflection_symmetric(a)) {
    const int m = n / 2;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int sign : {+1, -1}) {
      Eigen::MatrixXd block(m, m);
      for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) block(r, c) = a(r, c) + sign * a(r, n - 1 - c);
      auto ep = detail::solve_symmetric(block, sign > 0 ? "even block" : "odd block");
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd v(n);
        for (int p = 0; p < m; ++p) {
          v(p) = ep.vectors(p, i) * inv_sqrt2;
          v(n - 1 - p) = sign * ep.vectors(p, i) * inv_sqrt2;
        }
        values.push_back(ep.values(i));
        vectors.push_back(std::move(v));
        parity.push_back(sign);
      }
    }
  } else {
    auto ep = detail::solve_symmetric(a, "hopping matrix");
    for (int i = 0; i < n; ++i) {
      values.push_back(ep.values(i));
      vectors.push_back(ep.vectors.col(i));
      parity.push_back(0);
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return values[x] < values[y]; });

  s.eigenvalues.resize(n);
  s.eigenvectors.resize(n, n);
  s.reflection_parity.resize(n);
  for (int i = 0; i < n; ++i) {
    s.eigenvalues(i) = values[order[i]] - 2.0 * H.field;
    s.eigenvectors.col(i) = vectors[order[i]];
    s.reflection_parity(i) = parity[order[i]];
  }
  return s;
}

struct Occupation {
  std::vector<bool> occupied;
  int count = 0;
  bool zero_mode = false;
};

inline Occupation occupation(const Spectrum& s) {
  Occupation o;
  o.occupied.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const double e = s.eigenvalues(i);
    o.occupied[i] = e < -kZeroModeTolerance;
    if (o.occupied[i]) ++o.count;
    if (std::abs(e) <= kZeroModeTolerance) o.zero_mode = true;
  }
  return o;
}

enum class BandSide { Below, Above };

struct BoundState {
  double energy;
  BandSide side;
  int index;  // column in Spectrum::eigenvectors
};

inline std::vector<BoundState> bound_state_energies(const Spectrum& s) {
  std::vector<BoundState> out;
  for (int i = 0; i < s.size(); ++i) {
    const double e = s.eigenvalues(i);
    if (e < s.band_bottom() - kBandTolerance) out.push_back({e, BandSide::Below, i});
    else if (e > s.band_top() + kBandTolerance) out.push_back({e, BandSide::Above, i});
  }
  return out;
}

/// Many-fermion Slater determinant given by its occupied orbitals.
struct SlaterState {
  Eigen::MatrixXd modes;        // sites x particles, orthonormal columns
  Eigen::MatrixXd empty_modes;  // the unoccupied complement
  Eigen::VectorXd mode_energies;
  double energy = 0.0;
  bool zero_mode = false;
  Sector sector = Sector::None;

  int particles() const { return static_cast<int>(modes.cols()); }
  int sites() const { return static_cast<int>(modes.rows()); }
};

inline SlaterState dirac_sea(const Spectrum& s, const Occupation& o) {
  SlaterState st;
  st.modes.resize(s.size(), o.count);
  st.empty_modes.resize(s.size(), s.size() - o.count);
  st.mode_energies.resize(o.count);
  int k = 0, e = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (!o.occupied[i]) {
      st.empty_modes.col(e++) = s.eigenvectors.col(i);
      continue;
    }
    st.modes.col(k) = s.eigenvectors.col(i);
    st.mode_energies(k) = s.eigenvalues(i);
    st.energy += s.eigenvalues(i);
    ++k;
  }
  st.zero_mode = o.zero_mode;
  st.sector = s.sector;
  return st;
}

/// Diagonalized candidates for one model, reusable across fields.
struct ModelSpectra {
  ModelParams params;
  std::vector<Spectrum> candidates;
};

inline ModelSpectra solve(const ModelParams& p, Seam seam = Seam::Wrap) {
  ModelSpectra ms;
  ms.params = p;
  if (p.boundary == Boundary::RingParityExact) {
    for (Sector sec : {Sector::Periodic, Sector::Antiperiodic})
      ms.candidates.push_back(diagonalize(sector_hamiltonian(p, sec, seam)));
  } else {
    for (const auto& H : build_hamiltonian(p)) ms.candidates.push_back(diagonalize(H));
  }
  return ms;
}

namespace detail {

// Lowest state of one parity sector whose particle number has the parity the
// sector's boundary sign assumes.
inline SlaterState sector_ground_state(const Spectrum& s) {
  Occupation o = occupation(s);
  const bool want_odd = s.sector == Sector::Periodic;
  if ((o.count % 2 == 1) != want_odd) {
    const int n = s.size();
    const int top = o.count - 1;  // highest occupied (sorted ascending)
    const int bottom = o.count;   // lowest empty
    const bool can_remove = top >= 0;
    const bool can_add = bottom < n;
    bool add = can_add;
    if (can_add && can_remove) add = s.eigenvalues(bottom) < -s.eigenvalues(top);
    if (add) {
      o.occupied[bottom] = true;
      ++o.count;
    } else {
      o.occupied[top] = false;
      --o.count;
    }
    if (can_add && can_remove &&
        std::abs(s.eigenvalues(bottom) + s.eigenvalues(top)) <= kZeroModeTolerance)
      o.zero_mode = true;
  }
  return dirac_sea(s, o);
}

}  // namespace detail

/// Ground state at field h from precomputed spectra. For the parity-exact ring
/// both sectors are filled consistently and the lower energy wins; a tie is
/// reported through zero_mode.
inline SlaterState ground_state(const ModelSpectra& ms, double h) {
  if (ms.params.boundary != Boundary::RingParityExact)
    return dirac_sea(with_field(ms.candidates.front(), h), occupation(with_field(ms.candidates.front(), h)));
  SlaterState best;
  bool have = false;
  bool tie = false;
  for (const auto& cand : ms.candidates) {
    SlaterState st = detail::sector_ground_state(with_field(cand, h));
    if (!have || st.energy < best.energy - 1e-10) {
      tie = have && std::abs(st.energy - best.energy) <= 1e-10;
      best = std::move(st);
      have = true;
    } else if (std::abs(st.energy - best.energy) <= 1e-10) {
      tie = true;
    }
  }
  best.zero_mode = best.zero_mode || tie;
  return best;
}

inline SlaterState ground_state(const ModelParams& p, Seam seam = Seam::Wrap) {
  return ground_state(solve(p, seam), p.field);
}

}  // namespace ringcut

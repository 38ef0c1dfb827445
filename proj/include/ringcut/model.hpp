#pragma once

// Lattice conventions and single-particle hopping matrices for the XX ring
// with one bond defect.
//
// Sites carry half-integer labels n = -M+1/2 ... M-1/2 and are stored in
// arrays at position p = n + M - 1/2. Bond b = n + 1/2 joins sites b-1/2 and
// b+1/2, so the defect bond b = 0 sits between array positions M-1 and M and
// the wrap bond joins positions 2M-1 and 0.
//
// Fermion convention (Jordan-Wigner, spin up = occupied):
//   H = - sum_b J_b (c+_{b+1/2} c_{b-1/2} + h.c.) - 2h sum_n c+_n c_n
// so hopping entries are negative and the uniform band is -2cos(k) - 2h.

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcut {

enum class Boundary { RingNaive, RingParityExact, OpenSegment };

inline std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::RingNaive: return "ring_naive";
    case Boundary::RingParityExact: return "ring_parity_exact";
    case Boundary::OpenSegment: return "open_segment";
  }
  return "?";
}

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "ring_naive") return Boundary::RingNaive;
  if (s == "ring_parity_exact") return Boundary::RingParityExact;
  if (s == "open_segment") return Boundary::OpenSegment;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

struct ModelParams {
  int half_length = 2;      // M, the ring has 2M sites
  double defect = 1.0;      // j, in units of the uniform coupling
  double field = 0.0;       // h
  Boundary boundary = Boundary::RingNaive;

  int sites() const { return 2 * half_length; }

  void validate() const {
    if (half_length < 2) throw std::invalid_argument("half_length M must be >= 2");
    if (!(defect >= 0.0) || !std::isfinite(defect))
      throw std::invalid_argument("defect strength j must be finite and >= 0");
    if (!std::isfinite(field)) throw std::invalid_argument("field h must be finite");
  }
};

/// Half-integer lattice site, stored as 2n (always odd).
class Site {
 public:
  constexpr Site() = default;

  static constexpr Site from_twice(int twice) {
    if (twice % 2 == 0) throw std::invalid_argument("site label must be a half-integer");
    return Site(twice);
  }

  static Site from_value(double n) {
    const double t = 2.0 * n;
    const long r = std::lround(t);
    if (std::abs(t - static_cast<double>(r)) > 1e-9 || r % 2 == 0)
      throw std::invalid_argument("site label " + std::to_string(n) + " is not a half-integer");
    return Site(static_cast<int>(r));
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return twice_ / 2.0; }
  constexpr double abs_value() const { return (twice_ < 0 ? -twice_ : twice_) / 2.0; }
  constexpr Site shifted(int steps) const { return Site(twice_ + 2 * steps); }
  constexpr Site mirrored() const { return Site(-twice_); }

  /// Integer distance in lattice spacings.
  constexpr int distance_to(Site other) const {
    const int d = (other.twice_ - twice_) / 2;
    return d < 0 ? -d : d;
  }

  friend constexpr bool operator==(Site a, Site b) { return a.twice_ == b.twice_; }
  friend constexpr auto operator<=>(Site a, Site b) { return a.twice_ <=> b.twice_; }

 private:
  constexpr explicit Site(int twice) : twice_(twice) {}
  int twice_ = 1;
};

inline Site site(double n) { return Site::from_value(n); }

/// Left and right sites of bond b.
inline Site bond_left(int b) { return Site::from_twice(2 * b - 1); }
inline Site bond_right(int b) { return Site::from_twice(2 * b + 1); }

inline int site_to_pos(Site n, int M) {
  const int p = (n.twice() + 2 * M - 1) / 2;
  if (p < 0 || p >= 2 * M)
    throw std::out_of_range("site " + std::to_string(n.value()) + " outside a ring with M = " +
                            std::to_string(M));
  return p;
}

inline Site pos_to_site(int p, int M) {
  if (p < 0 || p >= 2 * M)
    throw std::out_of_range("array position " + std::to_string(p) + " outside [0, 2M)");
  return Site::from_twice(2 * p - 2 * M + 1);
}

/// Where the Jordan-Wigner string starts on a ring. The bond that closes the
/// string picks up the fermion-parity sign.
enum class Seam { Wrap, Defect };

/// Fermion-parity sector of a ring matrix. Periodic wrap hopping is exact for
/// odd particle number, antiperiodic for even.
enum class Sector { None, Periodic, Antiperiodic };

struct SingleParticleHamiltonian {
  Eigen::MatrixXd hopping;  // field-free part, symmetric
  double field = 0.0;
  ModelParams params;
  Sector sector = Sector::None;
  Seam seam = Seam::Wrap;

  int size() const { return static_cast<int>(hopping.rows()); }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd a = hopping;
    a.diagonal().array() -= 2.0 * field;
    return a;
  }
};

namespace detail {

inline SingleParticleHamiltonian ring_matrix(const ModelParams& p, double wrap, double defect_hop,
                                             Sector sector, Seam seam) {
  const int n = p.sites();
  SingleParticleHamiltonian H;
  H.hopping = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) H.hopping(i, i + 1) = H.hopping(i + 1, i) = -1.0;
  const int m = p.half_length;
  H.hopping(m - 1, m) = H.hopping(m, m - 1) = defect_hop;
  H.hopping(0, n - 1) += wrap;
  H.hopping(n - 1, 0) += wrap;
  H.field = p.field;
  H.params = p;
  H.sector = sector;
  H.seam = seam;
  return H;
}

}  // namespace detail

/// Open chain of L sites in array order at field h.
inline SingleParticleHamiltonian open_chain_hamiltonian(int length, double field) {
  if (length < 1) throw std::invalid_argument("open chain needs at least one site");
  SingleParticleHamiltonian H;
  H.hopping = Eigen::MatrixXd::Zero(length, length);
  for (int i = 0; i + 1 < length; ++i) H.hopping(i, i + 1) = H.hopping(i + 1, i) = -1.0;
  H.field = field;
  H.params.half_length = length / 2;
  H.params.defect = 0.0;
  H.params.field = field;
  H.params.boundary = Boundary::OpenSegment;
  return H;
}

/// Ring matrix for one parity sector. With Seam::Wrap the wrap bond carries the
/// sector sign, with Seam::Defect the defect bond does.
inline SingleParticleHamiltonian sector_hamiltonian(const ModelParams& p, Sector sector,
                                                    Seam seam = Seam::Wrap) {
  p.validate();
  const double s = sector == Sector::Antiperiodic ? -1.0 : 1.0;
  if (seam == Seam::Wrap) return detail::ring_matrix(p, -s, -p.defect, sector, seam);
  return detail::ring_matrix(p, -1.0, -s * p.defect, sector, seam);
}

/// Candidate single-particle matrices for the model. RingNaive and OpenSegment
/// give one matrix; RingParityExact gives the periodic and antiperiodic sector
/// matrices (in that order), with the sign carried by the wrap bond.
inline std::vector<SingleParticleHamiltonian> build_hamiltonian(const ModelParams& p) {
  p.validate();
  switch (p.boundary) {
    case Boundary::RingNaive:
      return {detail::ring_matrix(p, -1.0, -p.defect, Sector::None, Seam::Wrap)};
    case Boundary::OpenSegment: {
      auto H = open_chain_hamiltonian(p.sites(), p.field);
      H.params = p;
      return {H};
    }
    case Boundary::RingParityExact:
      return {sector_hamiltonian(p, Sector::Periodic), sector_hamiltonian(p, Sector::Antiperiodic)};
  }
  throw std::logic_error("unreachable boundary");
}

/// Permutation matrix of the reflection n <-> -n (p <-> 2M-1-p).
inline Eigen::MatrixXd reflection_matrix(int sites) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(sites, sites);
  for (int i = 0; i < sites; ++i) r(i, sites - 1 - i) = 1.0;
  return r;
}

}  // namespace ringcut

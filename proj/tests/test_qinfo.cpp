#include "support.hpp"

#include <ringcut/qinfo.hpp>
#include <ringcut/spectrum.hpp>
#include <ringcut/tlimit.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ringcut;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;

Matrix4c projector(const Eigen::Vector4cd& v) { return v * v.adjoint(); }

Matrix4c psi_plus() {
  Eigen::Vector4cd v(0, 1, 1, 0);
  return projector(v / std::sqrt(2.0));
}

Matrix4c werner(double p) { return p * psi_plus() + (1 - p) / 4 * Matrix4c::Identity(); }

// entropy straight from the definition, natural log converted to bits
double entropy_bits(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  double s = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 1e-300) s -= l * std::log(l) / std::log(2.0);
  }
  return s;
}

// Independent discord: projective measurement on B along (theta, phi),
// post-measurement states built with explicit projectors.
double measured_entropy(const Matrix4c& rho, double th, double ph) {
  Matrix2c n = std::cos(th) * pauli::z() + std::sin(th) * std::cos(ph) * pauli::x() +
               std::sin(th) * std::sin(ph) * pauli::y();
  double s = 0;
  for (double sign : {1.0, -1.0}) {
    const Matrix2c P = 0.5 * (pauli::id() + sign * n);
    const Matrix4c K = pauli::kron(pauli::id(), P);
    const Matrix4c post = K * rho * K;
    const double p = post.trace().real();
    if (p < 1e-15) continue;
    Matrix2c a = Matrix2c::Zero();
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int b = 0; b < 2; ++b) a(i, k) += post(2 * i + b, 2 * k + b);
    s += p * entropy_bits(a / p);
  }
  return s;
}

struct Brute {
  double cc, qd, mi;
};

Brute brute_discord(const Matrix4c& rho) {
  Matrix2c ra = Matrix2c::Zero(), rb = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int b = 0; b < 2; ++b) {
        ra(i, k) += rho(2 * i + b, 2 * k + b);
        rb(i, k) += rho(2 * b + i, 2 * b + k);
      }
  const double mi = entropy_bits(ra) + entropy_bits(rb) - entropy_bits(rho);
  double best = 1e9, bt = 0, bp = 0;
  for (int i = 0; i <= 90; ++i)
    for (int k = 0; k < 24; ++k) {
      const double t = pi * i / 90, f = 2 * pi * k / 24;
      const double v = measured_entropy(rho, t, f);
      if (v < best) best = v, bt = t, bp = f;
    }
  // refine both angles by shrinking pattern search
  for (double step = pi / 90; step > 1e-10; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (auto [dt, dp] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
        const double v = measured_entropy(rho, bt + dt, bp + dp);
        if (v < best - 1e-15) best = v, bt += dt, bp += dp, moved = true;
      }
    }
  }
  const double cc = entropy_bits(ra) - best;
  return {cc, mi - cc, mi};
}

CorrelationMatrix ring_window(const ModelParams& p, Site lo, Site hi) {
  return correlation_window(ground_state(p), p.half_length, lo, hi);
}

}  // namespace

TEST(QInfo, BellState) {
  const Matrix4c rho = psi_plus();
  EXPECT_NEAR(concurrence_wootters(rho), 1.0, 1e-12);
  const auto m = correlation_measures(rho);
  EXPECT_NEAR(m.mutual_information, 2.0, 1e-12);
  EXPECT_NEAR(m.classical_correlations, 1.0, 1e-9);
  EXPECT_NEAR(m.quantum_discord, 1.0, 1e-9);
  SpinCorrelators s;
  s.sx_sx = 1, s.sy_sy = 1, s.sz_sz = -1;
  EXPECT_NEAR(concurrence_paper(s), 1.0, 1e-15);
  EXPECT_LT((rdm_from_correlators(s) - rho).norm(), 1e-15);
}

TEST(QInfo, MaximallyMixedAndProductStates) {
  const Matrix4c mixed = Matrix4c::Identity() / 4.0;
  EXPECT_NEAR(concurrence_wootters(mixed), 0.0, 1e-15);
  const auto m = correlation_measures(mixed);
  EXPECT_NEAR(m.mutual_information, 0.0, 1e-12);
  EXPECT_NEAR(m.classical_correlations, 0.0, 1e-9);
  EXPECT_NEAR(m.quantum_discord, 0.0, 1e-9);
  Matrix2c a, b;
  a << 0.7, cd(0.1, 0.2), cd(0.1, -0.2), 0.3;
  b << 0.4, 0.0, 0.0, 0.6;
  const Matrix4c prod = pauli::kron(a, b);
  EXPECT_NEAR(mutual_information(prod), 0.0, 1e-12);
  EXPECT_NEAR(concurrence_wootters(prod), 0.0, 1e-12);
}

TEST(QInfo, WernerState) {
  EXPECT_NEAR(concurrence_wootters(werner(0.9)), 0.85, 1e-12);
  for (double p : {0.1, 0.3, 0.5, 0.7})
    EXPECT_NEAR(concurrence_wootters(werner(p)), std::max(0.0, (3 * p - 1) / 2), 1e-12);
}

TEST(QInfo, ClassicallyCorrelatedState) {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = rho(3, 3) = 0.5;
  const auto m = correlation_measures(rho);
  EXPECT_NEAR(m.mutual_information, 1.0, 1e-12);
  EXPECT_NEAR(m.classical_correlations, 1.0, 1e-9);
  EXPECT_NEAR(m.quantum_discord, 0.0, 1e-9);
}

TEST(QInfo, CutAcrossDefectIsUncorrelated) {
  const auto C = tl::correlation_window(site(-0.5), site(0.5), 0.0, 0.0);
  const TwoQubitState st = two_qubit_rdm(C, site(-0.5), site(0.5));
  EXPECT_LT((st.rho - Matrix4c::Identity() / 4.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(concurrence_paper(C, site(-0.5), site(0.5)), 0.0);
  EXPECT_NEAR(concurrence_wootters(st), 0.0, 1e-12);
}

TEST(QInfo, RdmMatchesPartialTrace) {
  for (double j : {0.5, 2.0}) {
    const ModelParams p{4, j, 0.3, Boundary::RingParityExact};
    const auto C = ring_window(p, site(-3.5), site(3.5));
    const auto ed = oracle::ed_ground_state(p);
    for (auto [n, m] : {std::pair{-0.5, 0.5}, std::pair{-1.5, 1.5}, std::pair{-3.5, 2.5}, std::pair{0.5, 3.5}}) {
      const TwoQubitState st = two_qubit_rdm(C, site(n), site(m));
      const Matrix4c ref = oracle::ed_rdm(ed, support::pos(site(n), 4), support::pos(site(m), 4));
      EXPECT_LT((st.rho - ref).cwiseAbs().maxCoeff(), 1e-10) << j << " " << n << "," << m;
      EXPECT_LT(x_structure_violation(st.rho), 1e-12);
    }
  }
}

TEST(QInfo, StrongBondApproachesBellPair) {
  double last = 0;
  for (double j : {3.0, 10.0, 100.0, 1000.0}) {
    const auto C = tl::correlation_window(site(-0.5), site(0.5), j, 0.0);
    const TwoQubitState st = two_qubit_rdm(C, site(-0.5), site(0.5));
    const double overlap = (psi_plus() * st.rho).trace().real();
    EXPECT_GT(overlap, last);
    last = overlap;
  }
  EXPECT_GT(last, 1 - 1e-5);
}

TEST(QInfo, ClosedFormConcurrenceAgreesWithWootters) {
  for (double j : {0.0, 0.5, 1.0, 2.0, 6.0})
    for (double h : {0.0, 0.3, 0.7, 1.2}) {
      const auto C = tl::correlation_window(site(-2.5), site(2.5), j, h);
      for (auto [n, m] : {std::pair{-0.5, 0.5}, std::pair{0.5, 1.5}, std::pair{-1.5, 1.5}, std::pair{-2.5, 0.5}}) {
        const TwoQubitState st = two_qubit_rdm(C, site(n), site(m));
        EXPECT_NEAR(concurrence_paper(C, site(n), site(m)), concurrence_wootters(st), 1e-9);
        EXPECT_NEAR(concurrence_paper(spin_correlators(C, site(n), site(m))), concurrence_wootters(st), 1e-9);
      }
    }
}

TEST(QInfo, ConcurrenceProfileHasFieldPeriod) {
  const double h = 0.5;
  const auto C = tl::correlation_window(site(0.5), site(40.5), 6.0, h);
  const auto U = tl::correlation_window(site(0.5), site(1.5), 1.0, h);
  const double uniform = concurrence_paper(U, site(0.5), site(1.5));
  std::vector<double> v;
  for (int b = 1; b <= 40; ++b) v.push_back(concurrence_paper(C, bond_left(b), bond_right(b)) - uniform);
  // modulation about the uniform value with period 3
  const int n = static_cast<int>(v.size());
  int best = 1;
  double power = -1;
  for (int k = 1; k <= n / 2; ++k) {
    cd acc = 0;
    for (int t = 0; t < n; ++t) acc += v[t] * std::polar(1.0, -2 * pi * k * t / n);
    if (std::norm(acc) > power) power = std::norm(acc), best = k;
  }
  EXPECT_LE(std::abs(best - n / 3.0), 1.0);
  EXPECT_LT(std::abs(v.back()), std::abs(v.front()));
}

TEST(QInfo, DiscordMatchesBruteForce) {
  std::vector<Matrix4c> states{werner(0.6), psi_plus()};
  for (double j : {0.5, 2.0, 6.0}) {
    const auto C = tl::correlation_window(site(-1.5), site(1.5), j, 0.3);
    states.push_back(two_qubit_rdm(C, site(-1.5), site(1.5)).rho);
    states.push_back(two_qubit_rdm(C, site(-0.5), site(1.5)).rho);
  }
  for (const auto& rho : states) {
    const auto m = correlation_measures(rho);
    const Brute b = brute_discord(rho);
    EXPECT_NEAR(m.mutual_information, b.mi, 1e-12);
    EXPECT_NEAR(m.classical_correlations, b.cc, 1e-8);
    EXPECT_NEAR(m.quantum_discord, b.qd, 1e-8);
    EXPECT_TRUE(m.measurement.phi_independent);
  }
}

TEST(QInfo, DiscordOfGenericStateUsesBothAngles) {
  // not an X state: the optimizer must notice the phi dependence
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  Eigen::Matrix4cd a;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) a(i, k) = cd(g(rng), g(rng));
  Matrix4c rho = a * a.adjoint();
  rho /= rho.trace();
  const auto m = correlation_measures(rho);
  const Brute b = brute_discord(rho);
  EXPECT_FALSE(m.measurement.phi_independent);
  EXPECT_NEAR(m.classical_correlations, b.cc, 1e-7);
}

TEST(QInfo, MeasureInvariants) {
  for (double j : {0.3, 1.0, 3.0})
    for (double h : {0.0, 0.6}) {
      const auto C = tl::correlation_window(site(-1.5), site(2.5), j, h);
      for (auto [n, m] : {std::pair{-1.5, 1.5}, std::pair{0.5, 2.5}}) {
        const auto r = correlation_measures(two_qubit_rdm(C, site(n), site(m)));
        EXPECT_GE(r.classical_correlations, -1e-9);
        EXPECT_GE(r.quantum_discord, -1e-9);
        EXPECT_LE(r.classical_correlations, r.mutual_information + 1e-9);
        EXPECT_LE(r.quantum_discord, r.mutual_information + 1e-9);
        EXPECT_NEAR(r.quantum_discord + r.classical_correlations, r.mutual_information, 1e-14);
        EXPECT_GE(r.mutual_information, -1e-10);
      }
    }
}

TEST(QInfo, NormalizedDiscordAcrossDefect) {
  const Site a = site(-1.5), b = site(1.5);
  auto measures = [&](double j) {
    return correlation_measures(two_qubit_rdm(tl::correlation_window(a, b, j, 0.0), a, b));
  };
  const auto ref = measures(1.0);
  double peak_cc = 0, peak_qd = 0;
  std::vector<double> js, ccs, qds;
  for (int i = 0; i <= 20; ++i) {
    const double j = 0.2 * std::pow(500.0, i / 20.0);
    const auto m = measures(j);
    js.push_back(j);
    ccs.push_back(m.classical_correlations / ref.classical_correlations);
    qds.push_back(m.quantum_discord / ref.quantum_discord);
    if (j > 1 && j < 3) peak_cc = std::max(peak_cc, ccs.back()), peak_qd = std::max(peak_qd, qds.back());
  }
  EXPECT_GT(peak_cc, 1.0);
  EXPECT_GT(peak_qd, 1.0);
  // rises, then falls: not monotonic
  EXPECT_LT(ccs.front(), peak_cc);
  EXPECT_LT(ccs.back(), peak_cc);
  EXPECT_LT(qds.front(), peak_qd);
  EXPECT_LT(qds.back(), peak_qd);
}

TEST(QInfo, EntropyConventions) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
  EXPECT_NEAR(von_neumann_entropy(Matrix4c(Matrix4c::Identity() / 4.0)), 2.0, 1e-14);
  EXPECT_NEAR(von_neumann_entropy(psi_plus()), 0.0, 1e-12);
}

TEST(QInfo, RejectsInvalidStates) {
  const auto C = tl::correlation_window(site(0.5), site(1.5), 2.0, 0.0);
  EXPECT_THROW(two_qubit_rdm(C, site(0.5), site(0.5)), std::invalid_argument);
  Matrix4c bad = Matrix4c::Zero();
  bad(0, 0) = 1.2;
  bad(3, 3) = -0.2;
  EXPECT_THROW(correlation_measures(bad), NumericalError);
  Matrix4c skew = Matrix4c::Identity() / 4.0;
  skew(0, 1) = 0.1;
  EXPECT_THROW(check_state(skew, "skew"), NumericalError);
  Matrix4c heavy = Matrix4c::Identity() / 2.0;
  EXPECT_THROW(check_state(heavy, "trace"), NumericalError);
}

TEST(QInfo, OptimizerReportsBracket) {
  // a budget the golden search cannot meet
  auto f = [](double x) { return (x - 0.3) * (x - 0.3); };
  try {
    detail::golden_section(f, 0.0, 1e6, 1e-30);
    FAIL() << "expected OptimizerError";
  } catch (const OptimizerError& e) {
    EXPECT_LT(e.bracket_lo, e.bracket_hi);
    EXPECT_GE(e.best, 0.0);
  }
}

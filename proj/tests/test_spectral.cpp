#include "dtqw/spectral.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace dtqw;
using oracles::max_abs_diff;

namespace {

Eigen::MatrixXcd random_unitary(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

double reconstruction_error(const Eigen::MatrixXcd& u, const QuasienergySpectrum& spec) {
  Eigen::VectorXcd eigvals(spec.quasienergies.size());
  for (Eigen::Index i = 0; i < eigvals.size(); ++i) {
    eigvals[i] = std::polar(1.0, -spec.quasienergies[i]);
  }
  return max_abs_diff(u, spec.states * eigvals.asDiagonal() * spec.states.adjoint());
}

double orthonormality_error(const QuasienergySpectrum& spec) {
  return max_abs_diff(spec.states.adjoint() * spec.states,
                      Eigen::MatrixXcd::Identity(spec.states.cols(), spec.states.cols()));
}

}  // namespace

TEST_CASE("identity has an all-zero quasienergy spectrum") {
  const QuasienergySpectrum spec = quasienergy_spectrum(Eigen::MatrixXcd::Identity(8, 8));
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(spec.quasienergies[i] == 0.0);
  CHECK(orthonormality_error(spec) < 1e-14);
}

TEST_CASE("known rotated spectrum is recovered") {
  const double alpha = 0.8;
  const Eigen::MatrixXcd q = random_unitary(4, 11);
  Eigen::VectorXcd d(4);
  // quasienergies {-alpha, 0, 0, alpha} <-> eigenvalues e^{-iE}
  d << std::polar(1.0, alpha), 1.0, 1.0, std::polar(1.0, -alpha);
  const Eigen::MatrixXcd u = q * d.asDiagonal() * q.adjoint();

  const QuasienergySpectrum spec = quasienergy_spectrum(u);
  CHECK(std::abs(spec.quasienergies[0] + alpha) < 1e-13);
  CHECK(std::abs(spec.quasienergies[1]) < 1e-13);
  CHECK(std::abs(spec.quasienergies[2]) < 1e-13);
  CHECK(std::abs(spec.quasienergies[3] - alpha) < 1e-13);
  CHECK(reconstruction_error(u, spec) < 1e-12);
  CHECK(orthonormality_error(spec) < 1e-13);
}

TEST_CASE("degenerate spectra keep orthonormal eigenvectors") {
  const Eigen::MatrixXcd q = random_unitary(6, 5);
  Eigen::VectorXcd d(6);
  const Complex a = std::polar(1.0, 1.1), b = std::polar(1.0, -1.1);
  d << a, a, a, b, b, 1.0;
  const Eigen::MatrixXcd u = q * d.asDiagonal() * q.adjoint();

  const QuasienergySpectrum spec = quasienergy_spectrum(u);
  CHECK(orthonormality_error(spec) < 1e-12);
  CHECK(reconstruction_error(u, spec) < 1e-11);
}

TEST_CASE("random unitaries reconstruct to machine precision") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXcd u = random_unitary(24, seed);
    const QuasienergySpectrum spec = quasienergy_spectrum(u);
    CHECK(reconstruction_error(u, spec) < 1e-12);
    CHECK(orthonormality_error(spec) < 1e-12);
    for (Eigen::Index i = 1; i < 24; ++i) {
      CHECK(spec.quasienergies[i] >= spec.quasienergies[i - 1]);
    }
    CHECK(spec.quasienergies.minCoeff() > -std::numbers::pi);
    CHECK(spec.quasienergies.maxCoeff() <= std::numbers::pi);
  }
}

TEST_CASE("non-unitary input is rejected") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(6, 6);
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(quasienergy_spectrum(bad), std::domain_error);
}

TEST_CASE("walk spectra are chiral symmetric and reconstruct") {
  const LatticeGeometry geom(8);
  for (double j1 : {0.1, 0.7, 1.5}) {
    const WalkOperator u = build_one_step(geom, {j1, 1.0});
    const QuasienergySpectrum spec = quasienergy_spectrum(u);
    CHECK(reconstruction_error(u.to_dense(), spec) < 1e-9);
    CHECK(orthonormality_error(spec) < 1e-10);
    const Eigen::Index n = spec.quasienergies.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(std::abs(spec.quasienergies[i] + spec.quasienergies[n - 1 - i]) < 1e-9);
    }
  }
}

TEST_CASE("j1=0 pins four exact corner zero modes") {
  const LatticeGeometry geom(8);
  const QuasienergySpectrum spec = quasienergy_spectrum(build_one_step(geom, {0.0, 1.0}));
  const StateClassification cls = classify_states(spec, 1e-12);
  REQUIRE(cls.has_zero_modes);
  for (int idx : cls.zero_modes) CHECK(std::abs(spec.quasienergies[idx]) <= 1e-12);

  std::vector<int> zero(cls.zero_modes.begin(), cls.zero_modes.end());
  const Eigen::VectorXd dist = collective_distribution(spec, zero);
  const int m = geom.sites_per_side;
  for (int corner : {site_index(1, 1, geom), site_index(1, m, geom), site_index(m, 1, geom),
                     site_index(m, m, geom)}) {
    CHECK(std::abs(dist[corner] - 1.0) < 1e-12);
  }
  CHECK(corner_site_weight(dist, geom) > 1.0 - 1e-12);
}

TEST_CASE("topological point: four zero modes, edge quadruplet at 203..206") {
  const LatticeGeometry geom(20);
  const QuasienergySpectrum spec = quasienergy_spectrum(build_one_step(geom, {0.1, 1.0}));

  int below_tol = 0;
  for (Eigen::Index i = 0; i < spec.quasienergies.size(); ++i) {
    if (std::abs(spec.quasienergies[i]) <= 1e-6) ++below_tol;
  }
  CHECK(below_tol == 4);

  const StateClassification cls = classify_states(spec);
  REQUIRE(cls.has_zero_modes);
  // zero modes agree among themselves
  for (int idx : cls.zero_modes) {
    CHECK(std::abs(spec.quasienergies[idx] - spec.quasienergies[cls.zero_modes[0]]) < 1e-6);
  }

  // ascending 1-based state numbers of the edge quadruplet
  REQUIRE(cls.edge_modes.size() == 4);
  CHECK(cls.edge_modes == std::vector<int>{202, 203, 204, 205});

  std::vector<int> zero(cls.zero_modes.begin(), cls.zero_modes.end());
  const Eigen::VectorXd corner_dist = collective_distribution(spec, zero);
  CHECK(std::abs(corner_dist.sum() - 4.0) < 1e-10);
  CHECK(corner_patch_weight(corner_dist, geom) >= 0.90);

  const Eigen::VectorXd edge_dist = collective_distribution(spec, cls.edge_modes);
  CHECK(corner_site_weight(edge_dist, geom) < 0.01);
}

TEST_CASE("trivial point has no zero modes") {
  const LatticeGeometry geom(20);
  const QuasienergySpectrum spec = quasienergy_spectrum(build_one_step(geom, {1.5, 1.0}));
  const StateClassification cls = classify_states(spec, 1e-6);
  CHECK(!cls.has_zero_modes);
  for (Eigen::Index i = 0; i < spec.quasienergies.size(); ++i) {
    CHECK(std::abs(spec.quasienergies[i]) > 1e-6);
  }
}

TEST_CASE("collective distribution rejects bad indices") {
  const QuasienergySpectrum spec = quasienergy_spectrum(Eigen::MatrixXcd::Identity(16, 16));
  CHECK_THROWS_AS(collective_distribution(spec, {17}), std::out_of_range);
  CHECK_THROWS_AS(collective_distribution(spec, {-1}), std::out_of_range);
}

TEST_CASE("sweep tracks the zero-mode branch and the bulk gap closure") {
  const LatticeGeometry geom(12);
  const std::vector<double> grid = {0.0, 0.2, 0.6, 1.0, 1.4, 1.8};
  const std::vector<SweepRow> rows = spectrum_sweep(geom, 1.0, grid, 2);
  REQUIRE(rows.size() == grid.size());

  // row order preserved
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rows[i].j1 == grid[i]);

  // J1 = 0: exact zero modes
  CHECK(rows[0].quasienergies.cwiseAbs().minCoeff() <= 1e-12);

  auto min_abs = [](const Eigen::VectorXd& e) { return e.cwiseAbs().minCoeff(); };
  // zero-mode branch present deep in the topological side, gone on the other
  // (corner-mode splitting scales like (J1/J2)^(M/2), so ~6e-5 here)
  CHECK(min_abs(rows[1].quasienergies) < 1e-3);
  CHECK(min_abs(rows[4].quasienergies) > 1e-2);
  CHECK(min_abs(rows[5].quasienergies) > 1e-2);

  // bulk gap at E=0 (5th-smallest |E|, skipping any zero modes) is minimal near J1=J2
  auto bulk_gap = [](const Eigen::VectorXd& e) {
    Eigen::VectorXd a = e.cwiseAbs();
    std::sort(a.data(), a.data() + a.size());
    return a[4];
  };
  double best_j1 = -1.0, best_gap = 1e9;
  for (const SweepRow& row : rows) {
    const double g = bulk_gap(row.quasienergies);
    if (g < best_gap) {
      best_gap = g;
      best_j1 = row.j1;
    }
  }
  CHECK(std::abs(best_j1 - 1.0) <= 0.2);

  CHECK_THROWS_AS(spectrum_sweep(geom, 1.0, {}), std::invalid_argument);
}

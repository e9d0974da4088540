#include "dtqw/walk_operators.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace dtqw;
using oracles::max_abs_diff;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd ident(int n) { return Eigen::MatrixXcd::Identity(n, n); }
}  // namespace

TEST_CASE("translation operators at r=0 are the identity") {
  const LatticeGeometry geom(6);
  CHECK(max_abs_diff(build_translation_x(geom, BondParity::Odd, 0.0).to_dense(), ident(36)) == 0.0);
  CHECK(max_abs_diff(build_translation_y(geom, BondParity::Even, 0.0).to_dense(), ident(36)) ==
        0.0);
}

TEST_CASE("translation blocks at r=2 are -iX on every bond") {
  const LatticeGeometry geom(4);
  const Eigen::MatrixXcd u = build_translation_x(geom, BondParity::Odd, 2.0).to_dense();
  const int a = site_index(1, 1, geom);
  const int b = site_index(2, 1, geom);
  CHECK(std::abs(u(a, a)) < 1e-15);                       // cos(pi/2)
  CHECK(std::abs(u(b, a) - Complex(0, -1)) < 1e-15);      // -i sin(pi/2)
  CHECK(std::abs(u(a, b) - Complex(0, -1)) < 1e-15);
}

TEST_CASE("y-translation carries the (-1)^x flux sign") {
  const LatticeGeometry geom(4);
  const double r = 0.7;
  const Eigen::MatrixXcd u = build_translation_y(geom, BondParity::Odd, r).to_dense();
  const double s = std::sin(kPi / 4.0 * r);
  // e^{i x pi} = -1 at x=1, +1 at x=2
  CHECK(std::abs(u(site_index(1, 2, geom), site_index(1, 1, geom)) - Complex(0, s)) < 1e-15);
  CHECK(std::abs(u(site_index(2, 2, geom), site_index(2, 1, geom)) - Complex(0, -s)) < 1e-15);
}

TEST_CASE("substeps match the exponential oracle on M=4") {
  const LatticeGeometry geom(4);
  for (double j1 : {0.0, 0.1, 1.0, 1.5}) {
    for (double j2 : {0.3, 1.0}) {
      const auto subs = build_substeps(geom, {j1, j2});
      const Eigen::MatrixXcd h[4] = {oracles::hamiltonian_x_bonds(geom, true, j1),
                                     oracles::hamiltonian_x_bonds(geom, false, j2),
                                     oracles::hamiltonian_y_bonds(geom, true, j1),
                                     oracles::hamiltonian_y_bonds(geom, false, j2)};
      for (int i = 0; i < 4; ++i) {
        const Eigen::MatrixXcd expected = oracles::hermitian_expm(h[i], kPi / 4.0);
        CHECK(max_abs_diff(subs[static_cast<std::size_t>(i)].to_dense(), expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("substeps couple only nearest neighbors along one axis") {
  const LatticeGeometry geom(6);
  const int m = geom.sites_per_side;
  const auto subs = build_substeps(geom, {0.7, 1.3});
  for (int i = 0; i < 4; ++i) {
    const auto& set = std::get<BondRotationSet>(subs[static_cast<std::size_t>(i)].rep);
    for (const BondRotation& bond : set.bonds) {
      // x-bonds sit a stride of M apart in the linear index, y-bonds stride 1
      CHECK(bond.b - bond.a == (i < 2 ? m : 1));
    }
  }
}

TEST_CASE("substeps with j1=0 trivialize U1 and U3") {
  const LatticeGeometry geom(6);
  const auto subs = build_substeps(geom, {0.0, 1.0});
  CHECK(max_abs_diff(subs[0].to_dense(), ident(36)) == 0.0);
  CHECK(max_abs_diff(subs[2].to_dense(), ident(36)) == 0.0);
}

TEST_CASE("all constructed operators are unitary") {
  for (int m : {4, 8}) {
    const LatticeGeometry geom(m);
    for (double j1 : {0.0, 0.1, 0.5, 1.0, 1.5, 2.7, -0.4}) {
      const CouplingParams cp{j1, 1.0};
      for (const auto& sub : build_substeps(geom, cp)) {
        CHECK(unitarity_residual(sub) < 1e-12);
      }
      CHECK(unitarity_residual(build_one_step(geom, cp)) < 1e-12);
    }
    CHECK(unitarity_residual(build_disorder(geom, {2.5, 99, 1}, 0)) < 1e-12);
  }
}

TEST_CASE("one-step operator reduces to the identity at zero coupling") {
  const LatticeGeometry geom(4);
  CHECK(max_abs_diff(build_one_step(geom, {0.0, 0.0}).to_dense(), ident(16)) == 0.0);
}

TEST_CASE("corner site decouples at j1=0") {
  const LatticeGeometry geom(8);
  const WalkOperator u = build_one_step(geom, {0.0, 1.0});
  const WaveFunction corner = localized_state(1, 1, geom);
  const WaveFunction out = apply(u, corner);
  CHECK(max_abs_diff(out.amplitudes, corner.amplitudes) < 1e-15);
}

TEST_CASE("one-step equals the product of substeps applied in order") {
  const LatticeGeometry geom(4);
  const CouplingParams cp{0.3, 0.9};
  const auto subs = build_substeps(geom, cp);
  const WalkOperator step = build_one_step(geom, cp);

  WaveFunction psi = localized_state(2, 3, geom);
  WaveFunction via_subs = psi;
  for (const auto& sub : subs) via_subs = apply(sub, via_subs);
  const WaveFunction via_step = apply(step, psi);
  CHECK(max_abs_diff(via_subs.amplitudes, via_step.amplitudes) < 1e-14);
}

TEST_CASE("disorder operator is diagonal, unimodular and reproducible") {
  const LatticeGeometry geom(6);
  const DisorderConfig dc{2.5, 4242, 10};

  const WalkOperator d1 = build_disorder(geom, dc, 3);
  const WalkOperator d2 = build_disorder(geom, dc, 3);
  const auto& f1 = std::get<DiagonalPhases>(d1.rep).factors;
  const auto& f2 = std::get<DiagonalPhases>(d2.rep).factors;
  REQUIRE(f1.size() == 36);
  for (Eigen::Index i = 0; i < f1.size(); ++i) {
    CHECK(f1[i] == f2[i]);  // bitwise determinism
    CHECK(std::abs(std::abs(f1[i]) - 1.0) < 1e-15);
    CHECK(std::abs(std::arg(f1[i])) <= dc.strength / 2.0);
  }

  const WalkOperator other = build_disorder(geom, dc, 4);
  CHECK(max_abs_diff(d1.to_dense(), other.to_dense()) > 1e-3);

  const WalkOperator clean = build_disorder(geom, {0.0, 4242, 1}, 0);
  CHECK(max_abs_diff(clean.to_dense(), ident(36)) == 0.0);

  CHECK_THROWS_AS(build_disorder(geom, {-1.0, 0, 1}, 0), std::invalid_argument);
}

TEST_CASE("composing with trivial disorder returns the step") {
  const LatticeGeometry geom(4);
  const WalkOperator step = build_one_step(geom, {0.2, 1.0});
  const WalkOperator dis = build_disorder(geom, {0.0, 7, 1}, 0);
  const WalkOperator total = compose_disordered_step(step, dis);
  CHECK(max_abs_diff(total.to_dense(), step.to_dense()) == 0.0);
  CHECK(unitarity_residual(total) < 1e-12);
}

TEST_CASE("composed step equals sequential application") {
  const LatticeGeometry geom(4);
  const WalkOperator step = build_one_step(geom, {0.4, 1.1});
  const WalkOperator dis = build_disorder(geom, {1.7, 11, 1}, 0);
  const WalkOperator total = compose_disordered_step(step, dis);

  const WaveFunction psi = localized_state(3, 2, geom);
  const WaveFunction sequential = apply(step, apply(dis, psi));
  const WaveFunction composed = apply(total, psi);
  CHECK(max_abs_diff(sequential.amplitudes, composed.amplitudes) < 1e-14);

  const LatticeGeometry other(6);
  CHECK_THROWS_AS(compose_disordered_step(step, build_disorder(other, {1.0, 1, 1}, 0)),
                  std::invalid_argument);
}

TEST_CASE("apply matches the dense matrix-vector oracle") {
  const LatticeGeometry geom(4);
  const WalkOperator sub = build_translation_y(geom, BondParity::Even, 0.8);
  WaveFunction psi = localized_state(2, 2, geom);
  // spread support first so several bonds act
  psi = apply(build_translation_x(geom, BondParity::Odd, 0.5), psi);

  const Eigen::VectorXcd expected = sub.to_dense() * psi.amplitudes;
  const WaveFunction got = apply(sub, psi);
  CHECK(max_abs_diff(got.amplitudes, expected) < 1e-14);
  CHECK(std::abs(got.amplitudes.norm() - 1.0) < 1e-12);

  const WaveFunction small = localized_state(1, 1, LatticeGeometry(6));
  CHECK_THROWS_AS(apply(sub, small), std::invalid_argument);
}

TEST_CASE("identity operator leaves states unchanged") {
  const LatticeGeometry geom(4);
  const WalkOperator id = build_translation_x(geom, BondParity::Odd, 0.0);
  const WaveFunction psi = localized_state(4, 4, geom);
  CHECK(max_abs_diff(apply(id, psi).amplitudes, psi.amplitudes) == 0.0);
}

TEST_CASE("every plaquette encloses pi flux") {
  const LatticeGeometry geom(6);
  const double j1 = 0.35, j2 = 1.0;
  const Eigen::MatrixXcd h = oracles::full_hamiltonian(geom, j1, j2);
  const auto subs = build_substeps(geom, {j1, j2});
  // transfer amplitudes of the substep unitaries, one per bond orientation
  const Eigen::MatrixXcd ux =
      (subs[0].to_dense() * subs[1].to_dense());  // all x-bonds appear in U2 U1
  const Eigen::MatrixXcd uy = (subs[2].to_dense() * subs[3].to_dense());

  for (int x = 1; x < geom.sites_per_side; ++x) {
    for (int y = 1; y < geom.sites_per_side; ++y) {
      const int a = site_index(x, y, geom);
      const int b = site_index(x + 1, y, geom);
      const int c = site_index(x + 1, y + 1, geom);
      const int d = site_index(x, y + 1, geom);
      const Complex ham_loop = h(b, a) * h(c, b) * h(d, c) * h(a, d);
      REQUIRE(std::abs(ham_loop) > 1e-12);
      CHECK(std::abs(std::remainder(std::arg(ham_loop) - kPi, 2 * kPi)) < 1e-12);

      const Complex walk_loop = uy(a, d) * ux(d, c) * uy(c, b) * ux(b, a);
      REQUIRE(std::abs(walk_loop) > 1e-14);
      // walk transfer factors are (-i sin)^4 times the same phases: arg comes out equal
      CHECK(std::abs(std::remainder(std::arg(walk_loop) - std::arg(ham_loop), 2 * kPi)) < 1e-12);
    }
  }
}

TEST_CASE("rotation block reproduces its defining formula") {
  const RotationBlock block{0.6, kPi / 3.0};
  const Eigen::Matrix2cd b = block.matrix();
  const double c = std::cos(kPi / 4.0 * 0.6);
  const double s = std::sin(kPi / 4.0 * 0.6);
  CHECK(std::abs(b(0, 0) - Complex(c, 0)) < 1e-15);
  CHECK(std::abs(b(1, 0) - Complex(0, -1) * s * std::polar(1.0, kPi / 3.0)) < 1e-15);
  CHECK(std::abs(b(0, 1) - Complex(0, -1) * s * std::polar(1.0, -kPi / 3.0)) < 1e-15);
  CHECK(unitarity_residual(Eigen::MatrixXcd(b)) < 1e-15);
}

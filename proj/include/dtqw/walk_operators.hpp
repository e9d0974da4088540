#pragma once

#include "dtqw/lattice.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace dtqw {

enum class OperatorKind { Substep1, Substep2, Substep3, Substep4, OneStep, Disorder, Composite };
enum class BondParity { Odd, Even };

namespace detail {

/// 2x2 rotation acting on one bond, basis ordered (lower site, upper site):
///   [ cos(pi r/4)            -i sin(pi r/4) conj(h) ]
///   [ -i sin(pi r/4) h        cos(pi r/4)           ]
/// where h is the hopping phase attached to the lower->upper matrix element.
inline Eigen::Matrix2cd bond_rotation(double r, Complex hop_phase) {
  const double angle = std::numbers::pi / 4.0 * r;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Complex minus_i(0.0, -1.0);
  Eigen::Matrix2cd b;
  b << c, minus_i * s * std::conj(hop_phase),  //
      minus_i * s * hop_phase, c;
  return b;
}

// splitmix64: tiny splittable PRNG used for disorder substreams.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Substream state for one disorder realization; independent of evaluation order.
inline std::uint64_t disorder_substream(std::uint64_t seed, std::uint64_t realization_id) {
  std::uint64_t state = seed ^ (0xd1342543de82ef95ULL * (realization_id + 1));
  (void)splitmix64_next(state);
  return state;
}

inline double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// One bond rotation block expressed by its physical parameters; the phase
/// sits on the (upper site <- lower site) matrix element.
struct RotationBlock {
  double amplitude = 0.0;  // r
  double phase = 0.0;      // Phi

  Eigen::Matrix2cd matrix() const {
    return detail::bond_rotation(amplitude, std::polar(1.0, phase));
  }
};

/// A 2x2 rotation placed on the (a, b) site pair; block basis order (a, b).
struct BondRotation {
  int a = 0;
  int b = 0;
  Eigen::Matrix2cd block;
};

/// Disjoint bond rotations; sites not covered by any bond act as identity.
struct BondRotationSet {
  std::vector<BondRotation> bonds;
};

/// Diagonal unitary of unimodular factors.
struct DiagonalPhases {
  Eigen::VectorXcd factors;
};

struct DenseUnitary {
  Eigen::MatrixXcd matrix;
};

/// Structured unitary on the M^2-dimensional site space. Substeps stay
/// block-sparse, disorder diagonal, products dense. Immutable after build.
struct WalkOperator {
  OperatorKind kind = OperatorKind::Composite;
  int dim = 0;
  std::variant<BondRotationSet, DiagonalPhases, DenseUnitary> rep;

  Eigen::MatrixXcd to_dense() const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(dim, dim);
    apply_to_dense(out);
    return out;
  }

  /// In-place left multiplication: target <- U * target.
  void apply_to_dense(Eigen::MatrixXcd& target) const {
    if (target.rows() != dim) {
      throw std::invalid_argument("WalkOperator: dimension mismatch in dense application");
    }
    if (const auto* set = std::get_if<BondRotationSet>(&rep)) {
      for (const BondRotation& bond : set->bonds) {
        const Eigen::RowVectorXcd row_a = target.row(bond.a);
        const Eigen::RowVectorXcd row_b = target.row(bond.b);
        target.row(bond.a) = bond.block(0, 0) * row_a + bond.block(0, 1) * row_b;
        target.row(bond.b) = bond.block(1, 0) * row_a + bond.block(1, 1) * row_b;
      }
    } else if (const auto* diag = std::get_if<DiagonalPhases>(&rep)) {
      target = diag->factors.asDiagonal() * target;
    } else {
      const auto& dense = std::get<DenseUnitary>(rep);
      target = dense.matrix * target;
    }
  }
};

inline WaveFunction apply(const WalkOperator& op, const WaveFunction& psi) {
  if (psi.amplitudes.size() != op.dim) {
    throw std::invalid_argument("apply: state dimension does not match operator dimension");
  }
  Eigen::VectorXcd out;
  if (const auto* set = std::get_if<BondRotationSet>(&op.rep)) {
    out = psi.amplitudes;
    for (const BondRotation& bond : set->bonds) {
      const Complex va = out[bond.a];
      const Complex vb = out[bond.b];
      out[bond.a] = bond.block(0, 0) * va + bond.block(0, 1) * vb;
      out[bond.b] = bond.block(1, 0) * va + bond.block(1, 1) * vb;
    }
  } else if (const auto* diag = std::get_if<DiagonalPhases>(&op.rep)) {
    out = diag->factors.cwiseProduct(psi.amplitudes);
  } else {
    out = std::get<DenseUnitary>(op.rep).matrix * psi.amplitudes;
  }
  if (std::abs(out.norm() - 1.0) > kNormTol) {
    throw std::runtime_error("apply: norm drifted beyond tolerance; operator not unitary?");
  }
  return WaveFunction{std::move(out)};
}

namespace detail {

/// Starting coordinates of the bonds of one parity along an axis of length m.
/// The periodic variant adds the (m, 1) wrap bond to the even set.
inline std::vector<int> bond_starts(int m, BondParity parity, bool periodic) {
  std::vector<int> starts;
  for (int s = (parity == BondParity::Odd) ? 1 : 2; s + 1 <= m; s += 2) starts.push_back(s);
  if (periodic && parity == BondParity::Even) starts.push_back(m);
  return starts;
}

inline WalkOperator translation_x(const LatticeGeometry& geom, BondParity parity, double r,
                                  bool periodic, OperatorKind kind) {
  if (!std::isfinite(r)) throw std::invalid_argument("translation_x: r must be finite");
  BondRotationSet set;
  const int m = geom.sites_per_side;
  const Eigen::Matrix2cd block = bond_rotation(r, 1.0);
  for (int x : bond_starts(m, parity, periodic)) {
    const int xn = (x == m) ? 1 : x + 1;
    for (int y = 1; y <= m; ++y) {
      set.bonds.push_back({site_index(x, y, geom), site_index(xn, y, geom), block});
    }
  }
  return WalkOperator{kind, geom.total_sites(), std::move(set)};
}

inline WalkOperator translation_y(const LatticeGeometry& geom, BondParity parity, double r,
                                  bool periodic, OperatorKind kind) {
  if (!std::isfinite(r)) throw std::invalid_argument("translation_y: r must be finite");
  BondRotationSet set;
  const int m = geom.sites_per_side;
  const std::vector<int> starts = bond_starts(m, parity, periodic);
  for (int x = 1; x <= m; ++x) {
    // pi-flux phase e^{i x pi} = (-1)^x on y-links, evaluated exactly
    const double flux = (x % 2 == 0) ? 1.0 : -1.0;
    const Eigen::Matrix2cd block = bond_rotation(r, flux);
    for (int y : starts) {
      const int yn = (y == m) ? 1 : y + 1;
      set.bonds.push_back({site_index(x, y, geom), site_index(x, yn, geom), block});
    }
  }
  return WalkOperator{kind, geom.total_sites(), std::move(set)};
}

}  // namespace detail

/// Rotation with angle pi*r/4 on every x-bond of the requested parity,
/// identity elsewhere (open boundary: sites x=1 and x=M are untouched by
/// the even set).
inline WalkOperator build_translation_x(const LatticeGeometry& geom, BondParity bond_start,
                                        double r) {
  const OperatorKind kind =
      (bond_start == BondParity::Odd) ? OperatorKind::Substep1 : OperatorKind::Substep2;
  return detail::translation_x(geom, bond_start, r, false, kind);
}

/// Same along y, with the pi-flux sign (-1)^x on the hopping phases.
inline WalkOperator build_translation_y(const LatticeGeometry& geom, BondParity bond_start,
                                        double r) {
  const OperatorKind kind =
      (bond_start == BondParity::Odd) ? OperatorKind::Substep3 : OperatorKind::Substep4;
  return detail::translation_y(geom, bond_start, r, false, kind);
}

/// The four substeps [U1, U2, U3, U4]: odd/even x-bonds with r=j1/j2, then
/// odd/even y-bonds with the flux signs.
inline std::array<WalkOperator, 4> build_substeps(const LatticeGeometry& geom,
                                                  const CouplingParams& cp) {
  return {build_translation_x(geom, BondParity::Odd, cp.j1),
          build_translation_x(geom, BondParity::Even, cp.j2),
          build_translation_y(geom, BondParity::Odd, cp.j1),
          build_translation_y(geom, BondParity::Even, cp.j2)};
}

/// One-step operator U4 U3 U2 U1, materialized dense.
inline WalkOperator build_one_step(const LatticeGeometry& geom, const CouplingParams& cp) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(geom.total_sites(), geom.total_sites());
  for (const WalkOperator& sub : build_substeps(geom, cp)) sub.apply_to_dense(u);
  return WalkOperator{OperatorKind::OneStep, geom.total_sites(), DenseUnitary{std::move(u)}};
}

/// Diagonal disorder unitary with phases uniform in [-W/2, W/2], fully
/// determined by (seed, realization_id).
inline WalkOperator build_disorder(const LatticeGeometry& geom, const DisorderConfig& dc,
                                   int realization_id) {
  if (dc.strength < 0.0) throw std::invalid_argument("build_disorder: W must be >= 0");
  if (realization_id < 0) throw std::invalid_argument("build_disorder: realization_id must be >= 0");
  std::uint64_t state =
      detail::disorder_substream(dc.seed, static_cast<std::uint64_t>(realization_id));
  Eigen::VectorXcd factors(geom.total_sites());
  for (int i = 0; i < geom.total_sites(); ++i) {
    const double delta = (detail::uniform01(state) - 0.5) * dc.strength;
    factors[i] = std::polar(1.0, delta);
  }
  return WalkOperator{OperatorKind::Disorder, geom.total_sites(), DiagonalPhases{std::move(factors)}};
}

/// U_total = U_step * U_dis (disorder applied first).
inline WalkOperator compose_disordered_step(const WalkOperator& step, const WalkOperator& dis) {
  if (step.dim != dis.dim) {
    throw std::invalid_argument("compose_disordered_step: dimension mismatch");
  }
  // dense * diagonal needs no full product, just column scaling
  if (const auto* diag = std::get_if<DiagonalPhases>(&dis.rep);
      diag != nullptr && std::holds_alternative<DenseUnitary>(step.rep)) {
    Eigen::MatrixXcd total = std::get<DenseUnitary>(step.rep).matrix * diag->factors.asDiagonal();
    return WalkOperator{OperatorKind::Composite, step.dim, DenseUnitary{std::move(total)}};
  }
  Eigen::MatrixXcd total = dis.to_dense();
  step.apply_to_dense(total);
  return WalkOperator{OperatorKind::Composite, step.dim, DenseUnitary{std::move(total)}};
}

inline double unitarity_residual(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/// max |U^dag U - I| exploiting the representation: bond sets reduce to
/// their disjoint 2x2 blocks, diagonals to |factor| - 1.
inline double unitarity_residual(const WalkOperator& op) {
  if (const auto* set = std::get_if<BondRotationSet>(&op.rep)) {
    double r = 0.0;
    for (const BondRotation& bond : set->bonds) {
      const Eigen::Matrix2cd g = bond.block.adjoint() * bond.block - Eigen::Matrix2cd::Identity();
      r = std::max(r, g.cwiseAbs().maxCoeff());
    }
    return r;
  }
  if (const auto* diag = std::get_if<DiagonalPhases>(&op.rep)) {
    return (diag->factors.cwiseAbs2() - Eigen::VectorXd::Ones(diag->factors.size()))
        .cwiseAbs()
        .maxCoeff();
  }
  return unitarity_residual(std::get<DenseUnitary>(op.rep).matrix);
}

}  // namespace dtqw

#pragma once

#include "dtqw/lattice.hpp"
#include "dtqw/spectral.hpp"
#include "dtqw/walk_operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtqw {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Bulk band touches E = 0 or E = pi at some momentum.
struct gap_closure_error : std::runtime_error {
  double kx, ky;
  gap_closure_error(double kx_, double ky_)
      : std::runtime_error("quasienergy gap closes at k = (" + std::to_string(kx_) + ", " +
                           std::to_string(ky_) + ")"),
        kx(kx_),
        ky(ky_) {}
};

/// The two Wannier bands touch (or braid around the transverse cycle).
struct wannier_degeneracy_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Overlap matrix numerically rank-deficient; the k-grid cannot resolve
/// the frame rotation between neighboring points.
struct grid_too_coarse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OverlapMode { Unitarized, Raw };
enum class WannierSector { Minus, Plus };
enum class PolarizationComponent { Py, Px };  // Py: nu_x bands nested along y

/// One-step operator in momentum space on the 2x2-site unit cell. Basis
/// index b = 2*(sx-1) + (sy-1) with sublattice sx, sy in {1,2}; sx=1 holds
/// the odd-x columns and carries the flux sign -1 on its y-links. Bloch
/// phases e^{+-ik} sit on intercell bonds only, so U(k) is 2pi-periodic.
struct BlochStep {
  double kx = 0.0;
  double ky = 0.0;
  Eigen::Matrix4cd matrix;
};

namespace detail {

inline Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

inline Eigen::Matrix4cd block_diag(const Eigen::Matrix2cd& top, const Eigen::Matrix2cd& bottom) {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  out.topLeftCorner<2, 2>() = top;
  out.bottomRightCorner<2, 2>() = bottom;
  return out;
}

}  // namespace detail

inline BlochStep build_bloch_step(double kx, double ky, const CouplingParams& cp) {
  const Complex hx = std::polar(1.0, kx);
  const Complex hy = std::polar(1.0, ky);
  const Eigen::Matrix2cd ident = Eigen::Matrix2cd::Identity();
  // substeps on the unit cell: intracell rotations carry no Bloch phase
  const Eigen::Matrix4cd u1 = detail::kron2(detail::bond_rotation(cp.j1, 1.0), ident);
  const Eigen::Matrix4cd u2 = detail::kron2(detail::bond_rotation(cp.j2, hx), ident);
  const Eigen::Matrix4cd u3 = detail::block_diag(detail::bond_rotation(cp.j1, -1.0),
                                                 detail::bond_rotation(cp.j1, 1.0));
  const Eigen::Matrix4cd u4 = detail::block_diag(detail::bond_rotation(cp.j2, -hy),
                                                 detail::bond_rotation(cp.j2, hy));
  return BlochStep{kx, ky, u4 * (u3 * (u2 * u1))};
}

/// Orthonormal basis (4x2, columns) of the lower band pair, i.e. the two
/// eigenvectors with quasienergy in (-pi, 0). Throws gap_closure_error if
/// any band sits within 1e-10 of E = 0 or E = pi at this k.
inline Eigen::Matrix<Complex, 4, 2> occupied_frame(const BlochStep& bs) {
  const QuasienergySpectrum spec = detail::unitary_eigensystem(bs.matrix, 1e-10);
  Eigen::Matrix<Complex, 4, 2> frame;
  int found = 0;
  for (int i = 0; i < 4; ++i) {
    const double e = spec.quasienergies[i];
    if (std::abs(e) < 1e-10 || std::numbers::pi - std::abs(e) < 1e-10) {
      throw gap_closure_error(bs.kx, bs.ky);
    }
    if (e < 0.0) {
      if (found < 2) frame.col(found) = spec.states.col(i);
      ++found;
    }
  }
  if (found != 2) throw gap_closure_error(bs.kx, bs.ky);
  return frame;
}

namespace detail {

inline double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;
  return y;
}

/// Distance on the unit circle [0,1).
inline double circ_dist01(double a, double b) {
  const double d = std::abs(std::remainder(a - b, 1.0));
  return d;
}

/// Occupied frames on the N x N discrete Brillouin zone, k_j = 2 pi j / N
/// (endpoint identified with the base point).
struct FrameGrid {
  int nx = 0;
  int ny = 0;
  std::vector<Eigen::Matrix<Complex, 4, 2>> frames;

  const Eigen::Matrix<Complex, 4, 2>& at(int jx, int jy) const {
    return frames[static_cast<std::size_t>(jx * ny + jy)];
  }
};

inline FrameGrid build_frame_grid(const CouplingParams& cp, int nx, int ny) {
  if (nx < 8 || ny < 8) throw std::invalid_argument("build_frame_grid: need at least 8 k-points");
  FrameGrid g;
  g.nx = nx;
  g.ny = ny;
  g.frames.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int jx = 0; jx < nx; ++jx) {
    const double kx = kTwoPi * jx / nx;
    for (int jy = 0; jy < ny; ++jy) {
      const double ky = kTwoPi * jy / ny;
      g.frames[static_cast<std::size_t>(jx * ny + jy)] =
          occupied_frame(build_bloch_step(kx, ky, cp));
    }
  }
  return g;
}

/// SVD polar factor; rejects overlaps with sigma_min < 1e-8.
inline Eigen::Matrix2cd unitarize(const Eigen::Matrix2cd& f) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-8) {
    throw grid_too_coarse_error("overlap matrix rank-deficient; refine the k-grid");
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Overlap F^{mn} = <u^m_{k+dk} | u^n_k> between neighboring frames.
inline Eigen::Matrix2cd frame_overlap(const Eigen::Matrix<Complex, 4, 2>& next,
                                      const Eigen::Matrix<Complex, 4, 2>& cur, OverlapMode mode) {
  const Eigen::Matrix2cd f = next.adjoint() * cur;
  if (mode == OverlapMode::Unitarized) return unitarize(f);
  (void)unitarize(f);  // rank check applies to the raw mode as well
  return f;
}

/// Link matrices around one Wilson cycle (loop along x at fixed jy, or
/// along y at fixed jx), plus the ordered product based at index 0.
struct WilsonChain {
  std::vector<Eigen::Matrix2cd> links;  // links[j]: frame j -> frame j+1 (cyclic)
  Eigen::Matrix2cd loop0;               // links[n-1] * ... * links[0]
};

inline WilsonChain wilson_chain(const FrameGrid& g, int fixed, bool along_x, OverlapMode mode) {
  const int n = along_x ? g.nx : g.ny;
  WilsonChain chain;
  chain.links.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto& cur = along_x ? g.at(j, fixed) : g.at(fixed, j);
    const auto& nxt = along_x ? g.at((j + 1) % n, fixed) : g.at(fixed, (j + 1) % n);
    chain.links[static_cast<std::size_t>(j)] = frame_overlap(nxt, cur, mode);
  }
  Eigen::Matrix2cd acc = Eigen::Matrix2cd::Identity();
  for (int j = 0; j < n; ++j) acc = chain.links[static_cast<std::size_t>(j)] * acc;
  chain.loop0 = acc;
  return chain;
}

struct WilsonEigs {
  std::array<double, 2> nu{};          // eigenphase / 2pi in [0,1), ascending
  std::array<Eigen::Vector2cd, 2> vecs;
};

inline WilsonEigs wilson_eigs(const Eigen::Matrix2cd& loop) {
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(loop);
  if (es.info() != Eigen::Success) throw std::runtime_error("wilson_eigs: eigensolver failed");
  WilsonEigs out;
  std::array<int, 2> order = {0, 1};
  const double nu0 = wrap01(std::arg(es.eigenvalues()(0)) / kTwoPi);
  const double nu1 = wrap01(std::arg(es.eigenvalues()(1)) / kTwoPi);
  if (nu1 < nu0) order = {1, 0};
  for (int t = 0; t < 2; ++t) {
    out.nu[static_cast<std::size_t>(t)] =
        wrap01(std::arg(es.eigenvalues()(order[static_cast<std::size_t>(t)])) / kTwoPi);
    Eigen::Vector2cd v = es.eigenvectors().col(order[static_cast<std::size_t>(t)]);
    out.vecs[static_cast<std::size_t>(t)] = v / v.norm();
  }
  return out;
}

/// Wannier bands of the Wilson loops along one axis, with eigenvectors at
/// every base point of the loop axis. Band labels (minus/plus) are anchored
/// at the first transverse row and tracked by continuity across rows.
struct WannierGrid {
  int n_loop = 0;                              // base points along the loop axis
  int n_trans = 0;                             // transverse rows
  std::vector<std::array<double, 2>> nu;       // per row: {minus, plus}
  std::vector<Eigen::Vector2cd> vecs;          // ((row * n_loop) + base) * 2 + band

  const Eigen::Vector2cd& vec(int row, int base, int band) const {
    return vecs[static_cast<std::size_t>(((row * n_loop) + base) * 2 + band)];
  }
};

inline WannierGrid build_wannier_grid(const FrameGrid& g, bool loop_along_x, OverlapMode mode) {
  WannierGrid wg;
  wg.n_loop = loop_along_x ? g.nx : g.ny;
  wg.n_trans = loop_along_x ? g.ny : g.nx;
  wg.nu.resize(static_cast<std::size_t>(wg.n_trans));
  wg.vecs.resize(static_cast<std::size_t>(wg.n_trans) * static_cast<std::size_t>(wg.n_loop) * 2);

  std::array<double, 2> prev_nu{};
  bool prev_valid = false;
  std::array<double, 2> first_nu{};

  for (int row = 0; row < wg.n_trans; ++row) {
    const WilsonChain chain = wilson_chain(g, row, loop_along_x, mode);
    WilsonEigs eigs = wilson_eigs(chain.loop0);

    if (circ_dist01(eigs.nu[0], eigs.nu[1]) < 1e-8) {
      throw wannier_degeneracy_error("Wannier bands touch at transverse row " +
                                     std::to_string(row));
    }

    // track band identity across rows by circular proximity of nu
    if (prev_valid) {
      const double keep = circ_dist01(eigs.nu[0], prev_nu[0]) + circ_dist01(eigs.nu[1], prev_nu[1]);
      const double swap = circ_dist01(eigs.nu[0], prev_nu[1]) + circ_dist01(eigs.nu[1], prev_nu[0]);
      if (swap < keep) {
        std::swap(eigs.nu[0], eigs.nu[1]);
        std::swap(eigs.vecs[0], eigs.vecs[1]);
      }
    }
    prev_nu = eigs.nu;
    prev_valid = true;
    if (row == 0) first_nu = eigs.nu;

    wg.nu[static_cast<std::size_t>(row)] = eigs.nu;

    // parallel transport of the loop eigenvectors to every base point:
    // W(base+1) = F(base) W(base) F(base)^{-1}, so v(base+1) = F(base) v(base)
    for (int band = 0; band < 2; ++band) {
      Eigen::Vector2cd v = eigs.vecs[static_cast<std::size_t>(band)];
      for (int base = 0; base < wg.n_loop; ++base) {
        wg.vecs[static_cast<std::size_t>(((row * wg.n_loop) + base) * 2 + band)] = v;
        v = chain.links[static_cast<std::size_t>(base)] * v;
        v /= v.norm();
      }
    }
  }

  // the labels must come back to themselves around the transverse cycle
  const double keep = circ_dist01(first_nu[0], prev_nu[0]) + circ_dist01(first_nu[1], prev_nu[1]);
  const double swap = circ_dist01(first_nu[0], prev_nu[1]) + circ_dist01(first_nu[1], prev_nu[0]);
  if (swap < keep) {
    throw wannier_degeneracy_error("Wannier bands braid around the transverse cycle");
  }
  return wg;
}

/// Branch-safe mean of phases (radians) clustered on the circle: deviations
/// are averaged around the circular mean direction, so clusters at +-pi do
/// not cancel.
inline double circular_mean(const std::vector<double>& phases) {
  Complex acc = 0.0;
  for (double p : phases) acc += std::polar(1.0, p);
  const double mu = (std::abs(acc) > 1e-12) ? std::arg(acc) : 0.0;
  double dev = 0.0;
  for (double p : phases) dev += std::remainder(p - mu, kTwoPi);
  return mu + dev / static_cast<double>(phases.size());
}

/// Nested Wilson-loop polarization for one Wannier band. The Wannier states
/// w(k) = frame(k) * v_band(k) are transported around the transverse cycle
/// and the loop phases averaged over the base axis.
inline double nested_polarization_impl(const FrameGrid& g, const WannierGrid& wg,
                                       bool loop_along_x, int band, OverlapMode mode) {
  const int n_loop = wg.n_loop;    // jx for loop_along_x, else jy
  const int n_trans = wg.n_trans;  // nested cycle runs over this axis
  std::vector<double> loop_phase(static_cast<std::size_t>(n_loop));

  for (int base = 0; base < n_loop; ++base) {
    Complex prod = 1.0;
    for (int row = 0; row < n_trans; ++row) {
      const int row_next = (row + 1) % n_trans;
      const auto& frame_cur = loop_along_x ? g.at(base, row) : g.at(row, base);
      const auto& frame_nxt = loop_along_x ? g.at(base, row_next) : g.at(row_next, base);
      const Eigen::Vector4cd w_cur = frame_cur * wg.vec(row, base, band);
      const Eigen::Vector4cd w_nxt = frame_nxt * wg.vec(row_next, base, band);
      Complex s = w_nxt.dot(w_cur);
      const double mag = std::abs(s);
      if (mag < 1e-8) {
        throw grid_too_coarse_error("Wannier-state overlap vanishes; refine the k-grid");
      }
      if (mode == OverlapMode::Unitarized) s /= mag;
      prod *= s;
    }
    loop_phase[static_cast<std::size_t>(base)] = std::arg(prod);
  }
  return wrap01(circular_mean(loop_phase) / kTwoPi);
}

}  // namespace detail

/// Wilson loop along kx at fixed ky (or along ky at fixed kx), from a
/// fresh column of occupied frames on an n-point cycle.
struct WilsonLoopResult {
  Eigen::Matrix2cd loop;
  std::array<double, 2> wannier{};           // ascending nu in [0,1)
  std::array<Eigen::Vector2cd, 2> vectors;
};

namespace detail {

inline WilsonLoopResult wilson_loop_1d(double k_fixed, const CouplingParams& cp, int n,
                                       bool along_x, OverlapMode mode) {
  if (n < 8) throw std::invalid_argument("wilson_loop: need N >= 8 k-points");
  std::vector<Eigen::Matrix<Complex, 4, 2>> frames(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double k = kTwoPi * j / n;
    const double kx = along_x ? k : k_fixed;
    const double ky = along_x ? k_fixed : k;
    frames[static_cast<std::size_t>(j)] = occupied_frame(build_bloch_step(kx, ky, cp));
  }
  Eigen::Matrix2cd acc = Eigen::Matrix2cd::Identity();
  for (int j = 0; j < n; ++j) {
    acc = frame_overlap(frames[static_cast<std::size_t>((j + 1) % n)],
                        frames[static_cast<std::size_t>(j)], mode) *
          acc;
  }
  const WilsonEigs eigs = wilson_eigs(acc);
  return WilsonLoopResult{acc, eigs.nu, eigs.vecs};
}

}  // namespace detail

inline WilsonLoopResult wilson_loop_x(double ky, const CouplingParams& cp, int n_kx,
                                      OverlapMode mode = OverlapMode::Unitarized) {
  return detail::wilson_loop_1d(ky, cp, n_kx, true, mode);
}

inline WilsonLoopResult wilson_loop_y(double kx, const CouplingParams& cp, int n_ky,
                                      OverlapMode mode = OverlapMode::Unitarized) {
  return detail::wilson_loop_1d(kx, cp, n_ky, false, mode);
}

/// Wannier band values over the transverse grid (for plotting / gap checks).
struct WannierBands {
  std::vector<double> transverse_k;
  std::vector<double> nu_minus;
  std::vector<double> nu_plus;
};

inline WannierBands wannier_bands(const CouplingParams& cp, PolarizationComponent comp,
                                  int n_kx = 50, int n_ky = 50,
                                  OverlapMode mode = OverlapMode::Unitarized) {
  const detail::FrameGrid g = detail::build_frame_grid(cp, n_kx, n_ky);
  const bool loop_x = comp == PolarizationComponent::Py;
  const detail::WannierGrid wg = detail::build_wannier_grid(g, loop_x, mode);
  WannierBands out;
  for (int row = 0; row < wg.n_trans; ++row) {
    out.transverse_k.push_back(kTwoPi * row / wg.n_trans);
    out.nu_minus.push_back(wg.nu[static_cast<std::size_t>(row)][0]);
    out.nu_plus.push_back(wg.nu[static_cast<std::size_t>(row)][1]);
  }
  return out;
}

/// Nested polarization p in [0,1): Py uses the Wannier bands of the Wilson
/// loops along x nested along y, Px the converse.
inline double nested_polarization(const CouplingParams& cp, int n_kx, int n_ky,
                                  PolarizationComponent comp, WannierSector sector,
                                  OverlapMode mode = OverlapMode::Unitarized) {
  const detail::FrameGrid g = detail::build_frame_grid(cp, n_kx, n_ky);
  const bool loop_x = comp == PolarizationComponent::Py;
  const detail::WannierGrid wg = detail::build_wannier_grid(g, loop_x, mode);
  return detail::nested_polarization_impl(g, wg, loop_x, sector == WannierSector::Minus ? 0 : 1,
                                          mode);
}

struct QuadrupoleResult {
  double p_y_minus = 0.0;
  double p_y_plus = 0.0;
  double p_x_minus = 0.0;
  double p_x_plus = 0.0;
  int nu = 0;
  int n_kx = 0;
  int n_ky = 0;
};

namespace detail {

/// Distance of p to the nearest integer, canonical representative in [0, 1/2].
inline double polarization_magnitude(double p) { return std::abs(p - std::round(p)); }

inline int quantized_invariant(double p_a, double p_b) {
  const double raw = 4.0 * polarization_magnitude(p_a) * polarization_magnitude(p_b);
  const long nu = std::lround(raw);
  if ((nu != 0 && nu != 1) || std::abs(raw - static_cast<double>(nu)) > 0.1) {
    throw std::runtime_error("quadrupole invariant not quantized: 4*p*p = " + std::to_string(raw));
  }
  return static_cast<int>(nu);
}

}  // namespace detail

/// Z2 quadrupole index nu = 4 p_y p_x, computed for both Wannier sectors,
/// which must agree.
inline QuadrupoleResult quadrupole_invariant(const CouplingParams& cp, int n_kx = 50,
                                             int n_ky = 50,
                                             OverlapMode mode = OverlapMode::Unitarized) {
  const detail::FrameGrid g = detail::build_frame_grid(cp, n_kx, n_ky);
  const detail::WannierGrid bands_x = detail::build_wannier_grid(g, true, mode);
  const detail::WannierGrid bands_y = detail::build_wannier_grid(g, false, mode);

  QuadrupoleResult out;
  out.n_kx = n_kx;
  out.n_ky = n_ky;
  out.p_y_minus = detail::nested_polarization_impl(g, bands_x, true, 0, mode);
  out.p_y_plus = detail::nested_polarization_impl(g, bands_x, true, 1, mode);
  out.p_x_minus = detail::nested_polarization_impl(g, bands_y, false, 0, mode);
  out.p_x_plus = detail::nested_polarization_impl(g, bands_y, false, 1, mode);

  const int nu_minus = detail::quantized_invariant(out.p_y_minus, out.p_x_minus);
  const int nu_plus = detail::quantized_invariant(out.p_y_plus, out.p_x_plus);
  if (nu_minus != nu_plus) {
    throw std::runtime_error("Wannier sectors disagree on the quadrupole invariant");
  }
  out.nu = nu_minus;
  return out;
}

/// Real-space one-step operator with periodic wrap bonds, the reference for
/// checking the momentum-space construction on commensurate grids.
inline WalkOperator build_one_step_periodic(const LatticeGeometry& geom,
                                            const CouplingParams& cp) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(geom.total_sites(), geom.total_sites());
  detail::translation_x(geom, BondParity::Odd, cp.j1, true, OperatorKind::Substep1)
      .apply_to_dense(u);
  detail::translation_x(geom, BondParity::Even, cp.j2, true, OperatorKind::Substep2)
      .apply_to_dense(u);
  detail::translation_y(geom, BondParity::Odd, cp.j1, true, OperatorKind::Substep3)
      .apply_to_dense(u);
  detail::translation_y(geom, BondParity::Even, cp.j2, true, OperatorKind::Substep4)
      .apply_to_dense(u);
  return WalkOperator{OperatorKind::OneStep, geom.total_sites(), DenseUnitary{std::move(u)}};
}

}  // namespace dtqw

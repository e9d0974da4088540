#pragma once

#include "dtqw/lattice.hpp"
#include "dtqw/parallel.hpp"
#include "dtqw/walk_operators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtqw {

/// Eigenpairs of a unitary U with U|n> = e^{-i E_n} |n>, quasienergies E_n
/// ascending in (-pi, pi], eigenvectors orthonormal (columns of `states`).
struct QuasienergySpectrum {
  Eigen::VectorXd quasienergies;
  Eigen::MatrixXcd states;
};

namespace detail {

/// Eigendecomposition of a (numerically) unitary matrix via simultaneous
/// diagonalization of the commuting Hermitian pair C = (U + U^dag)/2 and
/// S = i(U - U^dag)/2, whose joint eigenvalues are (cos E, sin E). This
/// keeps eigenvectors orthonormal through degeneracies, which a general
/// complex eigensolver does not guarantee.
inline QuasienergySpectrum unitary_eigensystem(const Eigen::MatrixXcd& u, double unitary_tol) {
  if (u.rows() != u.cols()) throw std::invalid_argument("unitary_eigensystem: matrix not square");
  const Eigen::Index n = u.rows();
  const double residual = unitarity_residual(u);
  if (residual > unitary_tol) {
    throw std::domain_error("unitary_eigensystem: input not unitary, residual " +
                            std::to_string(residual));
  }

  const Eigen::MatrixXcd c = 0.5 * (u + u.adjoint());
  const Eigen::MatrixXcd s = Complex(0.0, 0.5) * (u - u.adjoint());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_c(c);
  if (es_c.info() != Eigen::Success) {
    throw std::runtime_error("unitary_eigensystem: eigensolver failed on Hermitian part");
  }
  Eigen::VectorXd cvals = es_c.eigenvalues();
  Eigen::MatrixXcd vecs = es_c.eigenvectors();
  Eigen::VectorXd phases(n);

  // Split S inside each near-degenerate cluster of C. Chiral partners
  // (+E, -E) share cos E exactly and are separated here by sin E.
  const double cluster_tol = 1e-10;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i + 1;
    while (j < n && cvals[j] - cvals[j - 1] <= cluster_tol) ++j;
    const Eigen::Index width = j - i;
    if (width == 1) {
      const double sval = std::real(vecs.col(i).dot(s * vecs.col(i)));
      phases[i] = std::atan2(sval, cvals[i]);
    } else {
      Eigen::MatrixXcd block = vecs.middleCols(i, width);
      Eigen::MatrixXcd s_block = block.adjoint() * (s * block);
      s_block = 0.5 * (s_block + s_block.adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_s(s_block);
      if (es_s.info() != Eigen::Success) {
        throw std::runtime_error("unitary_eigensystem: eigensolver failed on cluster block");
      }
      block *= es_s.eigenvectors();
      vecs.middleCols(i, width) = block;
      for (Eigen::Index t = 0; t < width; ++t) {
        const double cval = std::real(block.col(t).dot(c * block.col(t)));
        phases[i + t] = std::atan2(es_s.eigenvalues()[t], cval);
      }
    }
    i = j;
  }

  // branch (-pi, pi]: atan2 can return exactly -pi
  for (Eigen::Index k = 0; k < n; ++k) {
    if (phases[k] <= -std::numbers::pi) phases[k] = std::numbers::pi;
  }

  // gauge: largest-magnitude component of each eigenvector made real positive
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index imax = 0;
    vecs.col(k).cwiseAbs().maxCoeff(&imax);
    const Complex pivot = vecs(imax, k);
    if (std::abs(pivot) > 0.0) vecs.col(k) *= std::conj(pivot) / std::abs(pivot);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return phases[a] < phases[b]; });

  QuasienergySpectrum out;
  out.quasienergies.resize(n);
  out.states.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.quasienergies[k] = phases[order[static_cast<std::size_t>(k)]];
    out.states.col(k) = vecs.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace detail

/// Quasienergy spectrum of the effective Hamiltonian generating U, i.e.
/// the E_n with U|n> = e^{-i E_n}|n> on the branch (-pi, pi].
inline QuasienergySpectrum quasienergy_spectrum(const Eigen::MatrixXcd& u) {
  return detail::unitary_eigensystem(u, 1e-8);
}

inline QuasienergySpectrum quasienergy_spectrum(const WalkOperator& op) {
  return quasienergy_spectrum(op.to_dense());
}

/// Boundary-state bookkeeping over a sorted spectrum. Indices are 0-based
/// positions into the ascending quasienergy ordering.
struct StateClassification {
  std::array<int, 4> zero_modes{};   // the four smallest-|E| states
  std::vector<int> edge_modes;       // positive-E window just above the zero modes
  std::vector<int> bulk;             // everything else
  double gap_to_bulk = 0.0;          // min |E| over bulk minus max |E| over zero+edge
  bool has_zero_modes = false;       // all four below zero_tol
};

/// zero_tol: |E| threshold for calling the four smallest-|E| states zero modes.
/// edge_window <= 0 selects the four positive-E states immediately above the
/// zero modes; a positive value selects all positive-E states with |E| inside it.
inline StateClassification classify_states(const QuasienergySpectrum& spec,
                                           double zero_tol = 1e-6, double edge_window = 0.0) {
  const Eigen::Index n = spec.quasienergies.size();
  if (n < 8) throw std::invalid_argument("classify_states: spectrum too small");

  std::vector<int> by_abs(static_cast<std::size_t>(n));
  std::iota(by_abs.begin(), by_abs.end(), 0);
  std::stable_sort(by_abs.begin(), by_abs.end(), [&](int a, int b) {
    return std::abs(spec.quasienergies[a]) < std::abs(spec.quasienergies[b]);
  });

  StateClassification out;
  for (int k = 0; k < 4; ++k) out.zero_modes[static_cast<std::size_t>(k)] = by_abs[static_cast<std::size_t>(k)];
  out.has_zero_modes = std::abs(spec.quasienergies[by_abs[3]]) <= zero_tol;

  for (std::size_t k = 4; k < by_abs.size(); ++k) {
    const int idx = by_abs[k];
    const double e = spec.quasienergies[idx];
    if (e <= 0.0) continue;
    if (edge_window > 0.0) {
      if (e <= edge_window) out.edge_modes.push_back(idx);
    } else if (out.edge_modes.size() < 4) {
      out.edge_modes.push_back(idx);
    }
  }
  std::sort(out.edge_modes.begin(), out.edge_modes.end());

  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (int idx : out.zero_modes) taken[static_cast<std::size_t>(idx)] = true;
  for (int idx : out.edge_modes) taken[static_cast<std::size_t>(idx)] = true;
  double boundary_max = 0.0;
  double bulk_min = std::numbers::pi;
  for (int idx = 0; idx < n; ++idx) {
    const double abs_e = std::abs(spec.quasienergies[idx]);
    if (taken[static_cast<std::size_t>(idx)]) {
      boundary_max = std::max(boundary_max, abs_e);
    } else {
      out.bulk.push_back(idx);
      bulk_min = std::min(bulk_min, abs_e);
    }
  }
  out.gap_to_bulk = bulk_min - boundary_max;
  return out;
}

/// Summed per-site probability of the selected eigenstates; totals the
/// number of states selected (each eigenvector is unit norm).
inline Eigen::VectorXd collective_distribution(const QuasienergySpectrum& spec,
                                               const std::vector<int>& indices) {
  const Eigen::Index n = spec.states.rows();
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(n);
  for (int idx : indices) {
    if (idx < 0 || idx >= spec.states.cols()) {
      throw std::out_of_range("collective_distribution: state index " + std::to_string(idx));
    }
    dist += spec.states.col(idx).cwiseAbs2();
  }
  const double total = dist.sum();
  if (std::abs(total - static_cast<double>(indices.size())) > 1e-10) {
    throw std::runtime_error("collective_distribution: total weight off by more than 1e-10");
  }
  return dist;
}

/// Fraction of the distribution inside the four patch x patch corner blocks.
inline double corner_patch_weight(const Eigen::VectorXd& dist, const LatticeGeometry& geom,
                                  int patch = 3) {
  const int m = geom.sites_per_side;
  if (patch < 1 || 2 * patch > m) throw std::invalid_argument("corner_patch_weight: bad patch size");
  double w = 0.0;
  for (int dx = 0; dx < patch; ++dx) {
    for (int dy = 0; dy < patch; ++dy) {
      w += dist[site_index(1 + dx, 1 + dy, geom)];
      w += dist[site_index(1 + dx, m - dy, geom)];
      w += dist[site_index(m - dx, 1 + dy, geom)];
      w += dist[site_index(m - dx, m - dy, geom)];
    }
  }
  return w / dist.sum();
}

/// Fraction sitting exactly on the four corner sites.
inline double corner_site_weight(const Eigen::VectorXd& dist, const LatticeGeometry& geom) {
  const int m = geom.sites_per_side;
  const double w = dist[site_index(1, 1, geom)] + dist[site_index(1, m, geom)] +
                   dist[site_index(m, 1, geom)] + dist[site_index(m, m, geom)];
  return w / dist.sum();
}

struct SweepRow {
  double j1 = 0.0;
  Eigen::VectorXd quasienergies;
};

/// One spectrum per J1 value at fixed J2, rows in grid order. Entries are
/// independent and run in parallel; each writes only its own row.
inline std::vector<SweepRow> spectrum_sweep(const LatticeGeometry& geom, double j2,
                                            const std::vector<double>& j1_grid, int threads = 1) {
  if (j1_grid.empty()) throw std::invalid_argument("spectrum_sweep: empty J1 grid");
  std::vector<SweepRow> rows(j1_grid.size());
  parallel_for(static_cast<int>(j1_grid.size()), threads, [&](int i) {
    const double j1 = j1_grid[static_cast<std::size_t>(i)];
    const QuasienergySpectrum spec = quasienergy_spectrum(build_one_step(geom, {j1, j2}));
    rows[static_cast<std::size_t>(i)] = {j1, spec.quasienergies};
  });
  return rows;
}

}  // namespace dtqw

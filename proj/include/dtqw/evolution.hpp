#pragma once

#include "dtqw/lattice.hpp"
#include "dtqw/parallel.hpp"
#include "dtqw/walk_operators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dtqw {

/// Probability snapshots |psi_N|^2 of a multi-step walk at the requested
/// step counts.
struct Trajectory {
  int m = 0;  // sites per side
  std::pair<int, int> initial_site{0, 0};
  std::vector<int> steps;
  std::vector<Eigen::VectorXd> snapshots;
};

/// Region probability per step, optionally with an ensemble spread.
struct LocalizationCurve {
  Eigen::VectorXd values;              // P(N), N = 0..N_max
  Eigen::VectorXd std_dev;             // empty for a single clean run
  std::string region;
  std::optional<DisorderConfig> ensemble;
};

/// Sites making up a probability region.
struct Region {
  std::vector<int> sites;
  std::string name;
};

inline Region corner_region(const LatticeGeometry& geom, std::pair<int, int> corner = {1, 1}) {
  return Region{{site_index(corner.first, corner.second, geom)},
                "corner(" + std::to_string(corner.first) + "," + std::to_string(corner.second) + ")"};
}

/// The x = column edge; the two corner sites are excluded by default.
inline Region edge_column_region(const LatticeGeometry& geom, int column = 1,
                                 bool exclude_corners = true) {
  const int m = geom.sites_per_side;
  Region r;
  const int y_first = exclude_corners ? 2 : 1;
  const int y_last = exclude_corners ? m - 1 : m;
  for (int y = y_first; y <= y_last; ++y) r.sites.push_back(site_index(column, y, geom));
  r.name = "edge(x=" + std::to_string(column) + (exclude_corners ? ",no corners)" : ")");
  return r;
}

inline double region_probability(const Eigen::VectorXd& prob, const Region& region) {
  double p = 0.0;
  for (int s : region.sites) p += prob[s];
  return p;
}

/// Repeated application of U with snapshots captured at the requested steps.
inline Trajectory evolve(const WaveFunction& psi0, const WalkOperator& u,
                         std::vector<int> steps_wanted, std::pair<int, int> initial_site = {0, 0}) {
  if (psi0.amplitudes.size() != u.dim) throw std::invalid_argument("evolve: dimension mismatch");
  if (steps_wanted.empty()) throw std::invalid_argument("evolve: no steps requested");
  std::sort(steps_wanted.begin(), steps_wanted.end());
  steps_wanted.erase(std::unique(steps_wanted.begin(), steps_wanted.end()), steps_wanted.end());
  if (steps_wanted.front() < 0) throw std::invalid_argument("evolve: negative step count");

  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(u.dim))));
  Trajectory traj;
  traj.m = m;
  traj.initial_site = initial_site;
  traj.steps = steps_wanted;
  traj.snapshots.reserve(steps_wanted.size());

  WaveFunction psi = psi0;
  int step = 0;
  for (int target : steps_wanted) {
    for (; step < target; ++step) psi = apply(u, psi);
    Eigen::VectorXd prob = psi.amplitudes.cwiseAbs2();
    if (std::abs(prob.sum() - 1.0) > 1e-10) {
      throw std::runtime_error("evolve: snapshot probability drifted from 1");
    }
    traj.snapshots.push_back(std::move(prob));
  }
  return traj;
}

namespace detail {

inline void require_contiguous_steps(const Trajectory& traj) {
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    if (traj.steps[i] != static_cast<int>(i)) {
      throw std::invalid_argument("localization curve needs a trajectory with every step 0..N_max");
    }
  }
}

inline LocalizationCurve region_curve(const Trajectory& traj, const Region& region) {
  require_contiguous_steps(traj);
  LocalizationCurve curve;
  curve.region = region.name;
  curve.values.resize(static_cast<Eigen::Index>(traj.snapshots.size()));
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    curve.values[static_cast<Eigen::Index>(n)] = region_probability(traj.snapshots[n], region);
  }
  return curve;
}

/// Streaming evolution that records only the region probability per step.
inline Eigen::VectorXd evolve_region_probability(const WaveFunction& psi0, const WalkOperator& u,
                                                 int n_max, const Region& region) {
  Eigen::VectorXd curve(n_max + 1);
  Eigen::VectorXcd psi = psi0.amplitudes;
  auto record = [&](int n) {
    double p = 0.0;
    for (int s : region.sites) p += std::norm(psi[s]);
    curve[n] = p;
  };
  record(0);
  for (int n = 1; n <= n_max; ++n) {
    psi = std::get<DenseUnitary>(u.rep).matrix * psi;
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
      throw std::runtime_error("evolve_region_probability: norm drifted from 1");
    }
    record(n);
  }
  return curve;
}

}  // namespace detail

inline LocalizationCurve corner_probability(const Trajectory& traj,
                                            std::pair<int, int> corner = {1, 1}) {
  return detail::region_curve(traj, corner_region(LatticeGeometry(traj.m), corner));
}

inline LocalizationCurve edge_probability(const Trajectory& traj, int edge_column = 1,
                                          bool exclude_corners = true) {
  return detail::region_curve(traj,
                              edge_column_region(LatticeGeometry(traj.m), edge_column, exclude_corners));
}

/// Ensemble of static-disorder runs: every realization reuses its own fixed
/// U_dis at each step (U_total = U_step * U_dis). Realizations run in
/// parallel into per-realization slots; the mean/stddev reduction happens
/// in fixed realization order, so results do not depend on the schedule.
inline LocalizationCurve disorder_ensemble(const LatticeGeometry& geom, const CouplingParams& cp,
                                           const DisorderConfig& dc, const WaveFunction& psi0,
                                           int n_max, const Region& region, int threads = 1) {
  if (dc.realizations < 1) throw std::invalid_argument("disorder_ensemble: realizations must be >= 1");
  const WalkOperator step = build_one_step(geom, cp);

  std::vector<Eigen::VectorXd> curves(static_cast<std::size_t>(dc.realizations));
  parallel_for(dc.realizations, threads, [&](int r) {
    const WalkOperator total = compose_disordered_step(step, build_disorder(geom, dc, r));
    curves[static_cast<std::size_t>(r)] =
        detail::evolve_region_probability(psi0, total, n_max, region);
  });

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_max + 1);
  for (const Eigen::VectorXd& c : curves) mean += c;
  mean /= static_cast<double>(dc.realizations);

  Eigen::VectorXd var = Eigen::VectorXd::Zero(n_max + 1);
  if (dc.realizations > 1) {
    for (const Eigen::VectorXd& c : curves) var += (c - mean).cwiseAbs2();
    var /= static_cast<double>(dc.realizations - 1);
  }

  LocalizationCurve out;
  out.values = std::move(mean);
  out.std_dev = var.cwiseSqrt();
  out.region = region.name;
  out.ensemble = dc;
  return out;
}

}  // namespace dtqw

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace dtqw {

using Complex = std::complex<double>;

/// Tolerance for the unit-norm invariant of walker states.
inline constexpr double kNormTol = 1e-12;

/// Square M x M lattice, M even and >= 4. Coordinates are 1-based,
/// (x, y) in {1..M}^2; linear indices are 0-based and row-major with
/// x as the outer index, so x-neighbors sit a stride of M apart.
struct LatticeGeometry {
  int sites_per_side = 0;

  explicit LatticeGeometry(int m) : sites_per_side(m) {
    if (m < 4 || m % 2 != 0) {
      throw std::invalid_argument("LatticeGeometry: M must be even and >= 4, got " +
                                  std::to_string(m));
    }
  }

  int total_sites() const { return sites_per_side * sites_per_side; }
};

/// Alternating hopping amplitudes: j1 on intracell (odd) bonds, j2 on
/// intercell (even) bonds. Equivalently j1 = t - dt, j2 = t + dt.
struct CouplingParams {
  double j1 = 0.0;
  double j2 = 1.0;

  static CouplingParams from_hopping_split(double t, double dt) { return {t - dt, t + dt}; }
};

/// Static on-site phase disorder: each phase drawn uniformly from
/// [-strength/2, strength/2], reproducible from (seed, realization id).
struct DisorderConfig {
  double strength = 0.0;
  std::uint64_t seed = 0;
  int realizations = 1;
};

inline int site_index(int x, int y, const LatticeGeometry& geom) {
  const int m = geom.sites_per_side;
  if (x < 1 || x > m || y < 1 || y > m) {
    throw std::out_of_range("site_index: coordinates (" + std::to_string(x) + "," +
                            std::to_string(y) + ") outside 1.." + std::to_string(m));
  }
  return (x - 1) * m + (y - 1);
}

inline std::pair<int, int> site_coords(int index, const LatticeGeometry& geom) {
  if (index < 0 || index >= geom.total_sites()) {
    throw std::out_of_range("site_coords: index " + std::to_string(index) + " outside 0.." +
                            std::to_string(geom.total_sites() - 1));
  }
  const int m = geom.sites_per_side;
  return {index / m + 1, index % m + 1};
}

/// Walker state: complex amplitudes over all M^2 sites, unit L2 norm.
struct WaveFunction {
  Eigen::VectorXcd amplitudes;

  /// Validates the unit-norm invariant; throws if violated by more than kNormTol.
  static WaveFunction from_amplitudes(Eigen::VectorXcd a) {
    const double norm = a.norm();
    if (std::abs(norm - 1.0) > kNormTol) {
      throw std::invalid_argument("WaveFunction: norm " + std::to_string(norm) +
                                  " deviates from 1 beyond tolerance");
    }
    return WaveFunction{std::move(a)};
  }
};

inline WaveFunction localized_state(int x, int y, const LatticeGeometry& geom) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(geom.total_sites());
  a[site_index(x, y, geom)] = 1.0;
  return WaveFunction{std::move(a)};
}

}  // namespace dtqw

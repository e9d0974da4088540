#pragma once

#include "dtqw/lattice.hpp"
#include "dtqw/walk_operators.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtqw {

/// Layout violates the disjointness rule inside a layer, or indexes sites
/// out of range.
struct layout_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CouplerLayer { Single, Double };

/// One directional coupler: coupling K over interaction length z, with an
/// optional off-diagonal phase realized by the double-layer geometry.
struct CouplerSpec {
  double coupling = 1.0;  // K
  double length = 0.0;    // z
  double phase = 0.0;     // Phi
  CouplerLayer layer = CouplerLayer::Single;
};

struct PlacedCoupler {
  int site_a = 0;
  int site_b = 0;
  CouplerSpec spec;
};

/// Coupler layers in application order (layer 0 acts first).
struct LayoutSchedule {
  int m = 0;
  double j1 = 0.0;
  double j2 = 0.0;
  std::vector<std::vector<PlacedCoupler>> layers;
};

/// Single-layer transfer matrix T1(z).
inline Eigen::Matrix2cd coupler_transfer(double coupling, double length) {
  if (coupling <= 0.0) throw std::invalid_argument("coupler_transfer: K must be > 0");
  if (length < 0.0) throw std::invalid_argument("coupler_transfer: z must be >= 0");
  const double c = std::cos(coupling * length);
  const double s = std::sin(coupling * length);
  const Complex minus_i(0.0, -1.0);
  Eigen::Matrix2cd t;
  t << c, minus_i * s,  //
      minus_i * s, c;
  return t;
}

/// Double-layer transfer matrix T2(z); reduces to T1 when Phi is a multiple
/// of 2 pi.
inline Eigen::Matrix2cd phased_coupler_transfer(double coupling, double length, double phase) {
  if (coupling <= 0.0) throw std::invalid_argument("phased_coupler_transfer: K must be > 0");
  if (length < 0.0) throw std::invalid_argument("phased_coupler_transfer: z must be >= 0");
  const double c = std::cos(coupling * length);
  const double s = std::sin(coupling * length);
  const Complex minus_i(0.0, -1.0);
  Eigen::Matrix2cd t;
  t << c, minus_i * s * std::polar(1.0, phase),  //
      minus_i * s * std::polar(1.0, -phase), c;
  return t;
}

namespace detail {

/// Appends one bond as a coupler. The rotation angle pi*r/4 goes into z
/// (K normalized to 1); a negative amplitude or a pi-flux link folds into
/// the double-layer phase, keeping z >= 0 and Phi in {0, pi}.
inline void place_coupler(std::vector<PlacedCoupler>& layer, int site_a, int site_b, double r,
                          bool flux_minus) {
  double kz = std::numbers::pi / 4.0 * r;
  bool phase_pi = flux_minus;
  if (kz < 0.0) {
    kz = -kz;
    phase_pi = !phase_pi;
  }
  if (kz == 0.0) return;  // identity coupler, elided
  CouplerSpec spec;
  spec.coupling = 1.0;
  spec.length = kz;
  spec.phase = phase_pi ? std::numbers::pi : 0.0;
  spec.layer = phase_pi ? CouplerLayer::Double : CouplerLayer::Single;
  layer.push_back({site_a, site_b, spec});
}

}  // namespace detail

/// Lowers the one-step walk into four coupler layers, one per substep:
/// x-bonds become plain directional couplers, y-bonds phase-shifted ones
/// with Phi = x*pi reduced mod 2pi.
inline LayoutSchedule compile_step(const LatticeGeometry& geom, const CouplingParams& cp) {
  const int m = geom.sites_per_side;
  LayoutSchedule layout;
  layout.m = m;
  layout.j1 = cp.j1;
  layout.j2 = cp.j2;
  layout.layers.resize(4);

  for (int pass = 0; pass < 2; ++pass) {
    const BondParity parity = (pass == 0) ? BondParity::Odd : BondParity::Even;
    const double r = (pass == 0) ? cp.j1 : cp.j2;
    for (int x : detail::bond_starts(m, parity, false)) {
      for (int y = 1; y <= m; ++y) {
        detail::place_coupler(layout.layers[static_cast<std::size_t>(pass)],
                              site_index(x, y, geom), site_index(x + 1, y, geom), r, false);
      }
    }
    for (int x = 1; x <= m; ++x) {
      const bool flux_minus = (x % 2 != 0);  // e^{i x pi} = -1 on odd columns
      for (int y : detail::bond_starts(m, parity, false)) {
        detail::place_coupler(layout.layers[static_cast<std::size_t>(2 + pass)],
                              site_index(x, y, geom), site_index(x, y + 1, geom), r, flux_minus);
      }
    }
  }
  return layout;
}

/// Composes the full layout into a global unitary, layer by layer in
/// application order. Rejects overlapping waveguide pairs within a layer.
inline Eigen::MatrixXcd simulate_layout(const LayoutSchedule& layout) {
  const int dim = layout.m * layout.m;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& layer : layout.layers) {
    std::set<int> used;
    for (const PlacedCoupler& pc : layer) {
      if (pc.site_a < 0 || pc.site_a >= dim || pc.site_b < 0 || pc.site_b >= dim ||
          pc.site_a == pc.site_b) {
        throw layout_error("coupler site pair out of range");
      }
      if (!used.insert(pc.site_a).second || !used.insert(pc.site_b).second) {
        throw layout_error("overlapping waveguide pairs within one layer");
      }
      const Eigen::Matrix2cd t =
          phased_coupler_transfer(pc.spec.coupling, pc.spec.length, pc.spec.phase);
      const Eigen::RowVectorXcd row_a = u.row(pc.site_a);
      const Eigen::RowVectorXcd row_b = u.row(pc.site_b);
      u.row(pc.site_a) = t(0, 0) * row_a + t(0, 1) * row_b;
      u.row(pc.site_b) = t(1, 0) * row_a + t(1, 1) * row_b;
    }
  }
  return u;
}

}  // namespace dtqw

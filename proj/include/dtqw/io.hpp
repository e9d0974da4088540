#pragma once

#include "dtqw/bloch.hpp"
#include "dtqw/evolution.hpp"
#include "dtqw/lattice.hpp"
#include "dtqw/photonic.hpp"
#include "dtqw/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtqw::io {

using nlohmann::json;

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// FNV-1a 64-bit over a byte string.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::uint64_t file_hash(const std::filesystem::path& path) {
  return fnv1a64(read_file(path));
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// CSV emitters ('#'-prefixed header line, comma separated, 17 digits)
// ---------------------------------------------------------------------------

inline std::string spectrum_csv(const Eigen::VectorXd& quasienergies) {
  std::ostringstream out;
  out << "# n,quasienergy\n";
  for (Eigen::Index n = 0; n < quasienergies.size(); ++n) {
    out << (n + 1) << "," << format_double(quasienergies[n]) << "\n";
  }
  return out.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "# J1,n,quasienergy\n";
  for (const SweepRow& row : rows) {
    for (Eigen::Index n = 0; n < row.quasienergies.size(); ++n) {
      out << format_double(row.j1) << "," << (n + 1) << ","
          << format_double(row.quasienergies[n]) << "\n";
    }
  }
  return out.str();
}

/// M x M probability grid, row x = 1..M, column y = 1..M.
inline std::string grid_csv(const Eigen::VectorXd& field, const LatticeGeometry& geom) {
  const int m = geom.sites_per_side;
  if (field.size() != geom.total_sites()) throw std::invalid_argument("grid_csv: size mismatch");
  std::ostringstream out;
  out << "# rows x=1..M, columns y=1..M\n";
  for (int x = 1; x <= m; ++x) {
    for (int y = 1; y <= m; ++y) {
      out << format_double(field[site_index(x, y, geom)]) << (y == m ? "\n" : ",");
    }
  }
  return out.str();
}

inline std::string curve_csv(const LocalizationCurve& curve) {
  std::ostringstream out;
  const bool with_std = curve.std_dev.size() == curve.values.size();
  out << (with_std ? "# N,P_mean,P_std\n" : "# N,P\n");
  for (Eigen::Index n = 0; n < curve.values.size(); ++n) {
    out << n << "," << format_double(curve.values[n]);
    if (with_std) out << "," << format_double(curve.std_dev[n]);
    out << "\n";
  }
  return out.str();
}

inline std::string wannier_csv(const WannierBands& bands) {
  std::ostringstream out;
  out << "# k_transverse,nu_minus,nu_plus\n";
  for (std::size_t i = 0; i < bands.transverse_k.size(); ++i) {
    out << format_double(bands.transverse_k[i]) << "," << format_double(bands.nu_minus[i]) << ","
        << format_double(bands.nu_plus[i]) << "\n";
  }
  return out.str();
}

/// Debug dump of a dense operator: one row per entry, i,j,re,im.
inline std::string matrix_csv(const Eigen::MatrixXcd& mat) {
  std::ostringstream out;
  out << "# i,j,re,im\n";
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      out << i << "," << j << "," << format_double(mat(i, j).real()) << ","
          << format_double(mat(i, j).imag()) << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// JSON layout schema
// ---------------------------------------------------------------------------

inline json layout_to_json(const LayoutSchedule& layout) {
  json layers = json::array();
  for (const auto& layer : layout.layers) {
    json items = json::array();
    for (const PlacedCoupler& pc : layer) {
      items.push_back({{"pair", {pc.site_a, pc.site_b}},
                       {"kz", pc.spec.coupling * pc.spec.length},
                       {"phi", pc.spec.phase},
                       {"layer", pc.spec.layer == CouplerLayer::Single ? "single" : "double"}});
    }
    layers.push_back(std::move(items));
  }
  return json{{"meta", {{"M", layout.m}, {"J1", layout.j1}, {"J2", layout.j2}}},
              {"layers", std::move(layers)}};
}

inline LayoutSchedule layout_from_json(const json& j) {
  LayoutSchedule layout;
  layout.m = j.at("meta").at("M").get<int>();
  layout.j1 = j.at("meta").at("J1").get<double>();
  layout.j2 = j.at("meta").at("J2").get<double>();
  for (const json& layer : j.at("layers")) {
    std::vector<PlacedCoupler> placed;
    for (const json& item : layer) {
      PlacedCoupler pc;
      pc.site_a = item.at("pair").at(0).get<int>();
      pc.site_b = item.at("pair").at(1).get<int>();
      pc.spec.coupling = 1.0;
      pc.spec.length = item.at("kz").get<double>();
      pc.spec.phase = item.at("phi").get<double>();
      pc.spec.layer =
          item.at("layer").get<std::string>() == "single" ? CouplerLayer::Single : CouplerLayer::Double;
      placed.push_back(pc);
    }
    layout.layers.push_back(std::move(placed));
  }
  return layout;
}

}  // namespace dtqw::io

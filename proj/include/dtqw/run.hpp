#pragma once

#include "dtqw/bloch.hpp"
#include "dtqw/evolution.hpp"
#include "dtqw/io.hpp"
#include "dtqw/lattice.hpp"
#include "dtqw/photonic.hpp"
#include "dtqw/spectral.hpp"
#include "dtqw/version.hpp"
#include "dtqw/walk_operators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dtqw {

enum class Command { Spectrum, Sweep, Invariant, Evolve, Disorder, Layout };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::Sweep: return "sweep";
    case Command::Invariant: return "invariant";
    case Command::Evolve: return "evolve";
    case Command::Disorder: return "disorder";
    case Command::Layout: return "layout";
  }
  return "?";
}

/// Validated run description. Defaults mirror the reference setup: a 20x20
/// lattice, J2 = 1, snapshots at steps {5,50,100,150}, a 50-interval k-grid
/// and 100 disorder realizations at W = 2.5.
struct RunConfig {
  Command command = Command::Spectrum;
  int m = 20;
  double j1 = 0.1;
  double j2 = 1.0;
  std::uint64_t seed = 12345;
  double disorder_strength = 2.5;    // W
  int realizations = 100;
  int n_max = 150;
  std::vector<int> snapshot_steps = {5, 50, 100, 150};
  int k_grid = 50;                   // N intervals per direction (N+1 points, endpoint shared)
  std::pair<int, int> initial_site = {0, 0};  // {0,0} = command-specific default
  std::string output_dir = "dtqw_out";
  std::string region = "corner";     // disorder command: corner | edge
  double zero_tol = 1e-6;
  bool raw_overlaps = false;
  int threads = 0;                   // 0 = hardware concurrency
  std::vector<double> j1_grid;       // sweep paths; empty = default grid
  std::string dump_step_file;        // optional debug dump of U_step
};

inline void validate(const RunConfig& cfg) {
  if (cfg.m < 4 || cfg.m % 2 != 0) {
    throw std::invalid_argument("config field M: must be even and >= 4, got " + std::to_string(cfg.m));
  }
  if (!std::isfinite(cfg.j1)) throw std::invalid_argument("config field J1: must be finite");
  if (!std::isfinite(cfg.j2)) throw std::invalid_argument("config field J2: must be finite");
  if (cfg.disorder_strength < 0.0) {
    throw std::invalid_argument("config field W: must be >= 0, got " +
                                std::to_string(cfg.disorder_strength));
  }
  if (cfg.realizations < 1) {
    throw std::invalid_argument("config field realizations: must be >= 1, got " +
                                std::to_string(cfg.realizations));
  }
  if (cfg.n_max < 0) throw std::invalid_argument("config field N_max: must be >= 0");
  if (cfg.k_grid < 8) {
    throw std::invalid_argument("config field k_grid: must be >= 8, got " +
                                std::to_string(cfg.k_grid));
  }
  for (int s : cfg.snapshot_steps) {
    if (s < 0) throw std::invalid_argument("config field snapshot_steps: negative step");
  }
  if (cfg.zero_tol <= 0.0) throw std::invalid_argument("config field zero_tol: must be > 0");
  if (cfg.initial_site != std::pair<int, int>{0, 0}) {
    const auto [x, y] = cfg.initial_site;
    if (x < 1 || x > cfg.m || y < 1 || y > cfg.m) {
      throw std::invalid_argument("config field initial_site: outside the lattice");
    }
  }
  if (cfg.region != "corner" && cfg.region != "edge") {
    throw std::invalid_argument("config field region: must be 'corner' or 'edge', got " + cfg.region);
  }
  if (cfg.threads < 0) throw std::invalid_argument("config field threads: must be >= 0");
}

inline io::json config_json(const RunConfig& cfg) {
  return io::json{{"command", command_name(cfg.command)},
                  {"M", cfg.m},
                  {"J1", cfg.j1},
                  {"J2", cfg.j2},
                  {"seed", cfg.seed},
                  {"W", cfg.disorder_strength},
                  {"realizations", cfg.realizations},
                  {"N_max", cfg.n_max},
                  {"snapshot_steps", cfg.snapshot_steps},
                  {"k_grid", cfg.k_grid},
                  {"initial_site", {cfg.initial_site.first, cfg.initial_site.second}},
                  {"output_dir", cfg.output_dir},
                  {"region", cfg.region},
                  {"zero_tol", cfg.zero_tol},
                  {"raw_overlaps", cfg.raw_overlaps},
                  {"threads", cfg.threads},
                  {"j1_grid", cfg.j1_grid}};
}

/// What a run produced: file names with content hashes, plus timing.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> outputs;  // (file, fnv1a64 hex)
  double wall_seconds = 0.0;
  std::filesystem::path manifest_path;
};

namespace detail {

class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void emit(const std::string& name, const std::string& content) {
    const std::filesystem::path path = dir_ / name;
    io::write_file(path, content);
    outputs_.emplace_back(name, io::hex64(io::fnv1a64(content)));
  }

  const std::vector<std::pair<std::string, std::string>>& outputs() const { return outputs_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

inline std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.05 * i);  // J1 in [0, 2]
  return grid;
}

inline std::vector<int> all_steps(int n_max) {
  std::vector<int> steps(static_cast<std::size_t>(n_max) + 1);
  for (int i = 0; i <= n_max; ++i) steps[static_cast<std::size_t>(i)] = i;
  return steps;
}

inline io::json classification_json(const QuasienergySpectrum& spec,
                                    const StateClassification& cls, const LatticeGeometry& geom) {
  // state numbers reported 1-based to match the ascending spectrum ordering
  std::vector<int> zero, edge;
  for (int idx : cls.zero_modes) zero.push_back(idx + 1);
  for (int idx : cls.edge_modes) edge.push_back(idx + 1);
  std::sort(zero.begin(), zero.end());

  io::json out{{"zero_modes", zero},
               {"edge_modes", edge},
               {"has_zero_modes", cls.has_zero_modes},
               {"gap_to_bulk", cls.gap_to_bulk}};
  if (cls.has_zero_modes) {
    std::vector<int> zero_idx(cls.zero_modes.begin(), cls.zero_modes.end());
    const Eigen::VectorXd dist = collective_distribution(spec, zero_idx);
    out["zero_mode_corner_patch_weight"] = corner_patch_weight(dist, geom);
  }
  if (!cls.edge_modes.empty()) {
    const Eigen::VectorXd dist = collective_distribution(spec, cls.edge_modes);
    out["edge_mode_corner_site_weight"] = corner_site_weight(dist, geom);
  }
  return out;
}

inline void run_spectrum(const RunConfig& cfg, OutputWriter& writer) {
  const LatticeGeometry geom(cfg.m);
  const CouplingParams cp{cfg.j1, cfg.j2};
  const WalkOperator step = build_one_step(geom, cp);
  const QuasienergySpectrum spec = quasienergy_spectrum(step);
  const StateClassification cls = classify_states(spec, cfg.zero_tol);

  writer.emit("spectrum.csv", io::spectrum_csv(spec.quasienergies));
  writer.emit("classification.json", classification_json(spec, cls, geom).dump(2) + "\n");

  std::vector<int> zero_idx(cls.zero_modes.begin(), cls.zero_modes.end());
  writer.emit("zero_mode_distribution.csv",
              io::grid_csv(collective_distribution(spec, zero_idx), geom));
  if (!cls.edge_modes.empty()) {
    writer.emit("edge_mode_distribution.csv",
                io::grid_csv(collective_distribution(spec, cls.edge_modes), geom));
  }
  if (!cfg.dump_step_file.empty()) {
    writer.emit(cfg.dump_step_file, io::matrix_csv(step.to_dense()));
  }
}

inline void run_sweep(const RunConfig& cfg, OutputWriter& writer) {
  const LatticeGeometry geom(cfg.m);
  const std::vector<double> grid = cfg.j1_grid.empty() ? default_sweep_grid() : cfg.j1_grid;
  writer.emit("sweep.csv", io::sweep_csv(spectrum_sweep(geom, cfg.j2, grid, cfg.threads)));
}

inline io::json invariant_json(const CouplingParams& cp, const QuadrupoleResult& q) {
  return io::json{{"J1", cp.j1},          {"J2", cp.j2},           {"N", q.n_kx},
                  {"p_y_minus", q.p_y_minus}, {"p_y_plus", q.p_y_plus},
                  {"p_x_minus", q.p_x_minus}, {"p_x_plus", q.p_x_plus},
                  {"nu", q.nu}};
}

inline void run_invariant(const RunConfig& cfg, OutputWriter& writer) {
  const OverlapMode mode = cfg.raw_overlaps ? OverlapMode::Raw : OverlapMode::Unitarized;
  const CouplingParams cp{cfg.j1, cfg.j2};
  const QuadrupoleResult q = quadrupole_invariant(cp, cfg.k_grid, cfg.k_grid, mode);
  writer.emit("invariant.json", invariant_json(cp, q).dump(2) + "\n");
  writer.emit("wannier_x.csv",
              io::wannier_csv(wannier_bands(cp, PolarizationComponent::Py, cfg.k_grid, cfg.k_grid, mode)));
  writer.emit("wannier_y.csv",
              io::wannier_csv(wannier_bands(cp, PolarizationComponent::Px, cfg.k_grid, cfg.k_grid, mode)));

  if (!cfg.j1_grid.empty()) {
    std::ostringstream sweep;
    sweep << "# J1,p_y_minus,p_y_plus,p_x_minus,p_x_plus,nu\n";
    std::vector<QuadrupoleResult> rows(cfg.j1_grid.size());
    parallel_for(static_cast<int>(cfg.j1_grid.size()), cfg.threads, [&](int i) {
      rows[static_cast<std::size_t>(i)] = quadrupole_invariant(
          {cfg.j1_grid[static_cast<std::size_t>(i)], cfg.j2}, cfg.k_grid, cfg.k_grid, mode);
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const QuadrupoleResult& r = rows[i];
      sweep << io::format_double(cfg.j1_grid[i]) << "," << io::format_double(r.p_y_minus) << ","
            << io::format_double(r.p_y_plus) << "," << io::format_double(r.p_x_minus) << ","
            << io::format_double(r.p_x_plus) << "," << r.nu << "\n";
    }
    writer.emit("invariant_sweep.csv", sweep.str());
  }
}

inline void run_evolve(const RunConfig& cfg, OutputWriter& writer) {
  const LatticeGeometry geom(cfg.m);
  const CouplingParams cp{cfg.j1, cfg.j2};
  const std::pair<int, int> start =
      (cfg.initial_site == std::pair<int, int>{0, 0}) ? std::pair<int, int>{1, 1} : cfg.initial_site;
  const WaveFunction psi0 = localized_state(start.first, start.second, geom);
  const WalkOperator step = build_one_step(geom, cp);

  const Trajectory traj = evolve(psi0, step, all_steps(cfg.n_max), start);
  for (int s : cfg.snapshot_steps) {
    if (s > cfg.n_max) continue;
    writer.emit("snapshot_N" + std::to_string(s) + ".csv",
                io::grid_csv(traj.snapshots[static_cast<std::size_t>(s)], geom));
  }

  const LocalizationCurve pc = corner_probability(traj);
  const LocalizationCurve pe = edge_probability(traj);
  std::ostringstream curves;
  curves << "# N,P_corner,P_edge\n";
  for (int n = 0; n <= cfg.n_max; ++n) {
    curves << n << "," << io::format_double(pc.values[n]) << "," << io::format_double(pe.values[n])
           << "\n";
  }
  writer.emit("curves.csv", curves.str());
}

inline void run_disorder(const RunConfig& cfg, OutputWriter& writer) {
  const LatticeGeometry geom(cfg.m);
  const CouplingParams cp{cfg.j1, cfg.j2};
  const bool edge = cfg.region == "edge";
  const std::pair<int, int> start = (cfg.initial_site == std::pair<int, int>{0, 0})
                                        ? (edge ? std::pair<int, int>{1, 2} : std::pair<int, int>{1, 1})
                                        : cfg.initial_site;
  const WaveFunction psi0 = localized_state(start.first, start.second, geom);
  const Region region = edge ? edge_column_region(geom) : corner_region(geom);

  const DisorderConfig dc{cfg.disorder_strength, cfg.seed, cfg.realizations};
  const LocalizationCurve ensemble =
      disorder_ensemble(geom, cp, dc, psi0, cfg.n_max, region, cfg.threads);
  writer.emit("disorder_curve.csv", io::curve_csv(ensemble));

  const Trajectory clean = evolve(psi0, build_one_step(geom, cp), all_steps(cfg.n_max), start);
  writer.emit("clean_curve.csv", io::curve_csv(detail::region_curve(clean, region)));
}

inline void run_layout(const RunConfig& cfg, OutputWriter& writer) {
  const LatticeGeometry geom(cfg.m);
  const CouplingParams cp{cfg.j1, cfg.j2};
  const LayoutSchedule layout = compile_step(geom, cp);
  writer.emit("layout.json", io::layout_to_json(layout).dump(2) + "\n");

  // verify the compiled layout against the operator it encodes
  const Eigen::MatrixXcd direct = build_one_step(geom, cp).to_dense();
  const Eigen::MatrixXcd simulated = simulate_layout(layout);
  const double roundtrip = (simulated - direct).cwiseAbs().maxCoeff();
  const double residual = unitarity_residual(simulated);
  if (roundtrip > 1e-12) {
    throw std::runtime_error("layout round-trip error " + std::to_string(roundtrip));
  }
  writer.emit("layout_check.json",
              io::json{{"roundtrip_max_error", roundtrip}, {"unitarity_residual", residual}}.dump(2) +
                  "\n");
}

}  // namespace detail

/// Dispatches one validated config, writes the data files plus manifest.json
/// (config echo, version, wall time, per-file content hashes).
inline RunManifest run(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  detail::OutputWriter writer{std::filesystem::path(cfg.output_dir)};

  switch (cfg.command) {
    case Command::Spectrum: detail::run_spectrum(cfg, writer); break;
    case Command::Sweep: detail::run_sweep(cfg, writer); break;
    case Command::Invariant: detail::run_invariant(cfg, writer); break;
    case Command::Evolve: detail::run_evolve(cfg, writer); break;
    case Command::Disorder: detail::run_disorder(cfg, writer); break;
    case Command::Layout: detail::run_layout(cfg, writer); break;
  }

  RunManifest manifest;
  manifest.outputs = writer.outputs();
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  io::json files = io::json::array();
  for (const auto& [name, hash] : manifest.outputs) {
    files.push_back({{"file", name}, {"fnv1a64", hash}});
  }
  const io::json mjson{{"config", config_json(cfg)},
                       {"version", kVersion},
                       {"wall_time_seconds", manifest.wall_seconds},
                       {"outputs", files}};
  manifest.manifest_path = writer.dir() / "manifest.json";
  io::write_file(manifest.manifest_path, mjson.dump(2) + "\n");
  return manifest;
}

}  // namespace dtqw

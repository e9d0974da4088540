// dtqw: spectra, topological invariants, walker dynamics and photonic
// layouts for the 2D coinless discrete-time quantum walk.

#include "dtqw/dtqw.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CliState {
  dtqw::RunConfig cfg;
  std::vector<int> initial_site_flag;  // two ints when given
  double j1_min = 0.0, j1_max = 2.0;
  int j1_points = 0;                   // > 0 enables the J1 sweep grid
};

void add_common_options(CLI::App* sub, CliState& st) {
  sub->add_option("-M,--M", st.cfg.m, "Lattice sites per side (even, >= 4)")
      ->capture_default_str();
  sub->add_option("--J1", st.cfg.j1, "Intracell hopping amplitude")->capture_default_str();
  sub->add_option("--J2", st.cfg.j2, "Intercell hopping amplitude")->capture_default_str();
  sub->add_option("-o,--output-dir", st.cfg.output_dir, "Output directory")
      ->envname("DTQW_OUTPUT_DIR")
      ->capture_default_str();
  sub->add_option("--threads", st.cfg.threads, "Max worker threads (0 = hardware)")
      ->capture_default_str();
}

void add_j1_grid_options(CLI::App* sub, CliState& st) {
  sub->add_option("--j1-min", st.j1_min, "Sweep grid lower J1")->capture_default_str();
  sub->add_option("--j1-max", st.j1_max, "Sweep grid upper J1")->capture_default_str();
  sub->add_option("--j1-points", st.j1_points, "Number of sweep grid points");
}

void finalize(CliState& st) {
  if (st.initial_site_flag.size() == 2) {
    st.cfg.initial_site = {st.initial_site_flag[0], st.initial_site_flag[1]};
  }
  if (st.j1_points > 0) {
    st.cfg.j1_grid.clear();
    for (int i = 0; i < st.j1_points; ++i) {
      const double t = (st.j1_points == 1) ? 0.0 : static_cast<double>(i) / (st.j1_points - 1);
      st.cfg.j1_grid.push_back(st.j1_min + t * (st.j1_max - st.j1_min));
    }
  }
}

int execute(CliState& st) {
  finalize(st);
  const dtqw::RunManifest manifest = dtqw::run(st.cfg);
  std::cout << dtqw::command_name(st.cfg.command) << ": wrote " << manifest.outputs.size()
            << " file(s) to " << st.cfg.output_dir << " in " << manifest.wall_seconds << " s\n";
  for (const auto& [name, hash] : manifest.outputs) {
    std::cout << "  " << name << "  fnv1a64:" << hash << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliState st;
  CLI::App app{"2D coinless discrete-time quantum walk toolkit"};
  app.set_version_flag("--version", dtqw::kVersion);
  app.set_config("--config", "", "Read options from a config file (flags win)");
  app.require_subcommand(1);

  auto* spectrum = app.add_subcommand(
      "spectrum", "Quasienergy spectrum, state classification and boundary-state distributions");
  add_common_options(spectrum, st);
  spectrum->add_option("--zero-tol", st.cfg.zero_tol, "Zero-mode |E| tolerance")
      ->capture_default_str();
  spectrum->add_option("--dump-step", st.cfg.dump_step_file,
                       "Also dump the dense one-step operator to this CSV file");
  spectrum->callback([&] { st.cfg.command = dtqw::Command::Spectrum; });

  auto* sweep = app.add_subcommand("sweep", "Quasienergy spectra over a J1 grid at fixed J2");
  add_common_options(sweep, st);
  add_j1_grid_options(sweep, st);
  sweep->callback([&] { st.cfg.command = dtqw::Command::Sweep; });

  auto* invariant = app.add_subcommand(
      "invariant", "Nested-Wilson-loop polarizations and the Z2 quadrupole invariant");
  add_common_options(invariant, st);
  invariant->add_option("-N,--k-grid", st.cfg.k_grid, "k-grid intervals per direction")
      ->capture_default_str();
  invariant->add_flag("--raw-overlaps", st.cfg.raw_overlaps,
                      "Multiply raw overlap matrices instead of their polar factors");
  add_j1_grid_options(invariant, st);
  invariant->callback([&] { st.cfg.command = dtqw::Command::Invariant; });

  auto* evolve = app.add_subcommand(
      "evolve", "Multi-step walk: probability snapshots and corner/edge probability curves");
  add_common_options(evolve, st);
  evolve->add_option("--N-max", st.cfg.n_max, "Number of walk steps")->capture_default_str();
  evolve->add_option("--snapshot-steps", st.cfg.snapshot_steps, "Steps to snapshot")
      ->capture_default_str();
  evolve->add_option("--initial-site", st.initial_site_flag, "Walker start site x y")
      ->expected(2);
  evolve->callback([&] { st.cfg.command = dtqw::Command::Evolve; });

  auto* disorder = app.add_subcommand(
      "disorder", "Static-disorder ensemble of the corner/edge probability curve");
  add_common_options(disorder, st);
  disorder->add_option("--N-max", st.cfg.n_max, "Number of walk steps")->capture_default_str();
  disorder->add_option("-W,--W", st.cfg.disorder_strength, "Disorder strength")
      ->capture_default_str();
  disorder->add_option("--realizations", st.cfg.realizations, "Ensemble size")
      ->capture_default_str();
  disorder->add_option("--seed", st.cfg.seed, "Ensemble seed")->capture_default_str();
  disorder->add_option("--region", st.cfg.region, "Probability region: corner | edge")
      ->capture_default_str();
  disorder->add_option("--initial-site", st.initial_site_flag,
                       "Walker start site x y (default: (1,1) corner / (1,2) edge)")
      ->expected(2);
  disorder->callback([&] { st.cfg.command = dtqw::Command::Disorder; });

  auto* layout = app.add_subcommand(
      "layout", "Compile the one-step walk into a verified directional-coupler schedule");
  add_common_options(layout, st);
  layout->callback([&] { st.cfg.command = dtqw::Command::Layout; });

  CLI11_PARSE(app, argc, argv);

  try {
    return execute(st);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

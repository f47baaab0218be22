#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavrsma/ao.hpp"
#include "uavrsma/types.hpp"

namespace uavrsma {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// What varies across the sweep. Trace sweeps the horizon like Slots but is
/// plotted as per-iteration convergence curves instead of a trend line.
enum class SweepAxis { Trace, Users, Antennas, Slots, PMax, Omega };

const char* axis_name(SweepAxis axis);

/// A parsed experiment description: base scenario plus one sweep axis.
/// Sweep values are in the config-file units of the axis key (dBm for
/// p_max_dbm, Mbit for omega_mbit, counts otherwise); they are converted to
/// SI linear units when applied.
struct ExperimentSpec {
  NetworkConfig cfg;
  QoEParams qoe;
  ChannelParams params;
  SweepAxis axis = SweepAxis::Trace;
  std::vector<double> values;
  std::vector<unsigned long> seeds;
  std::string output_dir = "results";
  double square_side_m = 400.0;  // seeded node placement square
  AoOptions ao;
};

/// Parses the sectioned key = value format; throws std::runtime_error naming
/// the offending line on malformed or unknown input.
ExperimentSpec parse_spec(std::istream& is);
ExperimentSpec load_spec(const std::string& path);

/// Returns the list of problems (empty when the spec is runnable), including
/// validate_config failures for every swept scenario.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

/// Applies one sweep value (in axis units) to the scenario.
void apply_sweep_value(const ExperimentSpec& spec, double value, NetworkConfig& cfg,
                       QoEParams& qoe);

struct RunStatus {
  double sweep_value = 0.0;
  unsigned long seed = 0;
  bool ok = false;
  bool solver_failure = false;
  bool converged = false;
  int outer_iters = 0;
  double sum_mos = 0.0;
  double wall_ms = 0.0;
  std::string error;
};

struct ExperimentResult {
  std::vector<RunStatus> runs;
  bool all_ok = true;
  bool any_solver_failure = false;
};

/// Runs the full sweep (worker count from UAVRSMA_WORKERS, default hardware
/// concurrency) and persists history.csv, summary.csv and MANIFEST under
/// spec.output_dir. Result rows are written in (value, seed) order regardless
/// of scheduling, so identical specs produce byte-identical CSVs; wall-clock
/// columns are the one documented exception and live only in history.csv and
/// the MANIFEST. Throws std::invalid_argument when validate_spec fails.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream& log);

/// Reads history.csv / summary.csv from dir and writes summary.svg and
/// trace.svg next to them. Throws std::runtime_error naming the file, row or
/// missing column on malformed input.
void emit_plots(const std::string& dir);

}  // namespace uavrsma

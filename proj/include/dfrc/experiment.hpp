#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfrc/benchmarks.hpp"
#include "dfrc/design.hpp"
#include "dfrc/metrics_comm.hpp"
#include "dfrc/metrics_radar.hpp"

namespace dfrc {

enum class SchemeKind { DfrcNyquist, DfrcOversampled, DirectionalStrict, ZfPowerConstrained };

struct Scheme {
  SchemeKind kind = SchemeKind::DfrcOversampled;
  double papr_db = 3.0;  ///< DFRC only; +inf removes the PAPR constraint
  std::string label;
};

/// Expands comma separated names (dfrc-os, dfrc-ns, directional, zf) into
/// schemes, one DFRC scheme per PAPR threshold. Labels look like
/// `dfrc-os@3dB`, `dfrc-ns@inf`, `directional`, `zf`.
std::vector<Scheme> parse_schemes(const std::string& names, const std::vector<double>& papr_db);

/// Parses a comma separated list of reals; `inf` is accepted.
std::vector<double> parse_list(const std::string& text);

enum class SweepKind { None, Rho, Snr, SnrRadar, PaprEps };
enum class OutputKind { Metrics, Beampattern, PaprCcdf };

struct ExperimentSpec {
  SystemConfig base;
  SweepKind sweep = SweepKind::None;
  std::vector<double> values{0.0};
  std::vector<Scheme> schemes;
  OutputKind output = OutputKind::Metrics;
  int trials = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  int ser_trials = 10;
  std::vector<double> grid_deg;       ///< beampattern angles
  std::vector<double> thresholds_db;  ///< CCDF thresholds
};

/// Applies one sweep value to a config: ρ, SNR (dB), radar SNR (dB) or PAPR (dB).
SystemConfig at_sweep_point(const SystemConfig& base, SweepKind sweep, double value);

/// Channel, symbols and radar benchmark of one Monte Carlo trial. Streams
/// depend only on (seed, trial), so every sweep point and scheme of a trial
/// sees the same realization.
struct TrialContext {
  SystemConfig cfg;
  const OfdmOperators* ops = nullptr;
  ChannelRealization ch;
  SymbolMatrix s;
  CovarianceTemplate tmpl;
  DirectionalResult g0;
};

TrialContext make_trial(const SystemConfig& cfg, const OfdmOperators& ops, std::uint64_t seed, int trial);

struct SchemeOutcome {
  Waveform xs;
  CommReport comm;
  RealVector pd_per_target;
  PaprReport papr_nyquist;
  PaprReport papr_oversampled;
  std::optional<DesignDiagnostics> design;
  double zf_scale = 0.0;
};

/// Builds the waveform of one scheme for the trial and scores it. `rng`
/// drives the SER noise and the randomized extraction seed.
SchemeOutcome run_scheme(const TrialContext& ctx, const Scheme& scheme, const SystemConfig& cfg, int ser_trials,
                         Rng& rng, std::vector<SdpWarmStart>* warm = nullptr);

struct RawRow {
  std::string scheme;
  double sweep_value = 0.0;
  int trial = 0;
  std::string metric;
  double value = 0.0;
};

struct AggregateRow {
  std::string scheme;
  double sweep_value = 0.0;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  int n = 0;
};

struct ExperimentOutput {
  std::vector<RawRow> raw;
  std::vector<AggregateRow> aggregate;
  int attempts = 0;  ///< DFRC designs attempted
  int failures = 0;  ///< DFRC designs that failed and were skipped
  std::vector<std::string> failure_log;

  double failure_rate() const { return attempts ? static_cast<double>(failures) / attempts : 0.0; }
  /// Aggregate lookup; throws std::out_of_range when absent.
  const AggregateRow& at(const std::string& scheme, double sweep_value, const std::string& metric) const;
};

/// Runs every trial (in parallel over `threads`) and aggregates in a fixed
/// order, so the output does not depend on the thread count.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// Means with standard errors (sample standard deviation / √n) per
/// (scheme, sweep value, metric), in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<RawRow>& raw);

inline const char* kLongCsvHeader = "scheme,sweep_value,metric,mean,stderr,n";
inline const char* kRawCsvHeader = "scheme,sweep_value,trial,metric,value";

std::string format_long_csv(const std::vector<AggregateRow>& rows);
std::string format_raw_csv(const std::vector<RawRow>& rows);
/// Writes `<dir>/<name>.csv` and `<dir>/<name>_raw.csv`, creating `dir`.
void write_csvs(const ExperimentOutput& out, const std::string& dir, const std::string& name);

}  // namespace dfrc

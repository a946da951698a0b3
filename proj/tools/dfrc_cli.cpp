#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "dfrc/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::string config;
  std::string out = "out";
  int trials = 0;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string scheme;
  std::string papr_db = "3";
  std::string rho;
  std::string snr_db;
  int ser_trials = 10;
};

void add_common(CLI::App* sub, Common& c, bool sweep_flags = true) {
  sub->add_option("--config", c.config, "key = value scenario file (reference defaults when omitted)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--scheme", c.scheme, "comma list of dfrc-os, dfrc-ns, directional, zf");
  sub->add_option("--papr-db", c.papr_db, "PAPR thresholds in dB for DFRC schemes (inf allowed)")
      ->capture_default_str();
  if (sweep_flags) {
    sub->add_option("--rho", c.rho, "comma list of weighting factors");
    sub->add_option("--snr-db", c.snr_db, "comma list of communication SNRs in dB");
  }
  sub->add_option("--ser-trials", c.ser_trials, "noise draws per SER estimate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::vector<double> step_list(double lo, double hi, double step) {
  std::vector<double> v;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) v.push_back(lo + i * step);
  return v;
}

dfrc::ExperimentSpec make_spec(const Common& c, const std::string& default_schemes, int default_trials) {
  dfrc::ExperimentSpec spec;
  spec.base = c.config.empty() ? dfrc::SystemConfig{} : dfrc::validate_config(c.config);
  spec.base.validate();
  spec.schemes = dfrc::parse_schemes(c.scheme.empty() ? default_schemes : c.scheme, dfrc::parse_list(c.papr_db));
  spec.trials = c.trials > 0 ? c.trials : default_trials;
  spec.seed = c.seed;
  spec.threads = c.threads;
  spec.ser_trials = c.ser_trials;
  return spec;
}

int finish(const dfrc::ExperimentOutput& out, const Common& c, const std::string& name) {
  dfrc::write_csvs(out, c.out, name);
  for (const auto& line : out.failure_log) std::cerr << "skipped: " << line << "\n";
  std::printf("wrote %s/%s.csv (%zu rows) and %s_raw.csv (%zu rows)\n", c.out.c_str(), name.c_str(),
              out.aggregate.size(), name.c_str(), out.raw.size());
  if (out.attempts > 0)
    std::printf("designs: %d attempted, %d failed (%.1f%%)\n", out.attempts, out.failures, 100.0 * out.failure_rate());
  return out.failure_rate() > 0.5 ? kExitSolver : kExitOk;
}

int run_design(const Common& c) {
  dfrc::ExperimentSpec spec = make_spec(c, "dfrc-os", 1);
  if (!c.rho.empty()) {
    const auto rho = dfrc::parse_list(c.rho);
    if (rho.size() != 1) throw CLI::ValidationError("--rho", "design takes a single value");
    spec.base.rho = rho[0];
  }
  if (!c.snr_db.empty()) {
    const auto snr = dfrc::parse_list(c.snr_db);
    if (snr.size() != 1) throw CLI::ValidationError("--snr-db", "design takes a single value");
    spec.base.noise_var = dfrc::db_to_linear(-snr[0]);
  }
  spec.base.validate();
  const dfrc::OfdmOperators ops = dfrc::build_operators(spec.base);
  const dfrc::TrialContext ctx = dfrc::make_trial(spec.base, ops, spec.seed, 0);
  int failures = 0;
  int attempts = 0;
  for (const auto& scheme : spec.schemes) {
    dfrc::Rng rng = dfrc::Rng::stream(spec.seed, {0, 2});
    const bool dfrc_scheme =
        scheme.kind == dfrc::SchemeKind::DfrcNyquist || scheme.kind == dfrc::SchemeKind::DfrcOversampled;
    attempts += dfrc_scheme;
    try {
      const dfrc::SchemeOutcome oc = dfrc::run_scheme(ctx, scheme, spec.base, spec.ser_trials, rng);
      std::printf("%s  rho=%g\n", scheme.label.c_str(), spec.base.rho);
      if (oc.design) {
        const auto& d = *oc.design;
        std::printf("  col  status    iters  eig_ratio  sdp_obj       obj           randomized\n");
        for (std::size_t l = 0; l < d.columns.size(); ++l) {
          const auto& col = d.columns[l];
          std::printf("  %-4zu %-9s %-6d %-10.6f %-13.6g %-13.6g %s\n", l, dfrc::to_string(col.status),
                      col.iterations, col.eig_ratio, col.sdp_objective, col.objective, col.randomized ? "yes" : "no");
        }
        std::printf("  objective %.6g, max-iter hits %d, randomized %d, min eig ratio %.6f\n", d.objective,
                    d.max_iters_hits, d.randomized, d.min_eig_ratio);
      }
      if (scheme.kind == dfrc::SchemeKind::ZfPowerConstrained) std::printf("  zf scale %.6g\n", oc.zf_scale);
      std::printf("  mui %.6g  rate %.6g b/s/Hz  ser %.6g  pd %.6g\n", oc.comm.mui, oc.comm.avg_rate, oc.comm.ser,
                  oc.pd_per_target.mean());
      std::printf("  papr nyquist %.4f dB  oversampled x%d %.4f dB\n", oc.papr_nyquist.papr_db,
                  oc.papr_oversampled.oversample, oc.papr_oversampled.papr_db);
    } catch (const dfrc::DesignError& e) {
      ++failures;
      std::fprintf(stderr, "%s: design failed: %s\n", scheme.label.c_str(), e.what());
    }
  }
  if (!c.out.empty() && c.trials > 0) {
    spec.sweep = dfrc::SweepKind::None;
    spec.values = {0.0};
    return finish(dfrc::run_experiment(spec), c, "design");
  }
  return attempts > 0 && 2 * failures > attempts ? kExitSolver : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-PAPR DFRC MIMO-OFDM waveform design and evaluation"};
  app.require_subcommand(1);

  Common c;
  auto* design = app.add_subcommand("design", "design one waveform per scheme and print diagnostics");
  auto* sweep_rho = app.add_subcommand("sweep-rho", "metrics against the weighting factor");
  auto* sweep_snr = app.add_subcommand("sweep-snr", "metrics against the communication SNR");
  auto* beam = app.add_subcommand("beampattern", "average beampattern against angle");
  auto* ccdf = app.add_subcommand("papr-ccdf", "PAPR CCDF at Nyquist rate and oversampled");
  auto* tradeoff = app.add_subcommand("tradeoff", "rate/SER against detection probability over a fine rho grid");
  auto* validate = app.add_subcommand("validate", "check a config file and print the resolved values");
  for (auto* sub : {design, sweep_rho, sweep_snr, beam, ccdf, tradeoff}) add_common(sub, c);
  validate->add_option("--config", c.config, "key = value scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate) {
      const dfrc::SystemConfig cfg = dfrc::validate_config(c.config);
      std::printf("ok: n_tx=%d n_sub=%d n_cp=%d n_users=%d n_taps=%d frame_len=%d p_total=%g papr_db=%g rho=%g "
                  "oversample=%d noise_var=%g snr_radar_db=%g pfa=%g targets=%d\n",
                  cfg.n_tx, cfg.n_sub, cfg.n_cp, cfg.n_users, cfg.n_taps, cfg.frame_len, cfg.p_total,
                  dfrc::linear_to_db(cfg.papr_eps), cfg.rho, cfg.oversample, cfg.noise_var,
                  dfrc::linear_to_db(cfg.snr_radar), cfg.pfa, cfg.n_targets());
      return kExitOk;
    }
    if (*design) return run_design(c);

    const std::string all = "dfrc-os,directional,zf";
    dfrc::ExperimentSpec spec;
    std::string name;
    if (*sweep_rho || *tradeoff) {
      spec = make_spec(c, all, 100);
      spec.sweep = dfrc::SweepKind::Rho;
      spec.values = !c.rho.empty() ? dfrc::parse_list(c.rho)
                    : *tradeoff    ? step_list(0.0, 1.0, 0.1)
                                   : std::vector<double>{0.01, 0.2, 0.4, 0.6, 0.8, 0.99};
      name = *tradeoff ? "tradeoff" : "sweep_rho";
      if (!c.snr_db.empty()) {
        const auto snr = dfrc::parse_list(c.snr_db);
        if (snr.size() != 1) throw CLI::ValidationError("--snr-db", "takes a single value here");
        spec.base.noise_var = dfrc::db_to_linear(-snr[0]);
      }
    } else if (*sweep_snr) {
      spec = make_spec(c, all, 100);
      spec.sweep = dfrc::SweepKind::Snr;
      spec.values = !c.snr_db.empty() ? dfrc::parse_list(c.snr_db) : step_list(-5.0, 20.0, 2.5);
      name = "sweep_snr";
    } else {
      spec = make_spec(c, all, *ccdf ? 100 : 20);
      spec.sweep = dfrc::SweepKind::None;
      spec.values = {0.0};
      spec.output = *ccdf ? dfrc::OutputKind::PaprCcdf : dfrc::OutputKind::Beampattern;
      name = *ccdf ? "papr_ccdf" : "beampattern";
    }
    if (spec.sweep != dfrc::SweepKind::Rho && !c.rho.empty()) {
      const auto rho = dfrc::parse_list(c.rho);
      if (rho.size() != 1) throw CLI::ValidationError("--rho", "takes a single value here");
      spec.base.rho = rho[0];
    }
    if (spec.sweep != dfrc::SweepKind::Snr && spec.sweep != dfrc::SweepKind::Rho && !c.snr_db.empty()) {
      const auto snr = dfrc::parse_list(c.snr_db);
      if (snr.size() != 1) throw CLI::ValidationError("--snr-db", "takes a single value here");
      spec.base.noise_var = dfrc::db_to_linear(-snr[0]);
    }
    spec.base.validate();
    return finish(dfrc::run_experiment(spec), c, name);
  } catch (const dfrc::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& msg : e.errors()) std::cerr << "  " << msg << "\n";
    return kExitConfig;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

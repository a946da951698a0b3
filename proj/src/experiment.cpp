#include "dfrc/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

#include "dfrc/parallel.hpp"

namespace dfrc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool is_dfrc(SchemeKind k) { return k == SchemeKind::DfrcNyquist || k == SchemeKind::DfrcOversampled; }

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "inf" || item == "none") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw std::invalid_argument("invalid number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<Scheme> parse_schemes(const std::string& names, const std::vector<double>& papr_db) {
  std::vector<Scheme> out;
  std::stringstream ss(names);
  std::string name;
  while (std::getline(ss, name, ',')) {
    name = trim(name);
    if (name.empty()) continue;
    if (name == "dfrc-os" || name == "dfrc-ns") {
      if (papr_db.empty()) throw std::invalid_argument("DFRC schemes need at least one PAPR threshold");
      for (double db : papr_db) {
        if (!(db >= 0.0)) throw std::invalid_argument("PAPR thresholds must be >= 0 dB");
        Scheme s;
        s.kind = name == "dfrc-os" ? SchemeKind::DfrcOversampled : SchemeKind::DfrcNyquist;
        s.papr_db = db;
        s.label = name + "@" + (std::isinf(db) ? std::string("inf") : fmt(db) + "dB");
        out.push_back(s);
      }
    } else if (name == "directional") {
      out.push_back({SchemeKind::DirectionalStrict, std::numeric_limits<double>::infinity(), name});
    } else if (name == "zf") {
      out.push_back({SchemeKind::ZfPowerConstrained, std::numeric_limits<double>::infinity(), name});
    } else {
      throw std::invalid_argument("unknown scheme '" + name + "' (expected dfrc-os, dfrc-ns, directional, zf)");
    }
  }
  if (out.empty()) throw std::invalid_argument("no schemes selected");
  return out;
}

SystemConfig at_sweep_point(const SystemConfig& base, SweepKind sweep, double value) {
  SystemConfig cfg = base;
  switch (sweep) {
    case SweepKind::None: break;
    case SweepKind::Rho: cfg.rho = value; break;
    case SweepKind::Snr: cfg.noise_var = db_to_linear(-value); break;
    case SweepKind::SnrRadar: cfg.snr_radar = db_to_linear(value); break;
    case SweepKind::PaprEps: cfg.papr_eps = std::isinf(value) ? value : db_to_linear(value); break;
  }
  return cfg;
}

TrialContext make_trial(const SystemConfig& cfg, const OfdmOperators& ops, std::uint64_t seed, int trial) {
  TrialContext ctx;
  ctx.cfg = cfg;
  ctx.ops = &ops;
  Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(trial)});
  ctx.ch = sample_channel(cfg, rng);
  ctx.s = sample_symbols(cfg, rng);
  ctx.tmpl = build_rd(cfg);
  ctx.g0 = directional_benchmark(ctx.ch, ops, ctx.s, ctx.tmpl);
  return ctx;
}

namespace {

struct Built {
  Waveform xs;
  std::optional<DesignDiagnostics> design;
  double zf_scale = 0.0;
};

Built build_waveform(const TrialContext& ctx, const Scheme& scheme, const SystemConfig& cfg, std::uint64_t seed,
                     std::vector<SdpWarmStart>* warm) {
  const OfdmOperators& ops = *ctx.ops;
  Built b;
  switch (scheme.kind) {
    case SchemeKind::DirectionalStrict:
      b.xs = to_freq_domain(ops, ctx.g0.g0);
      break;
    case SchemeKind::ZfPowerConstrained: {
      ZfResult zf = zf_waveform(ctx.ch, ops, ctx.s, cfg);
      b.xs = std::move(zf.xs);
      b.zf_scale = zf.scale;
      break;
    }
    case SchemeKind::DfrcNyquist:
    case SchemeKind::DfrcOversampled: {
      SystemConfig local = cfg;
      local.papr_eps = std::isinf(scheme.papr_db) ? scheme.papr_db : db_to_linear(scheme.papr_db);
      const PaprConstraint mode =
          scheme.kind == SchemeKind::DfrcNyquist ? PaprConstraint::Nyquist : PaprConstraint::Oversampled;
      const DesignProblem prob = build_problem(ctx.ch, ops, ctx.s, ctx.g0.g0, local, mode);
      DesignOptions opts;
      opts.seed = seed;
      opts.warm = warm;
      DesignResult res = design_waveform(prob, ops, local, opts);
      b.xs = std::move(res.xs);
      b.design = std::move(res.diagnostics);
      break;
    }
  }
  return b;
}

void score(const TrialContext& ctx, const SystemConfig& cfg, int ser_trials, Rng& rng, SchemeOutcome& out) {
  const OfdmOperators& ops = *ctx.ops;
  out.comm = sinr_and_rate(ctx.ch, out.xs, ctx.s, cfg.noise_var);
  out.comm.ser = ser_montecarlo(ctx.ch, out.xs, ctx.s, cfg.noise_var, ser_trials, rng);
  const Waveform g = to_time_domain(ops, out.xs);
  out.pd_per_target.resize(cfg.n_targets());
  for (int m = 0; m < cfg.n_targets(); ++m)
    out.pd_per_target(m) = detection_probability(cfg, g, cfg.target_angles[m]);
  out.papr_nyquist = papr_nyquist(ops, out.xs);
  out.papr_oversampled = papr_oversampled(ops, out.xs);
}

}  // namespace

SchemeOutcome run_scheme(const TrialContext& ctx, const Scheme& scheme, const SystemConfig& cfg, int ser_trials,
                         Rng& rng, std::vector<SdpWarmStart>* warm) {
  Built b = build_waveform(ctx, scheme, cfg, rng.engine()(), warm);
  SchemeOutcome out;
  out.xs = std::move(b.xs);
  out.design = std::move(b.design);
  out.zf_scale = b.zf_scale;
  score(ctx, cfg, ser_trials, rng, out);
  return out;
}

const AggregateRow& ExperimentOutput::at(const std::string& scheme, double sweep_value, const std::string& metric) const {
  for (const auto& r : aggregate)
    if (r.scheme == scheme && r.metric == metric &&
        (r.sweep_value == sweep_value || std::abs(r.sweep_value - sweep_value) <= 1e-12 * (1.0 + std::abs(sweep_value))))
      return r;
  throw std::out_of_range("no aggregate for " + scheme + "/" + fmt(sweep_value) + "/" + metric);
}

std::vector<AggregateRow> aggregate(const std::vector<RawRow>& raw) {
  std::vector<AggregateRow> out;
  std::vector<std::vector<double>> samples;
  std::map<std::tuple<std::string, double, std::string>, std::size_t> index;
  for (const auto& r : raw) {
    const auto key = std::make_tuple(r.scheme, r.sweep_value, r.metric);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.scheme, r.sweep_value, r.metric, 0.0, 0.0, 0});
      samples.emplace_back();
    }
    samples[it->second].push_back(r.value);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& x = samples[i];
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    out[i].mean = mean;
    out[i].std_error = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out[i].n = static_cast<int>(x.size());
  }
  return out;
}

namespace {

struct KeyedRow {
  int scheme = 0;
  int point = 0;
  int metric = 0;
  RawRow row;
};

struct TrialOutput {
  std::vector<KeyedRow> rows;
  int attempts = 0;
  int failures = 0;
  std::vector<std::string> log;
};

const std::vector<std::string>& metric_order() {
  static const std::vector<std::string> names = {"mui",        "rate",          "ser",        "pd",
                                                 "papr_db",    "papr_os_db",    "bp_mse_dir", "min_eig_ratio",
                                                 "randomized", "beampattern",   "ccdf_nyquist", "ccdf_os"};
  return names;
}

int metric_index(const std::string& m) {
  const auto& names = metric_order();
  return static_cast<int>(std::find(names.begin(), names.end(), m) - names.begin());
}

TrialOutput run_trial(const ExperimentSpec& spec, const OfdmOperators& ops, const std::vector<double>& grid_rad,
                      int trial) {
  TrialOutput out;
  const TrialContext ctx = make_trial(spec.base, ops, spec.seed, trial);
  const RealVector bp_dir = beampattern(spec.base.n_tx, ctx.g0.g0, grid_rad);
  std::vector<std::vector<SdpWarmStart>> warm(spec.schemes.size());
  std::map<std::tuple<int, double, double>, Built> cache;

  auto emit = [&](int si, int pi, double sweep_value, const std::string& metric, double value) {
    out.rows.push_back({si, pi, metric_index(metric), {spec.schemes[si].label, sweep_value, trial, metric, value}});
  };

  const auto n_points = static_cast<int>(spec.values.size());
  for (int pi = 0; pi < n_points; ++pi) {
    const double value = spec.values[pi];
    const SystemConfig cfg = at_sweep_point(spec.base, spec.sweep, value);
    Rng noise = Rng::stream(spec.seed, {static_cast<std::uint64_t>(trial), 1, static_cast<std::uint64_t>(pi)});
    for (int si = 0; si < static_cast<int>(spec.schemes.size()); ++si) {
      Scheme scheme = spec.schemes[si];
      if (spec.sweep == SweepKind::PaprEps && is_dfrc(scheme.kind)) scheme.papr_db = value;
      const bool dfrc = is_dfrc(scheme.kind);
      const auto key = std::make_tuple(si, dfrc ? cfg.rho : 0.0, dfrc ? scheme.papr_db : 0.0);
      auto it = cache.find(key);
      if (it == cache.end()) {
        out.attempts += dfrc;
        try {
          const std::uint64_t design_seed =
              Rng::stream(spec.seed, {static_cast<std::uint64_t>(trial), 2, static_cast<std::uint64_t>(si)}).seed();
          it = cache.emplace(key, build_waveform(ctx, scheme, cfg, design_seed, dfrc ? &warm[si] : nullptr)).first;
        } catch (const std::exception& e) {
          out.failures += dfrc;
          out.log.push_back("trial " + std::to_string(trial) + ", " + scheme.label + ", sweep value " + fmt(value) +
                            ": " + e.what());
          continue;
        }
      }
      SchemeOutcome oc;
      oc.xs = it->second.xs;
      oc.design = it->second.design;
      oc.zf_scale = it->second.zf_scale;
      Rng scheme_noise = noise.split(static_cast<std::uint64_t>(si));
      score(ctx, cfg, spec.ser_trials, scheme_noise, oc);
      const Waveform g = to_time_domain(ops, oc.xs);

      switch (spec.output) {
        case OutputKind::Metrics: {
          const RealVector bp = beampattern(cfg.n_tx, g, grid_rad);
          emit(si, pi, value, "mui", oc.comm.mui);
          emit(si, pi, value, "rate", oc.comm.avg_rate);
          emit(si, pi, value, "ser", oc.comm.ser);
          emit(si, pi, value, "pd", oc.pd_per_target.mean());
          emit(si, pi, value, "papr_db", oc.papr_nyquist.papr_db);
          emit(si, pi, value, "papr_os_db", oc.papr_oversampled.papr_db);
          emit(si, pi, value, "bp_mse_dir", (bp - bp_dir).squaredNorm() / static_cast<double>(bp.size()));
          if (oc.design) {
            const auto& d = *oc.design;
            emit(si, pi, value, "min_eig_ratio", d.min_eig_ratio);
            emit(si, pi, value, "randomized", static_cast<double>(d.randomized) / d.columns.size());
          }
          break;
        }
        case OutputKind::Beampattern: {
          const RealVector bp = beampattern(cfg.n_tx, g, grid_rad);
          for (Eigen::Index a = 0; a < bp.size(); ++a) emit(si, static_cast<int>(a), spec.grid_deg[a], "beampattern", bp(a));
          break;
        }
        case OutputKind::PaprCcdf: {
          const auto ccdf_n = papr_ccdf({oc.papr_nyquist}, spec.thresholds_db);
          const auto ccdf_o = papr_ccdf({oc.papr_oversampled}, spec.thresholds_db);
          for (std::size_t t = 0; t < spec.thresholds_db.size(); ++t) {
            emit(si, static_cast<int>(t), spec.thresholds_db[t], "ccdf_nyquist", ccdf_n[t]);
            emit(si, static_cast<int>(t), spec.thresholds_db[t], "ccdf_os", ccdf_o[t]);
          }
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  spec.base.validate();
  if (spec.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  if (spec.values.empty()) throw std::invalid_argument("run_experiment: empty sweep");
  if (spec.schemes.empty()) throw std::invalid_argument("run_experiment: no schemes");
  if (spec.output != OutputKind::Metrics && spec.values.size() != 1)
    throw std::invalid_argument("run_experiment: beampattern and CCDF outputs take a single sweep point");
  for (double v : spec.values) at_sweep_point(spec.base, spec.sweep, v).validate();

  std::vector<double> grid_deg = spec.grid_deg;
  if (grid_deg.empty())
    for (int a = -90; a <= 90; ++a) grid_deg.push_back(a);
  ExperimentSpec local = spec;
  local.grid_deg = grid_deg;
  if (local.output == OutputKind::PaprCcdf && local.thresholds_db.empty())
    for (int i = 0; i <= 60; ++i) local.thresholds_db.push_back(0.25 * i);
  std::vector<double> grid_rad;
  for (double d : grid_deg) grid_rad.push_back(d * kPi / 180.0);

  const OfdmOperators ops = build_operators(spec.base);
  std::vector<TrialOutput> per_trial(spec.trials);
  parallel_for(spec.trials, spec.threads, [&](int t) { per_trial[t] = run_trial(local, ops, grid_rad, t); });

  ExperimentOutput out;
  std::vector<KeyedRow> rows;
  for (auto& t : per_trial) {
    out.attempts += t.attempts;
    out.failures += t.failures;
    for (auto& l : t.log) out.failure_log.push_back(std::move(l));
    for (auto& r : t.rows) rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const KeyedRow& a, const KeyedRow& b) {
    return std::tie(a.scheme, a.point, a.metric, a.row.trial) < std::tie(b.scheme, b.point, b.metric, b.row.trial);
  });
  out.raw.reserve(rows.size());
  for (auto& r : rows) out.raw.push_back(std::move(r.row));
  out.aggregate = dfrc::aggregate(out.raw);
  return out;
}

std::string format_long_csv(const std::vector<AggregateRow>& rows) {
  std::string s = std::string(kLongCsvHeader) + "\n";
  for (const auto& r : rows)
    s += r.scheme + "," + fmt(r.sweep_value) + "," + r.metric + "," + fmt(r.mean) + "," + fmt(r.std_error) + "," +
         std::to_string(r.n) + "\n";
  return s;
}

std::string format_raw_csv(const std::vector<RawRow>& rows) {
  std::string s = std::string(kRawCsvHeader) + "\n";
  for (const auto& r : rows)
    s += r.scheme + "," + fmt(r.sweep_value) + "," + std::to_string(r.trial) + "," + r.metric + "," + fmt(r.value) +
         "\n";
  return s;
}

void write_csvs(const ExperimentOutput& out, const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto write = [](const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << body;
    if (!f) throw std::runtime_error("write failed for " + p.string());
  };
  write(std::filesystem::path(dir) / (name + ".csv"), format_long_csv(out.aggregate));
  write(std::filesystem::path(dir) / (name + "_raw.csv"), format_raw_csv(out.raw));
}

}  // namespace dfrc

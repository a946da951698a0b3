#include "dfrc/design.hpp"

#include "dfrc/parallel.hpp"

namespace dfrc {

const char* to_string(PaprConstraint m) {
  switch (m) {
    case PaprConstraint::None: return "none";
    case PaprConstraint::Nyquist: return "nyquist";
    case PaprConstraint::Oversampled: return "oversampled";
  }
  return "unknown";
}

double DesignProblem::objective(const ComplexMatrix& g) const {
  require_dims(g.rows() == dim() && g.cols() == frame_len(), "DesignProblem::objective: frame shape");
  return (a_mat * g - b_mat).squaredNorm();
}

DesignProblem build_problem(const ChannelRealization& ch, const OfdmOperators& ops, const SymbolMatrix& s,
                            const Waveform& g0, const SystemConfig& cfg, PaprConstraint mode) {
  require_dims(g0.view == WaveformView::PostIdft, "build_problem: G0 must be post-IDFT");
  require_dims(g0.data.rows() == ops.dim() && g0.data.cols() == s.data.cols(), "build_problem: G0 shape");
  require_dims(ch.h_d.rows() == s.data.rows() && ch.h_d.cols() == ops.dim(), "build_problem: channel shape");
  if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) throw std::invalid_argument("build_problem: rho must lie in [0, 1]");
  const double s_norm = s.data.norm();
  const double g0_norm = g0.data.norm();
  if (s_norm == 0.0) throw std::invalid_argument("build_problem: symbol matrix is zero");
  if (g0_norm == 0.0) throw std::invalid_argument("build_problem: radar benchmark is zero");

  const int d = ops.dim();
  const auto rows_c = ch.h_d.rows();
  const double wc = std::sqrt(cfg.rho) / s_norm;
  const double wr = std::sqrt(1.0 - cfg.rho) / g0_norm;

  DesignProblem prob;
  prob.a_mat.resize(rows_c + d, d);
  prob.a_mat << wc * ch.h_d, wr * ComplexMatrix::Identity(d, d);
  prob.b_mat.resize(rows_c + d, s.data.cols());
  prob.b_mat << wc * s.data, wr * g0.data;
  prob.aha = prob.a_mat.adjoint() * prob.a_mat;
  prob.ahb = prob.a_mat.adjoint() * prob.b_mat;
  prob.rho = cfg.rho;
  prob.papr_rhs = cfg.papr_rhs();
  prob.cap_margin = cfg.solver.cap_margin;
  prob.p_sym_per_col = cfg.p_sym();
  prob.p_cp_per_col = cfg.p_cp();
  prob.papr_mode = std::isinf(cfg.papr_eps) ? PaprConstraint::None : mode;
  prob.oversample = ops.oversample;
  prob.n_tx = ops.n_tx;
  if (prob.papr_mode == PaprConstraint::Oversampled) {
    prob.theta_map = ops.theta;
    prob.theta_factor = ops.f_os_tilde.adjoint() * ops.f_s;
  }
  prob.cp_mask = ops.cp_mask();
  prob.s_norm = s_norm;
  prob.g0_norm = g0_norm;
  return prob;
}

namespace {

ComplexMatrix diagonal_selector(const Eigen::Array<bool, Eigen::Dynamic, 1>& mask, int n) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    if (mask(i)) e(i, i) = 1.0;
  return e;
}

void add_constraints(SdpProblem& p, const Eigen::Array<bool, Eigen::Dynamic, 1>& cp_mask, double p_total,
                     double p_cp, PaprConstraint mode, double bound, const ComplexMatrix* cap_map,
                     const ComplexMatrix* kron_factor = nullptr, int kron_inner = 0) {
  const int n = p.dim();
  const int d = n - 1;
  p.equalities.push_back({ComplexMatrix::Identity(n, n), p_total + 1.0});
  if (cp_mask.any()) p.equalities.push_back({diagonal_selector(cp_mask, n), p_cp});
  ComplexMatrix corner = ComplexMatrix::Zero(n, n);
  corner(d, d) = 1.0;
  p.equalities.push_back({std::move(corner), 1.0});

  if (mode == PaprConstraint::Nyquist) {
    DiagCaps caps;
    caps.index.resize(d);
    for (int i = 0; i < d; ++i) caps.index[i] = i;
    caps.bound = bound;
    p.diag_caps = std::move(caps);
  } else if (mode == PaprConstraint::Oversampled) {
    Rank1Caps caps;
    caps.vectors = ComplexMatrix::Zero(n, cap_map->rows());
    caps.vectors.topRows(d) = cap_map->adjoint();
    caps.bound = bound;
    if (kron_factor) {
      caps.kron_factor = *kron_factor;
      caps.kron_inner = kron_inner;
    }
    p.general_caps = std::move(caps);
  }
}

Eigen::Array<bool, Eigen::Dynamic, 1> tile(const Eigen::Array<bool, Eigen::Dynamic, 1>& m, int times) {
  Eigen::Array<bool, Eigen::Dynamic, 1> out(m.size() * times);
  for (int t = 0; t < times; ++t) out.segment(t * m.size(), m.size()) = m;
  return out;
}

ComplexMatrix block_diag_theta(const ComplexMatrix& theta, int times) {
  return kron(ComplexMatrix::Identity(times, times), theta);
}

}  // namespace

SdpProblem lift_snapshot(const DesignProblem& prob, int l) {
  require_dims(l >= 0 && l < prob.frame_len(), "lift_snapshot: column index out of range");
  const int d = prob.dim();
  SdpProblem p;
  p.q.resize(d + 1, d + 1);
  p.q.topLeftCorner(d, d) = prob.aha;
  p.q.topRightCorner(d, 1) = -prob.ahb.col(l);
  p.q.bottomLeftCorner(1, d) = -prob.ahb.col(l).adjoint();
  p.q(d, d) = prob.b_mat.col(l).squaredNorm();
  add_constraints(p, prob.cp_mask, prob.p_sym_per_col, prob.p_cp_per_col, prob.papr_mode,
                  prob.papr_rhs * (1.0 - prob.cap_margin), prob.theta_map ? &*prob.theta_map : nullptr,
                  prob.theta_factor ? &*prob.theta_factor : nullptr,
                  prob.n_tx);
  return p;
}

SdpProblem lift_full(const DesignProblem& prob) {
  const int d = prob.dim();
  const int frame = prob.frame_len();
  const int n = d * frame + 1;
  SdpProblem p;
  p.q = ComplexMatrix::Zero(n, n);
  for (int l = 0; l < frame; ++l) {
    p.q.block(l * d, l * d, d, d) = prob.aha;
    p.q.block(l * d, n - 1, d, 1) = -prob.ahb.col(l);
    p.q.block(n - 1, l * d, 1, d) = -prob.ahb.col(l).adjoint();
  }
  p.q(n - 1, n - 1) = prob.b_mat.squaredNorm();
  ComplexMatrix theta_full;
  if (prob.theta_map) theta_full = block_diag_theta(*prob.theta_map, frame);
  add_constraints(p, tile(prob.cp_mask, frame), frame * prob.p_sym_per_col, frame * prob.p_cp_per_col,
                  prob.papr_mode, prob.papr_rhs * (1.0 - prob.cap_margin), prob.theta_map ? &theta_full : nullptr);
  return p;
}

namespace {

FeasibleSet make_set(const DesignProblem& prob, int times) {
  FeasibleSet set;
  set.cp_mask = tile(prob.cp_mask, times);
  set.p_total = times * prob.p_sym_per_col;
  set.p_cp = times * prob.p_cp_per_col;
  if (prob.papr_mode == PaprConstraint::None) return set;
  // DC tone with equal antenna powers: constant envelope at every oversampling
  // factor, CP block power N_c/N_s of the symbol power.
  set.anchor = ComplexVector::Constant(set.cp_mask.size(), std::sqrt(prob.p_sym_per_col / prob.dim()));
  set.cap_bound = prob.papr_rhs;
  if (prob.papr_mode == PaprConstraint::Oversampled) {
    ComplexMatrix c = block_diag_theta(*prob.theta_map, times);
    set.cap_pinv = (c.adjoint() * c).ldlt().solve(c.adjoint());
    set.cap_map = std::move(c);
  }
  return set;
}

double block_power(const FeasibleSet& set, const ComplexVector& g, bool cp) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (set.cp_mask(i) == cp) acc += std::norm(g(i));
  return acc;
}

RealVector cap_levels(const FeasibleSet& set, const ComplexVector& g) {
  if (set.cap_map) return (*set.cap_map * g).cwiseAbs2();
  return g.cwiseAbs2();
}

constexpr int kInnerClips = 5;

double lifted_objective(const SdpProblem& p, const ComplexVector& g) {
  ComplexVector gh(g.size() + 1);
  gh << g, 1.0;
  return (gh.adjoint() * p.q * gh)(0, 0).real();
}

}  // namespace

void clip_caps(const FeasibleSet& set, ComplexVector& g, double level) {
  auto shrink = [level](cdouble z) {
    const double m = std::abs(z);
    return m * m > level ? z * (std::sqrt(level) / m) : z;
  };
  if (!set.cap_map) {
    g = g.unaryExpr(shrink);
    return;
  }
  const ComplexVector z = *set.cap_map * g;
  const ComplexVector zc = z.unaryExpr(shrink);
  g += *set.cap_pinv * (zc - z);
}

FeasibleSet snapshot_feasible_set(const DesignProblem& prob) { return make_set(prob, 1); }
FeasibleSet frame_feasible_set(const DesignProblem& prob) { return make_set(prob, prob.frame_len()); }

FeasibilityCheck check_feasible(const FeasibleSet& set, const ComplexVector& g) {
  require_dims(g.size() == set.dim(), "check_feasible: vector size");
  FeasibilityCheck out;
  const double total = g.squaredNorm();
  const double cp = block_power(set, g, true);
  const double e_total = std::abs(total - set.p_total) / std::max(set.p_total, 1e-300);
  const double e_cp = set.p_cp > 0.0 ? std::abs(cp - set.p_cp) / set.p_cp : cp;
  out.power_error = std::max(e_total, e_cp);
  if (std::isfinite(set.cap_bound)) out.cap_excess = std::max(0.0, cap_levels(set, g).maxCoeff() / set.cap_bound - 1.0);
  return out;
}

void rescale_powers(const FeasibleSet& set, ComplexVector& g) {
  const double targets[2] = {set.p_total - set.p_cp, set.p_cp};
  for (int cp = 0; cp < 2; ++cp) {
    const double have = block_power(set, g, cp == 1);
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < g.size(); ++i) count += set.cp_mask(i) == (cp == 1);
    if (count == 0) continue;
    if (have > 0.0) {
      const double f = std::sqrt(targets[cp] / have);
      for (Eigen::Index i = 0; i < g.size(); ++i)
        if (set.cp_mask(i) == (cp == 1)) g(i) *= f;
    } else {
      const double m = std::sqrt(targets[cp] / static_cast<double>(count));
      for (Eigen::Index i = 0; i < g.size(); ++i)
        if (set.cp_mask(i) == (cp == 1)) g(i) = m;
    }
  }
}

bool repair(const FeasibleSet& set, ComplexVector& g, int passes) {
  if (!std::isfinite(set.cap_bound)) {
    rescale_powers(set, g);
    return check_feasible(set, g).ok();
  }
  const ComplexVector start = g;
  for (int k = 0;; ++k) {
    rescale_powers(set, g);
    if (check_feasible(set, g).ok()) return true;
    if (k >= passes) break;
    const double level = set.cap_bound * (1.0 - 0.5 * (k + 1) / passes);
    for (int inner = 0; inner < kInnerClips; ++inner) {
      clip_caps(set, g, level);
      if (cap_levels(set, g).maxCoeff() <= level) break;
    }
  }
  if (!set.anchor) return false;

  const cdouble align = set.anchor->dot(start);
  const ComplexVector anchor = std::abs(align) > 0.0 ? ComplexVector(*set.anchor * (align / std::abs(align)))
                                                     : *set.anchor;
  auto blend = [&](double t) {
    ComplexVector b = (1.0 - t) * start + t * anchor;
    rescale_powers(set, b);
    return b;
  };
  ComplexVector b = blend(1.0);
  if (!check_feasible(set, b).ok()) return false;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    ComplexVector c = blend(mid);
    if (check_feasible(set, c).ok()) {
      hi = mid;
      b = std::move(c);
    } else {
      lo = mid;
    }
  }
  g = std::move(b);
  return true;
}

Extraction extract_rank1(const SdpSolution& sol, const SdpProblem& p, const FeasibleSet& set,
                         const SolverSettings& settings, Rng& rng) {
  if (sol.status == SdpStatus::Infeasible) throw std::invalid_argument("extract_rank1: solution is infeasible");
  const int n = p.dim();
  const int d = n - 1;
  require_dims(sol.g_hat.rows() == n && set.dim() == d, "extract_rank1: dimension mismatch");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (sol.g_hat + sol.g_hat.adjoint()));
  const RealVector lam = es.eigenvalues().cwiseMax(0.0);
  const double total = lam.sum();
  const double ratio = total > 0.0 ? lam(n - 1) / total : 0.0;

  auto derotate = [d](const ComplexVector& gh) -> std::optional<ComplexVector> {
    const cdouble xi = gh(d);
    if (std::abs(xi) == 0.0) return std::nullopt;
    return ComplexVector(gh.head(d) * (std::conj(xi) / std::abs(xi)));
  };

  Extraction best;
  best.objective = std::numeric_limits<double>::infinity();
  ComplexVector least_bad;
  FeasibilityCheck least_bad_check{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

  auto consider = [&](ComplexVector g, bool randomized) {
    const bool ok = repair(set, g, settings.projection_passes);
    const FeasibilityCheck chk = check_feasible(set, g);
    if (!ok) {
      if (chk.cap_excess + chk.power_error < least_bad_check.cap_excess + least_bad_check.power_error) {
        least_bad = g;
        least_bad_check = chk;
      }
      return false;
    }
    const double obj = lifted_objective(p, g);
    if (obj < best.objective) {
      best.g = std::move(g);
      best.objective = obj;
      best.randomized = randomized;
      best.check = chk;
    }
    return true;
  };

  const ComplexVector lead = std::sqrt(lam(n - 1)) * es.eigenvectors().col(n - 1);
  if (auto g = derotate(lead)) {
    if (consider(*g, false) && ratio >= settings.rank1_threshold) return best;
  }

  const ComplexMatrix factor = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  ComplexVector z(n);
  for (int draw = 0; draw < settings.random_draws; ++draw) {
    for (int i = 0; i < n; ++i) z(i) = rng.complex_normal(1.0);
    if (auto g = derotate(factor * z)) consider(*g, true);
  }
  if (!std::isfinite(best.objective))
    throw ExtractionError("extract_rank1: no feasible candidate after randomization", least_bad, least_bad_check);
  return best;
}

DesignResult design_waveform(const DesignProblem& prob, const OfdmOperators& ops, const SystemConfig& cfg,
                             const DesignOptions& opts) {
  const int d = prob.dim();
  const int frame = prob.frame_len();
  require_dims(d == ops.dim(), "design_waveform: operator size");
  ComplexMatrix g(d, frame);
  DesignDiagnostics diag;
  SdpOptions sopts;
  sopts.tol = cfg.solver.sdp_tol;
  sopts.max_iters = cfg.solver.sdp_max_iters;

  if (opts.method == DesignMethod::FullSdp) {
    const long lifted = static_cast<long>(d) * frame + 1;
    if (lifted > cfg.solver.full_sdp_cap)
      throw std::invalid_argument("design_waveform: full SDP dimension " + std::to_string(lifted) +
                                  " exceeds the configured cap " + std::to_string(cfg.solver.full_sdp_cap));
    const SdpProblem p = lift_full(prob);
    const SdpSolution sol = solve_sdp(p, sopts);
    if (sol.status == SdpStatus::Infeasible) throw DesignError(0, "SDP reported infeasible");
    Rng rng = Rng::stream(opts.seed, {0});
    Extraction ex;
    try {
      ex = extract_rank1(sol, p, frame_feasible_set(prob), cfg.solver, rng);
    } catch (const ExtractionError& e) {
      throw DesignError(0, e.what());
    }
    g = Eigen::Map<const ComplexMatrix>(ex.g.data(), d, frame);
    ColumnDiagnostics cd{sol.objective, ex.objective, sol.eig_ratio, sol.status, sol.iterations, ex.randomized,
                         ex.check};
    diag.columns.push_back(cd);
  } else {
    const FeasibleSet set = snapshot_feasible_set(prob);
    diag.columns.resize(frame);
    const bool use_warm = opts.warm && static_cast<int>(opts.warm->size()) == frame;
    std::vector<SdpWarmStart> warm_out(frame);
    parallel_for(frame, opts.threads, [&](int l) {
      const SdpProblem p = lift_snapshot(prob, l);
      SdpOptions local = sopts;
      if (use_warm) local.warm = &(*opts.warm)[l];
      SdpSolution sol = solve_sdp(p, local);
      if (sol.status == SdpStatus::Infeasible) throw DesignError(l, "SDP reported infeasible");
      Rng rng = Rng::stream(opts.seed, {static_cast<std::uint64_t>(l)});
      Extraction ex;
      try {
        ex = extract_rank1(sol, p, set, cfg.solver, rng);
      } catch (const ExtractionError& e) {
        throw DesignError(l, e.what());
      }
      g.col(l) = ex.g;
      diag.columns[l] = {sol.objective, ex.objective, sol.eig_ratio, sol.status, sol.iterations, ex.randomized,
                         ex.check};
      warm_out[l] = std::move(sol.warm);
    });
    if (opts.warm) *opts.warm = std::move(warm_out);
  }

  for (const auto& c : diag.columns) {
    diag.max_iters_hits += c.status == SdpStatus::MaxIters;
    diag.randomized += c.randomized;
    diag.min_eig_ratio = std::min(diag.min_eig_ratio, c.eig_ratio);
  }
  DesignResult out;
  out.g = Waveform::post_idft(std::move(g));
  out.xs = to_freq_domain(ops, out.g);
  diag.objective = prob.objective(out.g.data);
  diag.papr_nyquist = papr_nyquist(ops, out.xs);
  diag.papr_oversampled = papr_oversampled(ops, out.xs);
  out.diagnostics = std::move(diag);
  return out;
}

}  // namespace dfrc

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dfrc/benchmarks.hpp"
#include "dfrc/design.hpp"
#include "dfrc/metrics_comm.hpp"

using namespace dfrc;

namespace {

SystemConfig desk_cfg(int frame_len = 8) {
  SystemConfig cfg;
  cfg.n_tx = 4;
  cfg.n_sub = 8;
  cfg.n_cp = 3;
  cfg.n_taps = 4;
  cfg.n_users = 2;
  cfg.frame_len = frame_len;
  return cfg;
}

SystemConfig tiny_cfg() {
  SystemConfig cfg;
  cfg.n_tx = 2;
  cfg.n_sub = 2;
  cfg.n_cp = 1;
  cfg.n_taps = 2;
  cfg.n_users = 1;
  cfg.frame_len = 3;
  return cfg;
}

struct Scenario {
  SystemConfig cfg;
  OfdmOperators ops;
  ChannelRealization ch;
  SymbolMatrix s;
  Waveform g0;
};

Scenario make(const SystemConfig& cfg, std::uint64_t seed) {
  Scenario sc{cfg, build_operators(cfg), {}, {}, {}};
  Rng rng(seed);
  sc.ch = sample_channel(cfg, rng);
  sc.s = sample_symbols(cfg, rng);
  sc.g0 = directional_waveform(sc.ch, sc.ops, sc.s, build_rd(cfg));
  return sc;
}

SystemConfig with(SystemConfig cfg, double rho, double papr_db) {
  cfg.rho = rho;
  cfg.papr_eps = std::isinf(papr_db) ? papr_db : db_to_linear(papr_db);
  return cfg;
}

void check_columns(const DesignProblem& prob, const ComplexMatrix& g) {
  const FeasibleSet set = snapshot_feasible_set(prob);
  for (Eigen::Index l = 0; l < g.cols(); ++l) {
    const FeasibilityCheck chk = check_feasible(set, g.col(l));
    CHECK(chk.power_error <= 1e-8);
    CHECK(chk.cap_excess <= 1e-6);
  }
}

}  // namespace

TEST_CASE("stacked objective") {
  const Scenario sc = make(desk_cfg(), 1);
  const double s2 = sc.s.data.squaredNorm();
  const double g2 = sc.g0.data.squaredNorm();
  const int d = sc.ops.dim();
  const auto kc = sc.ch.h_d.rows();
  SUBCASE("block reconstruction") {
    const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.3, 3.0));
    CHECK((p.a_mat.topRows(kc) - std::sqrt(0.3 / s2) * sc.ch.h_d).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p.a_mat.bottomRows(d) - std::sqrt(0.7 / g2) * ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.papr_mode == PaprConstraint::Oversampled);
    CHECK(p.papr_rhs == doctest::Approx(db_to_linear(3.0) / (11 * 4)));
    const double plug = p.objective(sc.g0.data);
    CHECK(plug == doctest::Approx(0.3 / s2 * (sc.ch.h_d * sc.g0.data - sc.s.data).squaredNorm()).epsilon(1e-12));
  }
  SUBCASE("endpoints") {
    const DesignProblem p0 = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.0, 3.0));
    CHECK(p0.a_mat.topRows(kc).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p0.b_mat.topRows(kc).cwiseAbs().maxCoeff() == 0.0);
    const DesignProblem p1 = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 1.0, 3.0));
    CHECK(p1.a_mat.bottomRows(d).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p1.b_mat.bottomRows(d).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("unbounded PAPR drops the caps") {
    const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.5, INFINITY));
    CHECK(p.papr_mode == PaprConstraint::None);
    const SdpProblem q = lift_snapshot(p, 0);
    CHECK_FALSE(q.diag_caps);
    CHECK_FALSE(q.general_caps);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS(build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 1.2, 3.0)));
    CHECK_THROWS_AS(build_problem(sc.ch, sc.ops, sc.s, to_freq_domain(sc.ops, sc.g0), sc.cfg), DimensionError);
  }
}

TEST_CASE("snapshot lifting") {
  const Scenario sc = make(desk_cfg(), 2);
  const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.4, 2.0), PaprConstraint::Nyquist);
  Rng rng(3);
  for (int l : {0, 5}) {
    const SdpProblem q = lift_snapshot(p, l);
    const int n = q.dim();
    REQUIRE(n == sc.ops.dim() + 1);
    CHECK((q.q - q.q.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    bool corner = false;
    for (const auto& e : q.equalities)
      if (e.value == 1.0 && e.selector(n - 1, n - 1) == 1.0 && e.selector.cwiseAbs().sum() == 1.0) corner = true;
    CHECK(corner);
    REQUIRE(q.diag_caps);
    CHECK(q.diag_caps->bound == doctest::Approx(p.papr_rhs * (1 - p.cap_margin)));
    ComplexVector g(n - 1);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.complex_normal();
    const cdouble xi = std::polar(1.0, 0.7);
    ComplexVector gh(n);
    gh << g, xi;
    const double lifted = (gh.adjoint() * q.q * gh)(0, 0).real();
    const double direct = (p.a_mat * g * std::conj(xi) - p.b_mat.col(l)).squaredNorm();
    CHECK(lifted == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("rank-one solutions are returned as they are") {
  const Scenario sc = make(desk_cfg(), 4);
  const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.5, INFINITY));
  const FeasibleSet set = snapshot_feasible_set(p);
  const SdpProblem q = lift_snapshot(p, 1);
  Rng rng(5);
  ComplexVector g(sc.ops.dim());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.complex_normal();
  rescale_powers(set, g);
  const cdouble xi = std::polar(1.0, -2.1);
  ComplexVector gh(g.size() + 1);
  gh << g * xi, xi;
  SdpSolution sol;
  sol.g_hat = gh * gh.adjoint();
  sol.status = SdpStatus::Optimal;
  const Extraction ex = extract_rank1(sol, q, set, sc.cfg.solver, rng);
  CHECK_FALSE(ex.randomized);
  CHECK((ex.g - g).cwiseAbs().maxCoeff() < 1e-10);
  ComplexVector g1(g.size() + 1);
  g1 << g, 1.0;
  CHECK(ex.objective == doctest::Approx((g1.adjoint() * q.q * g1)(0, 0).real()).epsilon(1e-10));
}

TEST_CASE("spread solutions go through randomization") {
  const Scenario sc = make(desk_cfg(), 6);
  for (double papr_db : {double(INFINITY), 2.0}) {
    const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.5, papr_db));
    const FeasibleSet set = snapshot_feasible_set(p);
    const SdpProblem q = lift_snapshot(p, 0);
    SdpSolution sol;
    sol.g_hat = ComplexMatrix::Identity(q.dim(), q.dim());
    sol.status = SdpStatus::MaxIters;
    Rng rng(7);
    const Extraction ex = extract_rank1(sol, q, set, sc.cfg.solver, rng);
    CHECK(ex.randomized);
    CHECK(ex.check.ok());
    CHECK(ex.g.squaredNorm() == doctest::Approx(sc.cfg.p_sym()).epsilon(1e-8));
  }
}

TEST_CASE("repair helpers") {
  const Scenario sc = make(desk_cfg(), 8);
  const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.5, 0.5), PaprConstraint::Nyquist);
  const FeasibleSet set = snapshot_feasible_set(p);
  REQUIRE(set.anchor);
  CHECK(check_feasible(set, *set.anchor).ok());
  Rng rng(9);
  ComplexVector g(set.dim());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.complex_normal();
  ComplexVector c = g;
  clip_caps(set, c, 0.01);
  CHECK(c.cwiseAbs2().maxCoeff() <= 0.01 * (1 + 1e-12));
  CHECK(repair(set, g, 20));
  CHECK(check_feasible(set, g).ok());
}

TEST_CASE("radar-only design recovers a feasible benchmark") {
  Scenario sc = make(desk_cfg(4), 10);
  const DesignProblem p_any = build_problem(sc.ch, sc.ops, sc.s, sc.g0, with(sc.cfg, 0.0, INFINITY));
  const FeasibleSet set = snapshot_feasible_set(p_any);
  ComplexMatrix g0 = sc.g0.data;
  for (Eigen::Index l = 0; l < g0.cols(); ++l) {
    ComplexVector col = g0.col(l);
    rescale_powers(set, col);
    g0.col(l) = col;
  }
  const Waveform g0w = Waveform::post_idft(g0);
  const SystemConfig cfg = with(sc.cfg, 0.0, INFINITY);
  const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, g0w, cfg);
  const DesignResult res = design_waveform(p, sc.ops, cfg);
  CHECK(res.diagnostics.objective < 1e-6);
  for (Eigen::Index l = 0; l < g0.cols(); ++l)
    CHECK((res.g.data.col(l) - g0.col(l)).norm() / g0.col(l).norm() < 1e-3);
  CHECK(res.diagnostics.objective == doctest::Approx((res.g.data - g0).squaredNorm() / g0.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("communication-only design beats scaled zero forcing") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Scenario sc = make(desk_cfg(), seed);
    const SystemConfig cfg = with(sc.cfg, 1.0, INFINITY);
    const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, cfg);
    const DesignResult res = design_waveform(p, sc.ops, cfg);
    const double dfrc_mui = mui_energy(sc.ch, res.xs, sc.s);
    const double zf_mui = mui_energy(sc.ch, zf_waveform(sc.ch, sc.ops, sc.s, cfg).xs, sc.s);
    CAPTURE(seed);
    CHECK(dfrc_mui <= zf_mui + 1e-6);
    check_columns(p, res.g.data);
  }
}

TEST_CASE("vacuous caps change nothing") {
  const Scenario sc = make(desk_cfg(4), 14);
  SystemConfig loose = with(sc.cfg, 0.5, INFINITY);
  loose.papr_eps = 11.0 * 4 * 4;
  const SystemConfig none = with(sc.cfg, 0.5, INFINITY);
  for (PaprConstraint mode : {PaprConstraint::Nyquist, PaprConstraint::Oversampled}) {
    const DesignResult a = design_waveform(build_problem(sc.ch, sc.ops, sc.s, sc.g0, loose, mode), sc.ops, loose);
    const DesignResult b = design_waveform(build_problem(sc.ch, sc.ops, sc.s, sc.g0, none), sc.ops, none);
    CHECK(a.diagnostics.objective == doctest::Approx(b.diagnostics.objective).epsilon(1e-6));
  }
}

TEST_CASE("tighter PAPR never helps and is enforced") {
  const Scenario sc = make(desk_cfg(4), 15);
  double prev = -1.0;
  for (double db : {0.3, 1.0, 2.0, 3.0, double(INFINITY)}) {
    const SystemConfig cfg = with(sc.cfg, 0.5, db);
    const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, cfg);
    const DesignResult res = design_waveform(p, sc.ops, cfg);
    double relaxed = 0.0;
    for (const auto& c : res.diagnostics.columns) relaxed += c.sdp_objective;
    CAPTURE(db);
    if (prev >= 0.0) CHECK(relaxed <= prev * (1 + 1e-5) + 1e-9);
    prev = relaxed;
    if (std::isfinite(db)) CHECK(res.diagnostics.papr_oversampled.papr_db <= db + 0.05);
    check_columns(p, res.g.data);
    for (const auto& c : res.diagnostics.columns)
      if (c.eig_ratio >= 1 - 1e-6 && !c.randomized)
        CHECK(c.objective == doctest::Approx(c.sdp_objective).epsilon(1e-5));
  }
}

TEST_CASE("Nyquist constraint holds at the Nyquist samples") {
  const Scenario sc = make(desk_cfg(4), 16);
  const SystemConfig cfg = with(sc.cfg, 0.5, 1.0);
  const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, cfg, PaprConstraint::Nyquist);
  const DesignResult res = design_waveform(p, sc.ops, cfg);
  CHECK(res.diagnostics.papr_nyquist.papr_db <= 1.05);
  CHECK(res.diagnostics.papr_oversampled.papr_db >= res.diagnostics.papr_nyquist.papr_db - 1e-12);
}

TEST_CASE("deterministic and thread independent") {
  const Scenario sc = make(desk_cfg(4), 17);
  const SystemConfig cfg = with(sc.cfg, 0.5, 1.0);
  const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, cfg);
  DesignOptions one, four;
  one.seed = four.seed = 99;
  four.threads = 4;
  const DesignResult a = design_waveform(p, sc.ops, cfg, one);
  const DesignResult b = design_waveform(p, sc.ops, cfg, four);
  CHECK((a.xs.data - b.xs.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("warm starts reuse solver state") {
  const Scenario sc = make(desk_cfg(4), 18);
  std::vector<SdpWarmStart> warm;
  DesignOptions opts;
  opts.warm = &warm;
  const SystemConfig a = with(sc.cfg, 0.5, 2.0);
  const DesignResult ra = design_waveform(build_problem(sc.ch, sc.ops, sc.s, sc.g0, a), sc.ops, a, opts);
  CHECK(warm.size() == 4);
  const SystemConfig b = with(sc.cfg, 0.55, 2.0);
  const DesignResult rb = design_waveform(build_problem(sc.ch, sc.ops, sc.s, sc.g0, b), sc.ops, b, opts);
  const DesignResult rc = design_waveform(build_problem(sc.ch, sc.ops, sc.s, sc.g0, b), sc.ops, b);
  double sa = 0.0, sb = 0.0;
  for (std::size_t l = 0; l < 4; ++l) {
    sa += rb.diagnostics.columns[l].sdp_objective;
    sb += rc.diagnostics.columns[l].sdp_objective;
  }
  CHECK(sa == doctest::Approx(sb).epsilon(1e-5));
  (void)ra;
}

TEST_CASE("full-frame SDP agrees with the per-snapshot split") {
  const Scenario sc = make(tiny_cfg(), 19);
  for (double db : {double(INFINITY), 2.0}) {
    const SystemConfig cfg = with(sc.cfg, 0.5, db);
    const DesignProblem p = build_problem(sc.ch, sc.ops, sc.s, sc.g0, cfg);
    DesignOptions full;
    full.method = DesignMethod::FullSdp;
    const DesignResult rf = design_waveform(p, sc.ops, cfg, full);
    const DesignResult rs = design_waveform(p, sc.ops, cfg);
    double split = 0.0;
    for (const auto& c : rs.diagnostics.columns) split += c.sdp_objective;
    CAPTURE(db);
    CHECK(rf.diagnostics.columns.size() == 1);
    CHECK(rf.diagnostics.columns[0].sdp_objective <= split * (1 + 1e-5) + 1e-9);
    const FeasibleSet set = frame_feasible_set(p);
    const ComplexVector flat = Eigen::Map<const ComplexVector>(rf.g.data.data(), rf.g.data.size());
    CHECK(check_feasible(set, flat).ok());
  }
  SystemConfig big = desk_cfg(16);
  const Scenario sb = make(big, 20);
  const DesignProblem pb = build_problem(sb.ch, sb.ops, sb.s, sb.g0, big);
  DesignOptions full;
  full.method = DesignMethod::FullSdp;
  CHECK_THROWS_AS(design_waveform(pb, sb.ops, big, full), std::invalid_argument);
}

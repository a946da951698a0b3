#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dfrc/channel.hpp"

using namespace dfrc;

namespace {

SystemConfig small_cfg() {
  SystemConfig cfg;
  cfg.n_tx = 4;
  cfg.n_sub = 8;
  cfg.n_cp = 3;
  cfg.n_taps = 4;
  cfg.n_users = 2;
  cfg.frame_len = 5;
  return cfg;
}

ComplexMatrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  ComplexMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.complex_normal();
  return m;
}

// Independent time-domain route written with plain loops: IDFT per antenna,
// prefix, linear convolution with the taps, prefix removal, DFT.
ComplexMatrix loop_oracle(const std::vector<ComplexMatrix>& taps, int n_sub, int n_cp, const ComplexMatrix& xs) {
  const int k_users = static_cast<int>(taps[0].rows());
  const int n_tx = static_cast<int>(taps[0].cols());
  const int n_tot = n_sub + n_cp;
  ComplexMatrix y_out(n_sub * k_users, xs.cols());
  for (Eigen::Index l = 0; l < xs.cols(); ++l) {
    std::vector<ComplexVector> g(n_sub, ComplexVector::Zero(n_tx));
    for (int m = 0; m < n_sub; ++m)
      for (int n = 0; n < n_sub; ++n)
        for (int t = 0; t < n_tx; ++t)
          g[m](t) += std::exp(cdouble(0, 2.0 * kPi * m * n / n_sub)) / std::sqrt(double(n_sub)) * xs(n * n_tx + t, l);
    std::vector<ComplexVector> x(n_tot);
    for (int i = 0; i < n_tot; ++i) x[i] = g[(i - n_cp + n_sub) % n_sub];
    std::vector<ComplexVector> y(n_sub, ComplexVector::Zero(k_users));
    for (int i = n_cp; i < n_tot; ++i)
      for (std::size_t u = 0; u < taps.size(); ++u)
        if (i - static_cast<int>(u) >= 0) y[i - n_cp] += taps[u] * x[i - u];
    for (int n = 0; n < n_sub; ++n) {
      ComplexVector acc = ComplexVector::Zero(k_users);
      for (int m = 0; m < n_sub; ++m) acc += std::exp(cdouble(0, -2.0 * kPi * n * m / n_sub)) / std::sqrt(double(n_sub)) * y[m];
      y_out.middleRows(n * k_users, k_users).col(l) = acc;
    }
  }
  return y_out;
}

}  // namespace

TEST_CASE("subcarrier responses from taps") {
  Rng rng(4);
  std::vector<ComplexMatrix> taps;
  for (int u = 0; u < 3; ++u) taps.push_back(random_matrix(2, 4, rng));
  const ChannelRealization ch = channel_from_taps(taps, 8);
  REQUIRE(ch.n_sub() == 8);
  for (int n = 0; n < 8; ++n) {
    ComplexMatrix h = ComplexMatrix::Zero(2, 4);
    for (int u = 0; u < 3; ++u) h += taps[u] * std::exp(cdouble(0, -2.0 * kPi * u * n / 8.0));
    CHECK((ch.h_sub[n] - h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ch.h_s.block(n * 2, n * 4, 2, 4) - h).cwiseAbs().maxCoeff() < 1e-15);
  }
  ComplexMatrix off = ch.h_s;
  for (int n = 0; n < 8; ++n) off.block(n * 2, n * 4, 2, 4).setZero();
  CHECK(off.cwiseAbs().maxCoeff() == 0.0);
  const OfdmOperators ops = build_operators(4, 8, 2, 1);
  CHECK((ch.h_d - ch.h_s * ops.d.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single tap is flat") {
  SystemConfig cfg = small_cfg();
  cfg.n_taps = 1;
  cfg.n_cp = 0;
  Rng rng(9);
  const ChannelRealization ch = sample_channel(cfg, rng);
  for (int n = 1; n < cfg.n_sub; ++n) CHECK((ch.h_sub[n] - ch.h_sub[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed seed reproduces realizations") {
  const SystemConfig cfg = small_cfg();
  Rng a(77), b(77);
  const ChannelRealization ca = sample_channel(cfg, a);
  const ChannelRealization cb = sample_channel(cfg, b);
  for (std::size_t u = 0; u < ca.taps.size(); ++u) CHECK((ca.taps[u] - cb.taps[u]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sample_symbols(cfg, a).data - sample_symbols(cfg, b).data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tap power sums to one") {
  SystemConfig cfg = small_cfg();
  Rng rng(123);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ChannelRealization ch = sample_channel(cfg, rng);
    for (const auto& t : ch.taps) acc += std::norm(t(0, 0));
  }
  CHECK(acc / draws >= 0.97);
  CHECK(acc / draws <= 1.03);
}

TEST_CASE("frequency-domain reception") {
  const SystemConfig cfg = small_cfg();
  Rng rng(21);
  const ChannelRealization ch = sample_channel(cfg, rng);
  const OfdmOperators ops = build_operators(cfg);
  CHECK(receive_freq(ch, Waveform::pre_idft(ComplexMatrix::Zero(32, 5)), 0.0, rng).cwiseAbs().maxCoeff() == 0.0);
  const Waveform xs = Waveform::pre_idft(random_matrix(32, 5, rng));
  const ComplexMatrix y = receive_freq(ch, xs);
  for (int n = 0; n < 8; ++n)
    CHECK((y.middleRows(n * 2, 2) - ch.h_sub[n] * xs.data.middleRows(n * 4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  const ComplexMatrix time = receive_time_oracle(ch, ops, xs);
  CHECK((time - y).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((loop_oracle(ch.taps, 8, 3, xs.data) - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("noise has the requested variance") {
  const SystemConfig cfg = small_cfg();
  Rng rng(8);
  const ChannelRealization ch = sample_channel(cfg, rng);
  const Waveform xs = Waveform::pre_idft(ComplexMatrix::Zero(32, 2000));
  const ComplexMatrix y = receive_freq(ch, xs, 0.25, rng);
  CHECK(y.squaredNorm() / y.size() == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("hand-computable two-subcarrier case") {
  ComplexMatrix h0(1, 1), h1(1, 1);
  h0 << cdouble(0.8, -0.3);
  h1 << cdouble(-0.2, 0.5);
  const ChannelRealization ch = channel_from_taps({h0, h1}, 2);
  const OfdmOperators ops = build_operators(1, 2, 1, 1);
  ComplexMatrix x(2, 1);
  x << cdouble(1.0, 2.0), cdouble(-0.5, 0.25);
  ComplexMatrix expect(2, 1);
  expect << (h0(0, 0) + h1(0, 0)) * x(0, 0), (h0(0, 0) - h1(0, 0)) * x(1, 0);
  CHECK((receive_time_oracle(ch, ops, Waveform::pre_idft(x)) - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((receive_freq(ch, Waveform::pre_idft(x)) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single tap oracle is a plain product") {
  Rng rng(5);
  const ComplexMatrix h = random_matrix(2, 2, rng);
  const ChannelRealization ch = channel_from_taps({h}, 4);
  const OfdmOperators ops = build_operators(2, 4, 0, 1);
  const Waveform xs = Waveform::pre_idft(random_matrix(8, 3, rng));
  const ComplexMatrix y = receive_time_oracle(ch, ops, xs);
  for (int n = 0; n < 4; ++n) CHECK((y.middleRows(2 * n, 2) - h * xs.data.middleRows(2 * n, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("short prefix breaks the equivalence") {
  Rng rng(6);
  std::vector<ComplexMatrix> taps;
  for (int u = 0; u < 4; ++u) taps.push_back(random_matrix(2, 4, rng));
  const ChannelRealization ch = channel_from_taps(taps, 8);
  const OfdmOperators ops = build_operators(4, 8, 2, 1);
  const Waveform xs = Waveform::pre_idft(random_matrix(32, 3, rng));
  CHECK((receive_time_oracle(ch, ops, xs) - receive_freq(ch, xs)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("QPSK symbols") {
  SystemConfig cfg = small_cfg();
  cfg.frame_len = 625;
  Rng rng(10);
  const SymbolMatrix s = sample_symbols(cfg, rng);
  REQUIRE(s.data.size() == 10000);
  std::array<int, 4> counts{};
  for (Eigen::Index i = 0; i < s.data.size(); ++i) {
    CHECK(std::abs(std::abs(s.data(i)) - 1.0) < 1e-15);
    int hit = -1;
    for (int p = 0; p < 4; ++p)
      if (std::abs(s.data(i) - qpsk_points()[p]) < 1e-15) hit = p;
    REQUIRE(hit >= 0);
    ++counts[hit];
  }
  const double sigma = std::sqrt(10000 * 0.25 * 0.75);
  for (int c : counts) CHECK(std::abs(c - 2500.0) <= 3 * sigma);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include "dfrc/benchmarks.hpp"
#include "dfrc/metrics_comm.hpp"

using namespace dfrc;

namespace {

struct Instance {
  SystemConfig cfg;
  OfdmOperators ops;
  ChannelRealization ch;
  SymbolMatrix s;
};

Instance make(std::uint64_t seed, int frame_len = 8) {
  Instance in;
  in.cfg.n_tx = 4;
  in.cfg.n_sub = 4;
  in.cfg.n_cp = 2;
  in.cfg.n_taps = 3;
  in.cfg.n_users = 2;
  in.cfg.frame_len = frame_len;
  in.ops = build_operators(in.cfg);
  Rng rng(seed);
  in.ch = sample_channel(in.cfg, rng);
  in.s = sample_symbols(in.cfg, rng);
  return in;
}

Waveform random_xs(const Instance& in, Rng& rng) {
  ComplexMatrix x(in.ops.dim(), in.cfg.frame_len);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.complex_normal(0.1);
  return Waveform::pre_idft(x);
}

// Unscaled per-subcarrier zero forcing.
Waveform exact_zf(const Instance& in) {
  ComplexMatrix x = ComplexMatrix::Zero(in.ops.dim(), in.cfg.frame_len);
  const int k = in.cfg.n_users, t = in.cfg.n_tx;
  for (int n = 0; n < in.cfg.n_sub; ++n) {
    const ComplexMatrix& h = in.ch.h_sub[n];
    x.middleRows(n * t, t) = h.adjoint() * (h * h.adjoint()).inverse() * in.s.data.middleRows(n * k, k);
  }
  return Waveform::pre_idft(x);
}

cdouble rx(const Instance& in, const Waveform& xs, int n, int k, int l) {
  cdouble acc = 0.0;
  for (int t = 0; t < in.cfg.n_tx; ++t) acc += in.ch.h_sub[n](k, t) * xs.data(n * in.cfg.n_tx + t, l);
  return acc;
}

}  // namespace

TEST_CASE("MUI energy") {
  const Instance in = make(1);
  const Waveform zero = Waveform::pre_idft(ComplexMatrix::Zero(in.ops.dim(), in.cfg.frame_len));
  CHECK(mui_energy(in.ch, zero, in.s) == doctest::Approx(4.0 * 2 * 8).epsilon(1e-14));
  CHECK(mui_energy(in.ch, exact_zf(in), in.s) <= 1e-16 * in.s.data.squaredNorm() * 100);
  Rng rng(2);
  const Waveform xs = random_xs(in, rng);
  double oracle = 0.0;
  for (int n = 0; n < 4; ++n)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 8; ++l) oracle += std::norm(rx(in, xs, n, k, l) - in.s.data(n * 2 + k, l));
  CHECK(mui_energy(in.ch, xs, in.s) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(mui_energy(in.ch, Waveform::post_idft(xs.data), in.s), DimensionError);
}

TEST_CASE("SINR and rate") {
  const Instance in = make(3);
  const double nv = 0.05;
  SUBCASE("zero MUI") {
    const CommReport rep = sinr_and_rate(in.ch, exact_zf(in), in.s, nv);
    CHECK((rep.sinr.array() - 1.0 / nv).abs().maxCoeff() < 1e-6);
  }
  SUBCASE("silent transmitter") {
    const Waveform zero = Waveform::pre_idft(ComplexMatrix::Zero(in.ops.dim(), in.cfg.frame_len));
    const CommReport rep = sinr_and_rate(in.ch, zero, in.s, nv);
    CHECK((rep.sinr.array() - 1.0 / (1.0 + nv)).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("loop oracle") {
    Rng rng(4);
    const Waveform xs = random_xs(in, rng);
    const CommReport rep = sinr_and_rate(in.ch, xs, in.s, nv);
    double avg = 0.0;
    for (int n = 0; n < 4; ++n) {
      double sum = 0.0;
      for (int k = 0; k < 2; ++k) {
        double sig = 0.0, mui = 0.0;
        for (int l = 0; l < 8; ++l) {
          sig += std::norm(in.s.data(n * 2 + k, l));
          mui += std::norm(rx(in, xs, n, k, l) - in.s.data(n * 2 + k, l));
        }
        const double sinr = (sig / 8) / (mui / 8 + nv);
        CHECK(rep.sinr(k, n) == doctest::Approx(sinr).epsilon(1e-12));
        sum += std::log2(1 + sinr);
      }
      CHECK(rep.sum_rate_per_sub(n) == doctest::Approx(sum).epsilon(1e-12));
      avg += sum / 4;
    }
    CHECK(rep.avg_rate == doctest::Approx(avg).epsilon(1e-12));
    CHECK(rep.mui == doctest::Approx(mui_energy(in.ch, xs, in.s)).epsilon(1e-12));
  }
}

TEST_CASE("QPSK detection") {
  for (int p = 0; p < 4; ++p) CHECK(qpsk_detect(qpsk_points()[p]) == p);
  for (int p = 0; p < 4; ++p) CHECK(qpsk_detect(qpsk_points()[p] * 0.1 + cdouble(0.01, -0.01) * 0.0) == p);
}

TEST_CASE("symbol error rate") {
  SUBCASE("noiseless zero forcing") {
    const Instance in = make(5);
    Rng rng(6);
    CHECK(ser_montecarlo(in.ch, exact_zf(in), in.s, 0.0, 5, rng) == 0.0);
    CHECK(ser_montecarlo(in.ch, exact_zf(in), in.s, 1e-8, 5, rng) == 0.0);
  }
  SUBCASE("silent transmitter guesses") {
    const Instance in = make(7, 625);
    const Waveform zero = Waveform::pre_idft(ComplexMatrix::Zero(in.ops.dim(), in.cfg.frame_len));
    Rng rng(8);
    CHECK(std::abs(ser_montecarlo(in.ch, zero, in.s, 0.5, 2, rng) - 0.75) < 0.02);
  }
  SUBCASE("closed form at zero MUI") {
    const Instance in = make(9, 500);
    boost::math::normal_distribution<double> std_normal;
    for (double snr_db : {0.0, 4.0, 8.0}) {
      const double gamma = db_to_linear(snr_db);
      const double q = boost::math::cdf(boost::math::complement(std_normal, std::sqrt(gamma)));
      const double expect = 2 * q - q * q;
      Rng rng(10);
      const int trials = 10;
      const double n = 4.0 * 2 * 500 * trials;
      const double ser = ser_montecarlo(in.ch, exact_zf(in), in.s, 1.0 / gamma, trials, rng);
      CHECK(std::abs(ser - expect) <= 3 * std::sqrt(expect * (1 - expect) / n));
    }
  }
}

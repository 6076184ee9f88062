#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "core/signals.hpp"
#include "core/spectrum.hpp"

using namespace speclab;

TEST_CASE("empty signal is identically zero") {
  SignalSpec s;
  for (double x : {-10.0, 0.0, 3.3}) CHECK(eval_signal(s, x) == 0.0);
}

TEST_CASE("sin(pi x) at x = 0.5 is 1") {
  SignalSpec s;
  s.terms = {{1.0, 0.5, 0.0}};
  CHECK(eval_signal(s, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-tone signal evaluates by hand at x = 2.5") {
  SignalSpec s;
  s.terms = {{3.0, 0.2, 0.0}, {5.0, 0.1, 0.0}};
  // 3 sin(pi) + 5 sin(pi/2) = 5
  CHECK(eval_signal(s, 2.5) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("single tones are exactly periodic") {
  for (double k : {0.5, 1.0, 7.0}) {
    SignalSpec s;
    s.terms = {{2.0, k, 0.3}};
    for (double x : {-1.3, 0.0, 0.77}) {
      CHECK(eval_signal(s, x + 1.0 / k) == doctest::Approx(eval_signal(s, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("step sampling at half-integer offsets alternates sin(pi x) targets") {
  SignalSpec s;
  s.terms = {{1.0, 0.5, 0.0}};
  SamplingSpec sp;
  sp.a = -4.0;
  sp.b = 4.0;
  sp.mode = SamplingSpec::Mode::kStep;
  sp.step = 1.0;
  sp.offset = 0.5;
  Dataset d = sample_dataset(s, sp, 0);
  REQUIRE(d.size() == 8);
  for (int i = 0; i < 8; ++i) {
    double expected = (i % 2 == 0) ? 1.0 : -1.0;  // sin(pi(-3.5)) = +1, alternating
    CHECK(d.ys(i, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("count sampling spans the closed interval") {
  SignalSpec s;
  SamplingSpec sp;
  sp.a = 0.0;
  sp.b = 10.0;
  sp.mode = SamplingSpec::Mode::kCount;
  sp.count = 8;
  Dataset d = sample_dataset(s, sp, 1);
  REQUIRE(d.size() == 8);
  CHECK(d.xs(0, 0) == 0.0);
  CHECK(d.xs(7, 0) == doctest::Approx(10.0));
  CHECK(d.xs(1, 0) == doctest::Approx(10.0 / 7.0));
}

TEST_CASE("noiseless sampling ignores the seed") {
  SignalSpec s;
  s.terms = {{1.0, 1.0, 0.0}};
  SamplingSpec sp;
  sp.a = 0.0;
  sp.b = 1.0;
  sp.count = 16;
  Dataset d1 = sample_dataset(s, sp, 1);
  Dataset d2 = sample_dataset(s, sp, 2);
  CHECK(d1.ys == d2.ys);
}

TEST_CASE("noisy sampling is deterministic per seed") {
  SignalSpec s;
  SamplingSpec sp;
  sp.a = 0.0;
  sp.b = 1.0;
  sp.count = 16;
  sp.noise_std = 0.1;
  Dataset d1 = sample_dataset(s, sp, 7);
  Dataset d2 = sample_dataset(s, sp, 7);
  Dataset d3 = sample_dataset(s, sp, 8);
  CHECK(d1.ys == d2.ys);
  CHECK(d1.ys != d3.ys);
}

TEST_CASE("step sampling with fewer than two points is rejected") {
  SignalSpec s;
  SamplingSpec sp;
  sp.a = 0.0;
  sp.b = 1.0;
  sp.mode = SamplingSpec::Mode::kStep;
  sp.step = 5.0;
  sp.offset = 0.9;
  CHECK_THROWS_AS(sample_dataset(s, sp, 0), ConfigError);
}

TEST_CASE("two-tone draws stay in their supports over 10000 seeds") {
  double a_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    SignalSpec s = random_two_tone_signal(seed);
    REQUIRE(s.terms.size() == 2);
    for (const Tone& t : s.terms) {
      CHECK(t.frequency >= 0.01);
      CHECK(t.frequency <= 1.0);
      CHECK(t.amplitude >= 1.0);
      CHECK(t.amplitude <= 10.0);
    }
    a_sum += s.terms[0].amplitude;
  }
  // E[a1] = 5.5, SE = (9/sqrt(12))/100 ~ 0.026
  CHECK(a_sum / 10000.0 == doctest::Approx(5.5).epsilon(0.1 / 5.5));
}

TEST_CASE("two-tone signal is deterministic per seed") {
  SignalSpec a = random_two_tone_signal(42);
  SignalSpec b = random_two_tone_signal(42);
  CHECK(a.terms[0].frequency == b.terms[0].frequency);
  CHECK(a.terms[1].amplitude == b.terms[1].amplitude);
}

TEST_CASE("nyquist frequency of equidistant designs") {
  SamplingSpec sp;
  sp.a = -4.0;
  sp.b = 4.0;
  sp.mode = SamplingSpec::Mode::kStep;
  sp.offset = 0.5;

  sp.step = 1.0;
  CHECK(nyquist_frequency(sp) == doctest::Approx(0.5));
  sp.step = 0.5;
  CHECK(nyquist_frequency(sp) == doctest::Approx(1.0));
  sp.step = 2.0;
  CHECK(nyquist_frequency(sp) == doctest::Approx(0.25));
}

TEST_CASE("nyquist frequency rejects irregular samples") {
  Eigen::VectorXd xs(4);
  xs << 0.0, 1.0, 2.5, 3.0;
  CHECK_THROWS_AS(nyquist_frequency(xs), ConfigError);
}

TEST_CASE("binary labels cover both classes for n >= 32") {
  Dataset d = random_label_dataset(32, RandomLabelKind::kBinary, 2, -4.0, 4.0, 3);
  std::set<double> values;
  for (int i = 0; i < d.size(); ++i) values.insert(d.ys(i, 0));
  CHECK(values == std::set<double>{0.0, 1.0});
}

TEST_CASE("multiclass(4) with 64 points puts 16 labels per bin") {
  Dataset d = random_label_dataset(64, RandomLabelKind::kMulticlass, 4, -4.0, 4.0, 9);
  REQUIRE(d.ys.cols() == 4);
  Eigen::VectorXd counts = d.ys.colwise().sum();
  for (int b = 0; b < 4; ++b) CHECK(counts[b] == doctest::Approx(16.0));
  for (int i = 0; i < 64; ++i) CHECK(d.ys.row(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("random labels are deterministic per seed") {
  Dataset a = random_label_dataset(64, RandomLabelKind::kMseNoise, 2, -4.0, 4.0, 5);
  Dataset b = random_label_dataset(64, RandomLabelKind::kMseNoise, 2, -4.0, 4.0, 5);
  CHECK(a.ys == b.ys);
}

TEST_CASE("dense dft recovers term amplitudes at grid-resolvable frequencies") {
  SignalSpec s;
  s.terms = {{3.0, 0.25, 0.0}, {1.5, 2.0, 0.0}};
  GridSpec grid{-4.0, 4.0, 1024};
  Spectrum spec = dft(eval_signal(s, grid.points()), grid);
  for (const Tone& t : s.terms) {
    int bin = spec.bin_of(t.frequency);
    // |g_hat| at a resolvable tone = amplitude/2 * interval length
    double expected = t.amplitude / 2.0 * grid.length();
    CHECK(std::abs(spec.coeffs[bin]) == doctest::Approx(expected).epsilon(0.02));
  }
}

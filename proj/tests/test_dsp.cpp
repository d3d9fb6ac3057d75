#include <mpfr.h>

#include <cmath>
#include <complex>

#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace stase;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// (a/c)(theta + sin theta) in 256-bit arithmetic.
double woodworth_mpfr(double azimuth_deg, double a = 0.0875, double c = 343.0) {
  mpfr_t pi, theta, s, r;
  mpfr_inits2(256, pi, theta, s, r, static_cast<mpfr_ptr>(nullptr));
  mpfr_const_pi(pi, MPFR_RNDN);
  mpfr_mul_d(theta, pi, azimuth_deg, MPFR_RNDN);
  mpfr_div_ui(theta, theta, 180, MPFR_RNDN);
  mpfr_sin(s, theta, MPFR_RNDN);
  mpfr_add(r, theta, s, MPFR_RNDN);
  mpfr_mul_d(r, r, a, MPFR_RNDN);
  mpfr_div_d(r, r, c, MPFR_RNDN);
  const double out = mpfr_get_d(r, MPFR_RNDN);
  mpfr_clears(pi, theta, s, r, static_cast<mpfr_ptr>(nullptr));
  return out;
}

// |H(e^jw)| of a biquad in dB.
double response_db(const dsp::Biquad& b, double f, double rate) {
  const std::complex<double> z = std::polar(1.0, -2.0 * dsp::kPi * f / rate);
  const auto num = b.b0 + b.b1 * z + b.b2 * z * z;
  const auto den = 1.0 + b.a1 * z + b.a2 * z * z;
  return 20.0 * std::log10(std::abs(num / den));
}

}  // namespace

TEST_CASE("pan law endpoints and centre", "[dsp][pan]") {
  const auto c = dsp::pan_gains(0.0);
  CHECK(c.left == dsp::kSqrtHalf);
  CHECK(c.right == dsp::kSqrtHalf);
  const auto r = dsp::pan_gains(90.0);
  CHECK_THAT(r.left, WithinAbs(0.0, 1e-15));
  CHECK(r.right == 1.0);
  const auto h = dsp::pan_gains(45.0);
  CHECK_THAT(h.left, WithinAbs(std::cos(67.5 * dsp::kPi / 180.0), 1e-12));
  CHECK_THAT(h.right, WithinAbs(std::sin(67.5 * dsp::kPi / 180.0), 1e-12));
  CHECK_THAT(h.left, WithinAbs(0.38268, 1e-5));
  CHECK_THAT(h.right, WithinAbs(0.92388, 1e-5));
}

TEST_CASE("pan law clamps beyond +/-90", "[dsp][pan]") {
  CHECK(dsp::pan_gains(135.0) == dsp::pan_gains(90.0));
  CHECK(dsp::pan_gains(-170.0) == dsp::pan_gains(-90.0));
}

TEST_CASE("pan law is constant power and monotone", "[dsp][pan][property]") {
  double prev_l = 2.0, prev_r = -1.0;
  for (int az = -90; az <= 90; ++az) {
    const auto g = dsp::pan_gains(az);
    CHECK(std::abs(g.left * g.left + g.right * g.right - 1.0) < 1e-9);
    CHECK(g.left < prev_l);
    CHECK(g.right > prev_r);
    prev_l = g.left;
    prev_r = g.right;
    const auto m = dsp::pan_gains(-az);
    CHECK(m.left == g.right);
    CHECK(m.right == g.left);
  }
}

TEST_CASE("Woodworth delays match a 256-bit evaluation", "[dsp][itd]") {
  const auto d90 = dsp::itd_seconds(90.0);
  CHECK_THAT(d90.left_s, WithinAbs(woodworth_mpfr(90.0), 1e-15));
  CHECK_THAT(d90.left_s * 1e6, WithinAbs(655.8, 0.5));
  CHECK(d90.right_s == 0.0);

  const auto d30 = dsp::itd_seconds(-30.0);
  CHECK(d30.left_s == 0.0);
  CHECK_THAT(d30.right_s, WithinAbs(woodworth_mpfr(30.0), 1e-15));
  CHECK_THAT(d30.right_s * 1e6, WithinAbs(261.1, 0.1));

  // (0.0875/343)(pi/3 + sin 60deg) = 488.1 us
  CHECK_THAT(dsp::itd_seconds(60.0).left_s * 1e6, WithinAbs(488.1, 0.1));

  const auto d0 = dsp::itd_seconds(0.0);
  CHECK(d0.left_s == 0.0);
  CHECK(d0.right_s == 0.0);
}

TEST_CASE("ITD antisymmetry and monotonicity", "[dsp][itd][property]") {
  double prev = -1.0;
  for (double az = 0.0; az <= 90.0; az += 0.5) {
    const auto p = dsp::itd_seconds(az);
    const auto n = dsp::itd_seconds(-az);
    CHECK(p.left_s == n.right_s);
    CHECK(p.right_s == n.left_s);
    CHECK(p.left_s > prev);
    prev = p.left_s;
  }
  const double t90 = dsp::itd_seconds(90.0).left_s;
  CHECK(t90 >= 640e-6);
  CHECK(t90 <= 670e-6);
}

TEST_CASE("ITD rejects azimuths beyond the lateral model", "[dsp][itd]") {
  CHECK_THROWS_MATCHES(dsp::itd_seconds(91.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::AzimuthOutOfRange;
                       }));
  CHECK_THROWS_AS(dsp::itd_seconds(-120.0), Error);
}

TEST_CASE("head model validity", "[dsp][itd]") {
  CHECK(dsp::HeadModel{}.valid());
  CHECK_FALSE((dsp::HeadModel{0.2, 343.0}.valid()));
  CHECK_FALSE((dsp::HeadModel{0.0875, 450.0}.valid()));
}

TEST_CASE("fractional delay by hand-evaluated cases", "[dsp][delay]") {
  const auto x = AudioBuffer::mono(testing::noise(64, 3), 48000);
  CHECK(dsp::fractional_delay(x, 0.0) == x);

  const auto imp = AudioBuffer::mono(testing::impulse(16), 48000);
  const auto y = dsp::fractional_delay(imp, 2.5 / 48000.0);
  REQUIRE(y.frames() == 16);
  for (std::size_t n = 0; n < 16; ++n) {
    const double expect = (n == 2 || n == 3) ? 0.5 : 0.0;
    CHECK_THAT(y.channel(0)[n], WithinAbs(expect, 1e-12));
  }

  const auto long_imp = AudioBuffer::mono(testing::impulse(64), 48000);
  const double delay_s = dsp::itd_seconds(90.0).left_s;
  const double d = delay_s * 48000.0;  // 31.48 samples
  const auto z = dsp::fractional_delay(long_imp, delay_s);
  const double f = d - std::floor(d);
  CHECK_THAT(z.channel(0)[31], WithinAbs(1.0 - f, 1e-12));
  CHECK_THAT(z.channel(0)[32], WithinAbs(f, 1e-12));
  CHECK_THAT(z.channel(0)[31], WithinAbs(0.52, 0.01));
  CHECK_THAT(z.channel(0)[32], WithinAbs(0.48, 0.01));
}

TEST_CASE("fractional delay truncates the tail and rejects long delays", "[dsp][delay]") {
  const auto x = AudioBuffer::mono(testing::impulse(8, 7), 48000);
  const auto y = dsp::fractional_delay(x, 3.0 / 48000.0);
  CHECK(y.frames() == 8);
  CHECK(y.peak() == 0.0);
  CHECK_THROWS_AS(dsp::fractional_delay(x, 4097.0 / 48000.0), Error);
  CHECK_THROWS_AS(dsp::fractional_delay(x, -1e-6), Error);
  CHECK_NOTHROW(dsp::fractional_delay(x, 4096.0 / 48000.0));
}

TEST_CASE("fractional delay is linear", "[dsp][delay][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = testing::noise(300, seed);
    const auto b = testing::noise(300, seed + 100);
    const double ka = 0.3 + 0.1 * static_cast<double>(seed), kb = -1.7;
    std::vector<double> mix(300);
    for (std::size_t i = 0; i < 300; ++i) mix[i] = ka * a[i] + kb * b[i];
    const double d = (3.0 + 0.37 * static_cast<double>(seed)) / 48000.0;
    const auto ya = dsp::fractional_delay(AudioBuffer::mono(a, 48000), d);
    const auto yb = dsp::fractional_delay(AudioBuffer::mono(b, 48000), d);
    const auto ym = dsp::fractional_delay(AudioBuffer::mono(mix, 48000), d);
    for (std::size_t i = 0; i < 300; ++i)
      CHECK(std::abs(ym.channel(0)[i] - (ka * ya.channel(0)[i] + kb * yb.channel(0)[i])) < 1e-12);
  }
}

TEST_CASE("ILD shelf gains follow sin(azimuth)", "[dsp][ild]") {
  const dsp::IldModel m;
  CHECK(dsp::ild_shelf_gain_db(0.0, dsp::Ear::Ipsilateral, m) == 0.0);
  CHECK_THAT(dsp::ild_shelf_gain_db(90.0, dsp::Ear::Ipsilateral, m), WithinAbs(6.0, 1e-12));
  CHECK_THAT(dsp::ild_shelf_gain_db(-90.0, dsp::Ear::Contralateral, m), WithinAbs(-6.0, 1e-12));
  CHECK_THAT(dsp::ild_shelf_gain_db(30.0, dsp::Ear::Ipsilateral, m), WithinAbs(3.0, 1e-12));
  CHECK_THROWS_AS(dsp::ild_shelf_gain_db(95.0, dsp::Ear::Ipsilateral, m), Error);
}

TEST_CASE("ILD filter is the identity on the median plane", "[dsp][ild]") {
  const auto x = AudioBuffer::mono(testing::noise(512, 9), 48000);
  for (auto ear : {dsp::Ear::Ipsilateral, dsp::Ear::Contralateral}) {
    const auto y = dsp::ild_filter(x, 0.0, ear);
    CHECK(testing::max_abs_diff(x.channel(0), y.channel(0)) < 1e-9);
  }
}

TEST_CASE("high shelf: unity at DC, target gain at Nyquist", "[dsp][ild]") {
  for (double g : {-6.0, -3.0, 3.0, 6.0, 12.0}) {
    const auto b = dsp::Biquad::high_shelf(1060.0, g, 48000.0);
    CHECK_THAT(response_db(b, 0.0, 48000.0), WithinAbs(0.0, 1e-9));
    CHECK_THAT(response_db(b, 24000.0, 48000.0), WithinAbs(g, 0.1));
  }
  const auto id = dsp::Biquad::high_shelf(1060.0, 0.0, 48000.0);
  CHECK(id.b0 == 1.0);
  CHECK(id.a1 == 0.0);
}

TEST_CASE("ILD model reaches the full difference above the shelf frequency", "[dsp][ild]") {
  const dsp::IldModel m;
  const auto ipsi = dsp::Biquad::high_shelf(m.centre_hz(), 6.0, 48000.0);
  const auto contra = dsp::Biquad::high_shelf(m.centre_hz(), -6.0, 48000.0);
  for (double f : {4000.0, 6000.0, 8000.0}) {
    const double ild = response_db(ipsi, f, 48000.0) - response_db(contra, f, 48000.0);
    CHECK_THAT(ild, WithinAbs(12.0, 0.5));
  }
  for (double f : {50.0, 150.0, 300.0}) {
    const double ild = response_db(ipsi, f, 48000.0) - response_db(contra, f, 48000.0);
    CHECK_THAT(ild, WithinAbs(0.0, 0.5));
  }
}

TEST_CASE("Butterworth sections are -3 dB at the corner", "[dsp][filter]") {
  CHECK_THAT(response_db(dsp::Biquad::butter_lowpass(8000.0, 48000.0), 8000.0, 48000.0), WithinAbs(-3.0103, 1e-3));
  CHECK_THAT(response_db(dsp::Biquad::butter_highpass(1500.0, 48000.0), 1500.0, 48000.0), WithinAbs(-3.0103, 1e-3));
  CHECK_THAT(response_db(dsp::Biquad::butter_lowpass(8000.0, 48000.0), 10.0, 48000.0), WithinAbs(0.0, 1e-6));
}

TEST_CASE("distance gain", "[dsp][distance]") {
  CHECK(dsp::distance_gain(1.0) == 1.0);
  CHECK_THAT(dsp::distance_gain(10.0), WithinAbs(0.1, 1e-15));
  CHECK(dsp::distance_gain(0.1) == 4.0);
  CHECK(dsp::distance_gain(0.25) == 4.0);
  CHECK_THROWS_AS(dsp::distance_gain(0.0), Error);
  CHECK_THROWS_AS(dsp::distance_gain(-2.0), Error);
}

TEST_CASE("convolution small cases", "[dsp][conv]") {
  const auto one = AudioBuffer::mono({1.0, 1.0}, 48000);
  const auto y = dsp::convolve(one, one);
  REQUIRE(y.frames() == 3);
  CHECK_THAT(y.channel(0)[0], WithinAbs(1.0, 1e-12));
  CHECK_THAT(y.channel(0)[1], WithinAbs(2.0, 1e-12));
  CHECK_THAT(y.channel(0)[2], WithinAbs(1.0, 1e-12));

  const auto x = AudioBuffer::mono(testing::noise(700, 1), 48000);
  const auto delta = AudioBuffer::mono({1.0}, 48000);
  CHECK(testing::max_abs_diff(dsp::convolve(x, delta).channel(0), x.channel(0)) < 1e-12);

  CHECK_THROWS_AS(dsp::convolve(x, AudioBuffer::mono({1.0}, 44100)), Error);
  CHECK(dsp::convolve(AudioBuffer::mono({}, 48000), x).frames() == 0);
}

TEST_CASE("FFT convolution matches the direct oracle", "[dsp][conv][property]") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 6000;
    const std::size_t m = 1 + rng() % 900;
    const auto x = testing::noise(n, rng());
    const auto h = testing::noise(m, rng());
    const auto fast = fft::convolve_overlap_add(x, h);
    const auto slow = testing::direct_convolve(x, h);
    REQUIRE(fast.size() == n + m - 1);
    CHECK(testing::max_abs_diff(fast, slow) <= 1e-6);
    // commutes
    CHECK(testing::max_abs_diff(fast, fft::convolve_overlap_add(h, x)) <= 1e-9);
  }
  const auto x = testing::noise(1024, 5), h = testing::noise(256, 6);
  CHECK(testing::max_abs_diff(fft::convolve_overlap_add(x, h), testing::direct_convolve(x, h)) <= 1e-6);
}

TEST_CASE("comb feedback gain closed form", "[dsp][reverb]") {
  const double g = dsp::comb_feedback_gain(0.0297, 2.0);
  CHECK(g == std::pow(10.0, -3.0 * 0.0297 / 2.0));
  CHECK_THAT(g, WithinAbs(0.9026, 2e-4));
  CHECK(dsp::ms_to_samples(29.7, 48000) == 1426);
  CHECK(dsp::ms_to_samples(1.7, 44100) == 75);
}

TEST_CASE("Schroeder reverb shape and errors", "[dsp][reverb]") {
  const auto silent = AudioBuffer::silence(1, 1000, 48000);
  const auto y = dsp::schroeder_reverb(silent, 0.0501, 0.0);
  CHECK(y.frames() == 1000 + static_cast<std::size_t>(std::ceil(0.0501 * 48000)));
  CHECK(y.peak() == 0.0);

  const auto imp = AudioBuffer::mono(testing::impulse(100), 48000);
  const auto r = dsp::schroeder_reverb(imp, 1.0, 10.0);
  CHECK(r.frames() == 100 + 48000);
  for (std::size_t i = 0; i < 480; ++i) CHECK(r.channel(0)[i] == 0.0);  // predelay + shortest comb
  CHECK(r.peak() > 0.0);

  CHECK_THROWS_AS(dsp::schroeder_reverb(imp, 0.05, 0.0), Error);
  CHECK_THROWS_AS(dsp::schroeder_reverb(imp, 20.5, 0.0), Error);
  CHECK_NOTHROW(dsp::schroeder_reverb(imp, 20.0, 0.0));
}

TEST_CASE("Schroeder decay fits -60 dB per rt60", "[dsp][reverb]") {
  for (double rt60 : {0.5, 1.0, 2.0}) {
    const auto r = dsp::schroeder_reverb(AudioBuffer::mono(testing::impulse(1), 48000), rt60, 0.0);
    // Schroeder backward integration, linear fit of -5 dB .. -35 dB.
    const auto x = r.channel(0);
    std::vector<double> edc(x.size());
    double acc = 0.0;
    for (std::size_t i = x.size(); i-- > 0;) edc[i] = (acc += x[i] * x[i]);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double db = 10.0 * std::log10(edc[i] / edc[0]);
      if (db > -5.0 || db < -35.0) continue;
      const double t = static_cast<double>(i) / 48000.0;
      sx += t, sy += db, sxx += t * t, sxy += t * db, ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK_THAT(slope, WithinRel(-60.0 / rt60, 0.15));
  }
}

TEST_CASE("DSP outputs stay finite on random input", "[dsp][property]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = AudioBuffer::mono(testing::noise(2000, seed, 1.0), 48000);
    const double az = -90.0 + 18.0 * static_cast<double>(seed);
    auto all_finite = [](const AudioBuffer& b) {
      for (double v : b.channel(0))
        if (!std::isfinite(v)) return false;
      return true;
    };
    CHECK(all_finite(dsp::fractional_delay(x, dsp::itd_seconds(az).left_s)));
    CHECK(all_finite(dsp::ild_filter(x, az, dsp::Ear::Ipsilateral)));
    CHECK(all_finite(dsp::ild_filter(x, az, dsp::Ear::Contralateral)));
    CHECK(all_finite(dsp::convolve(x, x)));
    CHECK(all_finite(dsp::schroeder_reverb(x, 0.3, 5.0)));
  }
}

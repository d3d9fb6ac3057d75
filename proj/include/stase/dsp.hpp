#pragma once

// Deterministic signal-processing primitives. Every function takes its
// input by const reference and returns a new buffer; none keeps state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stase/audio_buffer.hpp"
#include "stase/error.hpp"
#include "stase/fft.hpp"

namespace stase::dsp {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrtHalf = 0.70710678118654752440;

inline double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }

/// Spherical head used by the Woodworth ITD model.
struct HeadModel {
  double head_radius_m = 0.0875;
  double speed_of_sound_mps = 343.0;

  bool valid() const noexcept {
    return head_radius_m > 0.05 && head_radius_m < 0.15 && speed_of_sound_mps > 300.0 &&
           speed_of_sound_mps < 400.0;
  }
};

struct StereoGains {
  double left = 0.0;
  double right = 0.0;
  friend bool operator==(const StereoGains&, const StereoGains&) = default;
};

/// Constant-power sine-cosine pan law. Azimuth is clamped to [-90, +90]
/// (positive = right). Gains depend only on |azimuth| and are assigned to
/// ears by sign, so mirrored azimuths give exactly swapped gains; the
/// centre position returns exactly equal gains.
inline StereoGains pan_gains(double azimuth_deg) noexcept {
  const double az = std::clamp(azimuth_deg, -90.0, 90.0);
  if (az == 0.0) return {kSqrtHalf, kSqrtHalf};
  const double p = (std::abs(az) + 90.0) / 180.0;
  const double theta = p * kPi / 2.0;
  const double near = std::sin(theta);
  const double far = std::cos(theta);
  return az > 0.0 ? StereoGains{far, near} : StereoGains{near, far};
}

/// Woodworth lateral delay tau(theta) = (a/c)(theta + sin theta), theta in [0, pi/2].
inline double woodworth_delay(double abs_azimuth_rad, const HeadModel& head) noexcept {
  return head.head_radius_m / head.speed_of_sound_mps * (abs_azimuth_rad + std::sin(abs_azimuth_rad));
}

struct EarDelays {
  double left_s = 0.0;
  double right_s = 0.0;
};

/// Per-ear onset delays for a horizontal-plane source. The contralateral
/// ear receives the full Woodworth delay, the ipsilateral ear none.
inline EarDelays itd_seconds(double azimuth_deg, const HeadModel& head = {}) {
  if (!(std::abs(azimuth_deg) <= 90.0))
    throw Error(ErrorCode::AzimuthOutOfRange,
                "ITD model covers |azimuth| <= 90, got " + std::to_string(azimuth_deg));
  const double tau = woodworth_delay(deg_to_rad(std::abs(azimuth_deg)), head);
  if (azimuth_deg > 0.0) return {tau, 0.0};
  if (azimuth_deg < 0.0) return {0.0, tau};
  return {0.0, 0.0};
}

inline constexpr double kMaxDelaySamples = 4096.0;

/// Linear-interpolation fractional delay. Output has the input's length;
/// leading samples are zero and the delayed tail is truncated.
inline AudioBuffer fractional_delay(const AudioBuffer& input, double delay_s) {
  if (!input.is_mono()) throw Error(ErrorCode::InvalidBuffer, "fractional_delay expects mono input");
  const double delay_samples = delay_s * input.sample_rate();
  if (!(delay_samples >= 0.0)) throw Error(ErrorCode::DelayTooLong, "negative delay");
  if (delay_samples > kMaxDelaySamples)
    throw Error(ErrorCode::DelayTooLong, std::to_string(delay_samples) + " samples exceeds 4096");

  const auto whole = static_cast<std::size_t>(std::floor(delay_samples));
  const double frac = delay_samples - static_cast<double>(whole);
  const auto x = input.samples();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = whole; n < x.size(); ++n) {
    double v = (1.0 - frac) * x[n - whole];
    if (frac != 0.0 && n >= whole + 1) v += frac * x[n - whole - 1];
    y[n] = v;
  }
  return AudioBuffer::mono(std::move(y), input.sample_rate());
}

/// Normalized second-order section, Direct Form I.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

  std::vector<double> filter(std::span<const double> x) const {
    std::vector<double> y(x.size());
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double v = b0 * x[n] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = x[n];
      y2 = y1;
      y1 = v;
      y[n] = v;
    }
    return y;
  }

  static Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
    return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
  }

  // Butterworth (Q = 1/sqrt 2) sections from the bilinear transform with
  // prewarping at the corner frequency.
  static Biquad butter_lowpass(double fc_hz, double rate_hz) {
    const double w = 2.0 * kPi * fc_hz / rate_hz;
    const double alpha = std::sin(w) / (2.0 * kSqrtHalf);
    const double c = std::cos(w);
    return normalized((1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
  }

  static Biquad butter_highpass(double fc_hz, double rate_hz) {
    const double w = 2.0 * kPi * fc_hz / rate_hz;
    const double alpha = std::sin(w) / (2.0 * kSqrtHalf);
    const double c = std::cos(w);
    return normalized((1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
  }

  // Second-order high shelf (shelf slope S = 1) centred at f0. Unity at DC,
  // exactly `gain_db` at Nyquist; gain_db == 0 yields the identity section.
  static Biquad high_shelf(double f0_hz, double gain_db, double rate_hz) {
    if (gain_db == 0.0) return {};
    const double a = std::pow(10.0, gain_db / 40.0);
    const double w = 2.0 * kPi * f0_hz / rate_hz;
    const double c = std::cos(w);
    const double alpha = std::sin(w) / 2.0 * std::sqrt(2.0);
    const double sa = 2.0 * std::sqrt(a) * alpha;
    return normalized(a * ((a + 1.0) + (a - 1.0) * c + sa), -2.0 * a * ((a - 1.0) + (a + 1.0) * c),
                      a * ((a + 1.0) + (a - 1.0) * c - sa), (a + 1.0) - (a - 1.0) * c + sa,
                      2.0 * ((a - 1.0) - (a + 1.0) * c), (a + 1.0) - (a - 1.0) * c - sa);
  }
};

enum class Ear { Ipsilateral, Contralateral };

/// Head-shadow shelf parameters. `shelf_fc_hz` is the top of the shelf's
/// transition octave: the section is centred half an octave lower, so the
/// full interaural difference is reached by fc.
struct IldModel {
  double ild_max_db = 12.0;
  double shelf_fc_hz = 1500.0;

  double centre_hz() const noexcept { return shelf_fc_hz * kSqrtHalf; }
};

/// Shelf gain applied to one ear: +/- (ILD_max / 2) sin|azimuth|.
inline double ild_shelf_gain_db(double azimuth_deg, Ear ear, const IldModel& model = {}) {
  if (!(std::abs(azimuth_deg) <= 90.0))
    throw Error(ErrorCode::AzimuthOutOfRange,
                "ILD model covers |azimuth| <= 90, got " + std::to_string(azimuth_deg));
  const double s = ear == Ear::Ipsilateral ? 1.0 : -1.0;
  if (azimuth_deg == 0.0) return 0.0;
  return s * (model.ild_max_db / 2.0) * std::sin(deg_to_rad(std::abs(azimuth_deg)));
}

inline AudioBuffer ild_filter(const AudioBuffer& input, double azimuth_deg, Ear ear,
                              const IldModel& model = {}) {
  if (!input.is_mono()) throw Error(ErrorCode::InvalidBuffer, "ild_filter expects mono input");
  const double gain_db = ild_shelf_gain_db(azimuth_deg, ear, model);
  if (gain_db == 0.0) return input;
  const auto shelf = Biquad::high_shelf(model.centre_hz(), gain_db, input.sample_rate());
  return AudioBuffer::mono(shelf.filter(input.samples()), input.sample_rate());
}

inline constexpr double kReferenceDistance = 1.0;
inline constexpr double kMinDistance = 0.25;

/// Inverse-distance law relative to 1 m, distance clamped at 0.25 m.
inline double distance_gain(double distance_m) {
  if (!(distance_m > 0.0))
    throw Error(ErrorCode::NonpositiveDistance, "distance must be > 0, got " + std::to_string(distance_m));
  return kReferenceDistance / std::max(distance_m, kMinDistance);
}

/// Full linear convolution of two mono buffers by FFT overlap-add.
inline AudioBuffer convolve(const AudioBuffer& input, const AudioBuffer& ir) {
  if (input.sample_rate() != ir.sample_rate())
    throw Error(ErrorCode::SampleRateMismatch, std::to_string(input.sample_rate()) + " vs " +
                                                   std::to_string(ir.sample_rate()));
  if (!input.is_mono() || !ir.is_mono()) throw Error(ErrorCode::InvalidBuffer, "convolve expects mono buffers");
  return AudioBuffer::mono(fft::convolve_overlap_add(input.samples(), ir.samples()), input.sample_rate());
}

struct SchroederParams {
  std::array<double, 4> comb_delays_ms{29.7, 37.1, 41.1, 43.7};
  std::array<double, 2> allpass_delays_ms{5.0, 1.7};
  double allpass_gain = 0.7;
};

inline std::size_t ms_to_samples(double ms, int rate_hz) {
  return static_cast<std::size_t>(std::llround(ms * rate_hz / 1000.0));
}

/// Feedback gain giving a 60 dB decay in rt60_s for a loop of delay_s.
inline double comb_feedback_gain(double delay_s, double rt60_s) {
  return std::pow(10.0, -3.0 * delay_s / rt60_s);
}

inline bool rt60_in_range(double rt60_s) noexcept { return rt60_s > 0.05 && rt60_s <= 20.0; }

/// Schroeder reverberator: four parallel feedback combs into two series
/// allpasses. Output length is input length + ceil(rt60 * rate).
inline AudioBuffer schroeder_reverb(const AudioBuffer& input, double rt60_s, double predelay_ms,
                                    const SchroederParams& params = {}) {
  if (!input.is_mono()) throw Error(ErrorCode::InvalidBuffer, "schroeder_reverb expects mono input");
  if (!rt60_in_range(rt60_s))
    throw Error(ErrorCode::Rt60OutOfRange, "rt60 must be in (0.05, 20], got " + std::to_string(rt60_s));
  if (!(predelay_ms >= 0.0)) throw Error(ErrorCode::InvalidBuffer, "predelay must be >= 0");

  const int rate = input.sample_rate();
  const auto x = input.samples();
  const std::size_t out_len = x.size() + static_cast<std::size_t>(std::ceil(rt60_s * rate));
  const std::size_t predelay = ms_to_samples(predelay_ms, rate);

  std::vector<double> dry(out_len, 0.0);
  for (std::size_t n = 0; n < x.size() && n + predelay < out_len; ++n) dry[n + predelay] = x[n];

  std::vector<double> wet(out_len, 0.0);
  for (double delay_ms : params.comb_delays_ms) {
    const std::size_t d = std::max<std::size_t>(ms_to_samples(delay_ms, rate), 1);
    const double g = comb_feedback_gain(static_cast<double>(d) / rate, rt60_s);
    std::vector<double> y(out_len, 0.0);
    for (std::size_t n = d; n < out_len; ++n) y[n] = dry[n - d] + g * y[n - d];
    for (std::size_t n = 0; n < out_len; ++n) wet[n] += 0.25 * y[n];
  }
  for (double delay_ms : params.allpass_delays_ms) {
    const std::size_t d = std::max<std::size_t>(ms_to_samples(delay_ms, rate), 1);
    const double g = params.allpass_gain;
    std::vector<double> y(out_len, 0.0);
    for (std::size_t n = 0; n < out_len; ++n) {
      double v = -g * wet[n];
      if (n >= d) v += wet[n - d] + g * y[n - d];
      y[n] = v;
    }
    wet = std::move(y);
  }
  return AudioBuffer::mono(std::move(wet), rate);
}

}  // namespace stase::dsp

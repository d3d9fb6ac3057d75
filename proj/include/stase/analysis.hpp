#pragma once

// Objective checks on rendered audio: ITD by cross-correlation, band ILD,
// and per-source azimuth recovery from solo renders.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stase/audio_buffer.hpp"
#include "stase/banks.hpp"
#include "stase/dsp.hpp"
#include "stase/error.hpp"
#include "stase/fft.hpp"
#include "stase/renderer.hpp"
#include "stase/scene.hpp"

namespace stase::analysis {

enum class ItdWeighting { Plain, Phat };

inline constexpr double kDefaultMaxLagS = 0.001;

namespace detail {

inline void require_stereo(const AudioBuffer& b) {
  if (!b.is_stereo()) throw Error(ErrorCode::NotStereo, "expected 2 channels, got " + std::to_string(b.channel_count()));
}

// r[k] = sum_i a[i] b[i - k], summed in ascending i.
inline double xcorr_at(std::span<const double> a, std::span<const double> b, long k) {
  const long n = static_cast<long>(a.size());
  double s = 0.0;
  for (long i = std::max(0L, k); i < std::min(n, n + k); ++i) s += a[i] * b[i - k];
  return s;
}

inline std::vector<double> phat_xcorr(std::span<const double> a, std::span<const double> b, long max_lag) {
  const std::size_t n = a.size();
  const std::size_t nfft = fft::next_pow2(2 * n);
  const std::size_t bins = nfft / 2 + 1;
  const auto& plans = fft::detail::plans_for(nfft);
  auto time = fft::detail::aligned_alloc<double>(nfft);
  auto sa = fft::detail::aligned_alloc<fftw_complex>(bins);
  auto sb = fft::detail::aligned_alloc<fftw_complex>(bins);
  std::fill_n(time.get(), nfft, 0.0);
  std::copy(a.begin(), a.end(), time.get());
  fftw_execute_dft_r2c(plans.forward, time.get(), sa.get());
  std::fill_n(time.get(), nfft, 0.0);
  std::copy(b.begin(), b.end(), time.get());
  fftw_execute_dft_r2c(plans.forward, time.get(), sb.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = sa[k][0] * sb[k][0] + sa[k][1] * sb[k][1];
    const double im = sa[k][1] * sb[k][0] - sa[k][0] * sb[k][1];
    const double mag = std::hypot(re, im);
    sa[k][0] = mag > 1e-300 ? re / mag : 0.0;
    sa[k][1] = mag > 1e-300 ? im / mag : 0.0;
  }
  fftw_execute_dft_c2r(plans.inverse, sa.get(), time.get());
  std::vector<double> r;
  for (long k = -max_lag; k <= max_lag; ++k)
    r.push_back(time[static_cast<std::size_t>((k + static_cast<long>(nfft)) % static_cast<long>(nfft))]);
  return r;
}

}  // namespace detail

/// Interaural time difference in seconds; positive when the left channel
/// lags. Peak of the normalised cross-correlation over +/- max_lag, refined
/// by a parabola through the peak and its neighbours. Equal peaks resolve
/// toward zero lag.
inline double estimate_itd(const AudioBuffer& stereo, double max_lag_s = kDefaultMaxLagS,
                           ItdWeighting weighting = ItdWeighting::Plain) {
  detail::require_stereo(stereo);
  const long max_lag = static_cast<long>(std::floor(max_lag_s * stereo.sample_rate()));
  if (max_lag < 1) throw Error(ErrorCode::TooShort, "max_lag is below one sample");
  if (stereo.frames() <= static_cast<std::size_t>(2 * max_lag))
    throw Error(ErrorCode::TooShort, "need more than " + std::to_string(2 * max_lag) + " frames, got " +
                                         std::to_string(stereo.frames()));
  const auto left = stereo.channel(0);
  const auto right = stereo.channel(1);

  std::vector<double> r;
  if (weighting == ItdWeighting::Phat) {
    r = detail::phat_xcorr(left, right, max_lag);
  } else {
    const double el = detail::xcorr_at(left, left, 0);
    const double er = detail::xcorr_at(right, right, 0);
    const double norm = std::sqrt(el) * std::sqrt(er);
    if (norm == 0.0) return 0.0;
    for (long k = -max_lag; k <= max_lag; ++k) r.push_back(detail::xcorr_at(left, right, k) / norm);
  }

  std::size_t best = static_cast<std::size_t>(max_lag);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const long lag = static_cast<long>(i) - max_lag;
    const long best_lag = static_cast<long>(best) - max_lag;
    if (r[i] > r[best] || (r[i] == r[best] && std::abs(lag) < std::abs(best_lag))) best = i;
  }
  const double k = static_cast<double>(static_cast<long>(best) - max_lag);
  double delta = 0.0;
  if (best > 0 && best + 1 < r.size()) {
    const double ym = r[best - 1], y0 = r[best], yp = r[best + 1];
    const double denom = (ym + yp) - 2.0 * y0;
    if (denom < 0.0) delta = 0.5 * (ym - yp) / denom;
  }
  return (k + delta) / stereo.sample_rate();
}

struct Band {
  double low_hz = 1500.0;  // 0 disables the high-pass section
  double high_hz = 8000.0;
};

inline double band_energy(std::span<const double> x, const Band& band, int rate) {
  std::vector<double> y = dsp::Biquad::butter_lowpass(band.high_hz, rate).filter(x);
  if (band.low_hz > 0.0) y = dsp::Biquad::butter_highpass(band.low_hz, rate).filter(y);
  double e = 0.0;
  for (double v : y) e += v * v;
  return e;
}

/// Band-limited level difference in dB, positive when the right channel is
/// louder. Both channels pass the same 2nd-order high-pass and 2nd-order
/// low-pass Butterworth sections.
inline double estimate_ild(const AudioBuffer& stereo, const Band& band = {}) {
  detail::require_stereo(stereo);
  if (!(stereo.sample_rate() > 2.0 * band.high_hz))
    throw Error(ErrorCode::BandAboveNyquist, "band edge " + std::to_string(band.high_hz) + " Hz at " +
                                                 std::to_string(stereo.sample_rate()) + " Hz");
  if (!(band.low_hz >= 0.0 && band.low_hz < band.high_hz))
    throw Error(ErrorCode::BandAboveNyquist, "band edges must satisfy 0 <= low < high");
  const double el = band_energy(stereo.channel(0), band, stereo.sample_rate());
  const double er = band_energy(stereo.channel(1), band, stereo.sample_rate());
  if (el == 0.0 && er == 0.0) return 0.0;
  constexpr double kFloor = 1e-30;
  return 10.0 * std::log10(std::max(er, kFloor) / std::max(el, kFloor));
}

inline constexpr double kItdClampMarginS = 10e-6;

/// Inverts the Woodworth model by bisection on [0, 90] degrees. Magnitudes
/// up to 10 us beyond the 90 degree delay clamp to +/-90.
inline double azimuth_from_itd(double itd_s, const dsp::HeadModel& head = {}) {
  const double max_itd = dsp::woodworth_delay(dsp::kPi / 2.0, head);
  const double mag = std::abs(itd_s);
  if (!std::isfinite(itd_s) || mag > max_itd + kItdClampMarginS)
    throw Error(ErrorCode::ItdOutOfRange, std::to_string(itd_s * 1e6) + " us exceeds the head model range");
  const double sign = itd_s < 0.0 ? -1.0 : 1.0;
  if (mag == 0.0) return 0.0;
  if (mag >= max_itd) return sign * 90.0;
  double lo = 0.0, hi = dsp::kPi / 2.0;
  while (dsp::woodworth_delay(hi, head) - dsp::woodworth_delay(lo, head) >= 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (dsp::woodworth_delay(mid, head) < mag ? lo : hi) = mid;
  }
  return sign * (0.5 * (lo + hi)) * 180.0 / dsp::kPi;
}

/// Constant-power pan law inverted from the broadband RMS of each channel.
inline double azimuth_from_pan(const AudioBuffer& stereo) {
  detail::require_stereo(stereo);
  const double el = detail::xcorr_at(stereo.channel(0), stereo.channel(0), 0);
  const double er = detail::xcorr_at(stereo.channel(1), stereo.channel(1), 0);
  const double theta = std::atan2(std::sqrt(er), std::sqrt(el));
  return theta / (dsp::kPi / 2.0) * 180.0 - 90.0;
}

/// Lateral angle: the azimuth a horizontal-plane cue can express.
inline double lateral_angle_deg(double azimuth_deg, double elevation_deg) {
  const double s = std::sin(dsp::deg_to_rad(azimuth_deg)) * std::cos(dsp::deg_to_rad(elevation_deg));
  return std::clamp(std::asin(std::clamp(s, -1.0, 1.0)) * 180.0 / dsp::kPi, -90.0, 90.0);
}

struct SourceReport {
  std::string source_id;
  LocalizationMode mode = LocalizationMode::Panning;
  double requested_azimuth_deg = 0.0;
  double requested_elevation_deg = 0.0;
  double expected_azimuth_deg = 0.0;
  std::string method;  // "itd" or "pan_law"
  std::optional<double> itd_s;
  std::optional<double> ild_db;
  std::optional<double> measured_azimuth_deg;
  double deviation_deg = 0.0;
  bool within_tolerance = false;
  std::string note;
};

struct Report {
  double tolerance_deg = 5.0;
  std::vector<SourceReport> sources;

  bool all_within() const {
    return std::all_of(sources.begin(), sources.end(), [](const auto& s) { return s.within_tolerance; });
  }
};

inline constexpr double kDefaultToleranceDeg = 5.0;

/// Renders each source alone (reverb and normalisation off) and compares
/// the requested azimuth with the one recovered from the render.
inline Report analyze_render(const SpatialPlan& plan, const std::map<std::string, AudioBuffer>& stems,
                             const HrirBank& hrir_bank, const RirBank& rir_bank, const RenderConfig& cfg = {},
                             double tolerance_deg = kDefaultToleranceDeg) {
  Report report;
  report.tolerance_deg = tolerance_deg;
  RenderConfig solo_cfg = cfg;
  solo_cfg.normalize_peak_dbfs.reset();

  for (const auto& src : plan.sources) {
    SpatialPlan solo = plan;
    solo.sources = {src};
    solo.sources.front().reverb_send = 0.0;
    solo.reverb.wet_gain = 0.0;
    const auto mix = render(solo, stems, hrir_bank, rir_bank, solo_cfg).mix;

    SourceReport r;
    r.source_id = src.source_id;
    r.mode = src.mode;
    r.requested_azimuth_deg = src.azimuth_deg;
    r.requested_elevation_deg = src.elevation_deg;
    r.ild_db = estimate_ild(mix);
    if (src.mode == LocalizationMode::Panning) {
      r.method = "pan_law";
      r.expected_azimuth_deg = std::clamp(src.azimuth_deg, -90.0, 90.0);
      r.measured_azimuth_deg = azimuth_from_pan(mix);
      r.note = "azimuth from ITD not applicable";
    } else {
      r.method = "itd";
      r.expected_azimuth_deg = lateral_angle_deg(src.azimuth_deg, src.elevation_deg);
      r.itd_s = estimate_itd(mix);
      try {
        r.measured_azimuth_deg = azimuth_from_itd(*r.itd_s, cfg.head);
      } catch (const Error& e) {
        r.note = e.what();
      }
    }
    if (r.measured_azimuth_deg) {
      r.deviation_deg = std::abs(*r.measured_azimuth_deg - r.expected_azimuth_deg);
      r.within_tolerance = r.deviation_deg <= tolerance_deg;
    }
    report.sources.push_back(std::move(r));
  }
  return report;
}

inline Json to_json(const Report& report) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json sources = Json::array();
  for (const auto& s : report.sources) {
    sources.push_back({{"source_id", s.source_id},
                       {"mode", to_string(s.mode)},
                       {"requested_azimuth_deg", s.requested_azimuth_deg},
                       {"requested_elevation_deg", s.requested_elevation_deg},
                       {"expected_azimuth_deg", s.expected_azimuth_deg},
                       {"method", s.method},
                       {"itd_s", opt(s.itd_s)},
                       {"ild_db", opt(s.ild_db)},
                       {"measured_azimuth_deg", opt(s.measured_azimuth_deg)},
                       {"deviation_deg", s.deviation_deg},
                       {"within_tolerance", s.within_tolerance},
                       {"note", s.note}});
  }
  return {{"tolerance_deg", report.tolerance_deg}, {"all_within", report.all_within()}, {"sources", sources}};
}

inline std::string to_table(const Report& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-8s %9s %9s %9s %9s %9s %7s  %s\n", "source", "mode", "req_az", "exp_az",
                "meas_az", "dev", "itd_us", "ild_db", "ok");
  out += line;
  for (const auto& s : report.sources) {
    auto num = [](const std::optional<double>& v, double scale) {
      char b[32];
      if (!v) return std::string("-");
      std::snprintf(b, sizeof b, "%.2f", *v * scale);
      return std::string(b);
    };
    std::snprintf(line, sizeof line, "%-16s %-8s %9.2f %9.2f %9s %9.2f %9s %7s  %s\n", s.source_id.c_str(),
                  to_string(s.mode).c_str(), s.requested_azimuth_deg, s.expected_azimuth_deg,
                  num(s.measured_azimuth_deg, 1.0).c_str(), s.deviation_deg, num(s.itd_s, 1e6).c_str(),
                  num(s.ild_db, 1.0).c_str(), s.within_tolerance ? "yes" : "NO");
    out += line;
  }
  return out;
}

}  // namespace stase::analysis

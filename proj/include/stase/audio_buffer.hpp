#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stase/error.hpp"

namespace stase {

// Sample rates the engine accepts. Rates are never converted implicitly.
inline bool is_supported_rate(int rate_hz) noexcept { return rate_hz == 44100 || rate_hz == 48000; }

/// Mono or stereo block of double-precision samples tagged with its rate.
///
/// Invariants, checked on construction: 1 or 2 channels of equal length,
/// supported sample rate, every sample finite.
class AudioBuffer {
 public:
  AudioBuffer() = default;

  AudioBuffer(std::vector<std::vector<double>> channels, int sample_rate_hz)
      : channels_(std::move(channels)), rate_(sample_rate_hz) {
    if (channels_.empty() || channels_.size() > 2)
      throw Error(ErrorCode::InvalidBuffer, "channel count must be 1 or 2");
    if (!is_supported_rate(rate_))
      throw Error(ErrorCode::InvalidBuffer, "unsupported sample rate " + std::to_string(rate_));
    if (channels_.size() == 2 && channels_[0].size() != channels_[1].size())
      throw Error(ErrorCode::InvalidBuffer, "channel lengths differ");
    for (const auto& ch : channels_)
      for (double s : ch)
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidBuffer, "non-finite sample");
  }

  static AudioBuffer mono(std::vector<double> samples, int sample_rate_hz) {
    std::vector<std::vector<double>> ch;
    ch.push_back(std::move(samples));
    return AudioBuffer(std::move(ch), sample_rate_hz);
  }

  static AudioBuffer stereo(std::vector<double> left, std::vector<double> right, int sample_rate_hz) {
    std::vector<std::vector<double>> ch;
    ch.push_back(std::move(left));
    ch.push_back(std::move(right));
    return AudioBuffer(std::move(ch), sample_rate_hz);
  }

  static AudioBuffer silence(std::size_t channels, std::size_t frames, int sample_rate_hz) {
    return AudioBuffer(std::vector<std::vector<double>>(channels, std::vector<double>(frames, 0.0)),
                       sample_rate_hz);
  }

  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::size_t frames() const noexcept { return channels_.empty() ? 0 : channels_.front().size(); }
  int sample_rate() const noexcept { return rate_; }
  bool is_mono() const noexcept { return channels_.size() == 1; }
  bool is_stereo() const noexcept { return channels_.size() == 2; }

  std::span<const double> channel(std::size_t i) const { return channels_.at(i); }
  std::span<const double> samples() const { return channel(0); }
  const std::vector<std::vector<double>>& channels() const noexcept { return channels_; }

  double peak() const noexcept {
    double p = 0.0;
    for (const auto& ch : channels_)
      for (double s : ch) p = std::max(p, std::abs(s));
    return p;
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<std::vector<double>> channels_;
  int rate_ = 48000;
};

}  // namespace stase

// Generates the synthetic HRIR ring and RIR set shipped under data/.
//
//   stase-fixtures --out data

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "stase/stase.hpp"

namespace fs = std::filesystem;
using namespace stase;

namespace {

constexpr int kRate = 48000;
constexpr std::size_t kHrirLength = 256;
constexpr double kHrirOnset = 16.0;  // samples before the ipsilateral arrival

// Spherical-head pair: Woodworth delay on the lateral angle, head-shadow
// shelf, and a gentle low-pass on both ears for rear positions.
std::pair<AudioBuffer, AudioBuffer> synth_hrir(double az_deg) {
  const double lateral = analysis::lateral_angle_deg(az_deg, 0.0);
  std::vector<double> impulse(kHrirLength, 0.0);
  impulse[0] = 1.0;
  const auto click = AudioBuffer::mono(impulse, kRate);
  const auto delays = dsp::itd_seconds(lateral);
  const double onset = kHrirOnset / kRate;

  auto ear = [&](double delay_s, dsp::Ear which) {
    auto y = dsp::ild_filter(dsp::fractional_delay(click, onset + delay_s), lateral, which);
    auto s = y.channels()[0];
    if (std::abs(az_deg) > 90.0) s = dsp::Biquad::butter_lowpass(6000.0, kRate).filter(s);
    s.resize(kHrirLength);
    for (auto& v : s) v *= dsp::kSqrtHalf;
    return AudioBuffer::mono(std::move(s), kRate);
  };
  const auto left_ear = lateral < 0.0 ? dsp::Ear::Ipsilateral : dsp::Ear::Contralateral;
  const auto right_ear = lateral < 0.0 ? dsp::Ear::Contralateral : dsp::Ear::Ipsilateral;
  return {ear(delays.left_s, left_ear), ear(delays.right_s, right_ear)};
}

void write_hrir_bank(const fs::path& dir) {
  fs::create_directories(dir);
  Json manifest = Json::array();
  for (int i = 0; i < 72; ++i) {
    const int az = i <= 36 ? i * 5 : i * 5 - 360;
    auto [l, r] = synth_hrir(az);
    char name[32];
    std::snprintf(name, sizeof name, "hrir_%03d.wav", i);
    wav::write_wav(AudioBuffer::stereo(l.channels()[0], r.channels()[0], kRate), dir / name, wav::BitDepth::Float32);
    manifest.push_back({{"index", i}, {"azimuth_deg", az}, {"elevation_deg", 0}, {"file", name}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

struct RoomSpec {
  const char* id;
  double rt60_s;
  std::vector<std::string> keywords;
  const char* description;
};

const std::vector<RoomSpec>& rooms() {
  static const std::vector<RoomSpec> r = {
      {"concert_hall", 2.0, {"concert hall", "symphony hall", "auditorium"}, "Large concert hall with natural reverberation"},
      {"jazz_room", 0.6, {"jazz club", "club room"}, "Small jazz club with a warm, short tail"},
      {"dry_studio", 0.3, {"dry", "dead room"}, "Dry rehearsal room, little reflected energy"},
      {"small_chamber", 0.8, {"small room", "drawing room"}, "Small chamber for intimate ensembles"},
      {"medium_venue", 1.0, {"venue", "nightclub", "warehouse"}, "Medium-sized live venue"},
      {"church", 3.5, {"church", "cathedral", "chapel"}, "Stone church with extended reverb"},
      {"recital_hall", 1.5, {"recital hall", "recital"}, "Mid-sized recital hall"},
      {"world_space", 1.2, {"courtyard", "temple"}, "Open courtyard space with soft walls"},
      {"pro_studio", 0.4, {"studio", "control room"}, "Treated professional studio live room"},
      {"outdoor", 0.25, {"outdoor", "outdoors", "open air"}, "Open-air stage with almost no tail"},
  };
  return r;
}

// Exponentially decaying white noise (60 dB over rt60) after a unit direct
// path. Uniform noise from raw generator bits keeps output identical across
// standard libraries.
AudioBuffer synth_rir(const RoomSpec& room, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::size_t>(std::ceil(room.rt60_s * kRate));
  const std::size_t onset = kRate / 1000;
  std::vector<double> ir(n, 0.0);
  ir[0] = 0.9;
  for (std::size_t i = onset; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double t = static_cast<double>(i) / kRate;
    ir[i] = 0.35 * (2.0 * u - 1.0) * std::pow(10.0, -3.0 * t / room.rt60_s);
  }
  return AudioBuffer::mono(std::move(ir), kRate);
}

void write_rir_bank(const fs::path& dir) {
  fs::create_directories(dir);
  Json manifest = Json::array();
  std::uint64_t seed = 20240601;
  for (const auto& room : rooms()) {
    const std::string file = std::string(room.id) + ".wav";
    wav::write_wav(synth_rir(room, seed++), dir / file, wav::BitDepth::Pcm16);
    manifest.push_back({{"rir_id", room.id},
                        {"keywords", room.keywords},
                        {"description", room.description},
                        {"rt60_s", room.rt60_s},
                        {"file", file}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic HRIR and RIR fixture banks"};
  std::string out = "data";
  app.add_option("--out", out, "Data directory (hrir/ and rir/ are written inside)");
  CLI11_PARSE(app, argc, argv);
  try {
    write_hrir_bank(fs::path(out) / "hrir");
    write_rir_bank(fs::path(out) / "rir");
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

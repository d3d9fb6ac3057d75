// Synthesizes three stems, plans a scene from a prompt, renders it and
// checks the result. Writes quickstart_mix.wav and quickstart_plan.json
// into the current directory (or the directory given as argv[1]).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include "stase/stase.hpp"

using namespace stase;
namespace fs = std::filesystem;

namespace {

constexpr int kRate = 48000;

// Karplus-Strong plucks, one every half second.
AudioBuffer pluck(double freq, double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const auto period = static_cast<std::size_t>(kRate / freq);
  std::vector<double> x(static_cast<std::size_t>(seconds * kRate), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i % (kRate / 2) < period)
      x[i] = u(rng);
    else
      x[i] = 0.996 * 0.5 * (x[i - period] + x[i - period - 1]);
  }
  return AudioBuffer::mono(std::move(x), kRate);
}

AudioBuffer hits(double seconds) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.2);
  std::vector<double> x(static_cast<std::size_t>(seconds * kRate));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = n(rng) * std::exp(-30.0 * std::fmod(double(i) / kRate, 0.25));
  return AudioBuffer::mono(std::move(x), kRate);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_dir = argc > 1 ? argv[1] : ".";
  const fs::path data = STASE_DATA_DIR;
  try {
    std::map<std::string, AudioBuffer> stems;
    stems.emplace("guitar", pluck(196.0, 3.0, 1));
    stems.emplace("bass", pluck(82.4, 3.0, 2));
    stems.emplace("drums", hits(3.0));

    std::vector<StemInfo> infos;
    for (const auto& [id, _] : stems) infos.push_back({id, text::infer_instrument(id)});

    const auto templates = load_bank(data / "templates.json");
    const auto hrir = load_hrir_bank(data / "hrir" / "manifest.json");
    const auto rir = load_rir_bank(data / "rir" / "manifest.json");

    PlanContext ctx;
    ctx.rir_catalog = rir.infos();
    const std::string prompt = "rock band in a small club, guitar at 40 degrees, drums behind";
    const auto outcome = build_plan(prompt, infos, RuleBased{}, templates, ctx);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';

    std::ofstream(out_dir / "quickstart_plan.json") << to_json(outcome.plan).dump(2) << '\n';
    for (const auto& s : outcome.plan.sources)
      std::cout << s.source_id << ": az " << s.azimuth_deg << ", el " << s.elevation_deg << ", " << s.distance_m
                << " m, " << to_string(s.mode) << '\n';

    const auto result = render(outcome.plan, stems, hrir, rir);
    wav::write_wav(result.mix, out_dir / "quickstart_mix.wav", wav::BitDepth::Float32);
    std::cout << "wrote " << (out_dir / "quickstart_mix.wav").string() << " (" << result.mix.frames() << " frames)\n";

    const auto report = analysis::analyze_render(outcome.plan, stems, hrir, rir);
    std::cout << analysis::to_table(report);
    return report.all_within() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}

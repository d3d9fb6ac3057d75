#pragma once

#include <chrono>
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "stase/stase.hpp"

namespace testing {

inline const std::filesystem::path kDataDir = STASE_DATA_DIR;
inline const std::filesystem::path kTestDir = STASE_TEST_DIR;

// Uniform in [-amp, amp) from raw generator bits (portable across standard libraries).
inline std::vector<double> noise(std::size_t n, std::uint64_t seed, double amp = 0.5) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = amp * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  return x;
}

inline std::vector<double> impulse(std::size_t n, std::size_t at = 0, double value = 1.0) {
  std::vector<double> x(n, 0.0);
  x.at(at) = value;
  return x;
}

// O(N*M) reference convolution.
inline std::vector<double> direct_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  return y;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline const stase::HrirBank& shipped_hrir() {
  static const auto bank = stase::load_hrir_bank(kDataDir / "hrir" / "manifest.json");
  return bank;
}

inline const stase::RirBank& shipped_rir() {
  static const auto bank = stase::load_rir_bank(kDataDir / "rir" / "manifest.json");
  return bank;
}

inline const stase::TemplateBank& shipped_templates() {
  static const auto bank = stase::load_bank(kDataDir / "templates.json");
  return bank;
}

inline stase::SourcePlacement source(std::string id, double az, stase::LocalizationMode mode, double el = 0.0,
                                     double dist = 1.0, double send = 0.0) {
  stase::SourcePlacement s;
  s.source_id = std::move(id);
  s.instrument = s.source_id;
  s.azimuth_deg = az;
  s.elevation_deg = el;
  s.distance_m = dist;
  s.mode = mode;
  s.reverb_send = send;
  return s;
}

// Plan with no reverb return.
inline stase::SpatialPlan dry_plan(std::vector<stase::SourcePlacement> sources,
                                   stase::OutputFormat format = stase::OutputFormat::Binaural, int rate = 48000) {
  stase::SpatialPlan p;
  p.sources = std::move(sources);
  p.reverb = stase::ReverbSpec{stase::Algorithmic{1.0, 0.0}, 0.0};
  p.output = {rate, format};
  return p;
}

inline stase::RenderConfig no_normalize() {
  stase::RenderConfig c;
  c.normalize_peak_dbfs.reset();
  return c;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("stase_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

namespace testing {

// Compares parse_cues on every line of the prompt corpus with its expected
// parse. Returns one message per mismatching prompt.
inline std::vector<std::string> prompt_corpus_mismatches() {
  using stase::Json;
  std::ifstream lines_in(kTestDir / "fixtures" / "prompts_fixture.txt");
  std::ifstream json_in(kTestDir / "fixtures" / "prompts_fixture.json");
  if (!lines_in || !json_in) return {"corpus files missing"};
  const auto expected = Json::parse(json_in);
  std::vector<std::string> prompts;
  for (std::string line; std::getline(lines_in, line);) prompts.push_back(line);
  if (prompts.size() != expected.size()) return {"line count differs from expected parses"};

  auto num_eq = [](const std::optional<double>& got, const Json& e, const char* key) {
    if (!e.contains(key)) return !got.has_value();
    return got.has_value() && std::abs(*got - e[key].get<double>()) <= 1e-9;
  };
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto& exp = expected[i];
    if (exp["prompt"].get<std::string>() != prompts[i]) {
      bad.push_back("line " + std::to_string(i + 1) + ": prompt text differs");
      continue;
    }
    const auto cues = stase::prompt::parse_cues(prompts[i]);
    bool ok = cues.size() == exp["cues"].size();
    for (std::size_t k = 0; ok && k < cues.size(); ++k) {
      const auto& c = cues[k];
      const auto& e = exp["cues"][k];
      ok = c.instrument == e["instrument"].get<std::string>() && num_eq(c.azimuth_deg, e, "azimuth_deg") &&
           num_eq(c.elevation_deg, e, "elevation_deg") && num_eq(c.distance_m, e, "distance_m") &&
           c.slight == e.value("slight", false) &&
           (c.direction_word ? e.value("direction_word", "") == stase::prompt::to_string(*c.direction_word)
                             : !e.contains("direction_word"));
    }
    if (!ok) bad.push_back("line " + std::to_string(i + 1) + ": " + prompts[i]);
  }
  return bad;
}

}  // namespace testing

namespace testing {

inline std::vector<std::pair<std::string, std::string>> canonical_queries() {
  std::ifstream in(kTestDir / "fixtures" / "canonical_queries.tsv");
  std::vector<std::pair<std::string, std::string>> out;
  for (std::string line; std::getline(in, line);) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

// Queries whose rank-1 template on the shipped bank is not the expected one.
inline std::vector<std::string> retrieval_misses() {
  std::vector<std::string> misses;
  const auto queries = canonical_queries();
  if (queries.size() != 10) return {"expected 10 canonical queries"};
  for (const auto& [q, id] : queries) {
    const auto r = shipped_templates().retrieve(q, 1);
    if (r.ranking.empty() || r.ranking[0].template_id != id)
      misses.push_back(q + " -> " + (r.ranking.empty() ? std::string("nothing") : r.ranking[0].template_id));
  }
  return misses;
}

}  // namespace testing

namespace testing {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// Runs argv through the shell with stdout/stderr captured to files in `dir`.
inline CommandResult run_command(const std::vector<std::string>& argv, const std::filesystem::path& dir) {
  std::string cmd;
  for (const auto& a : argv) cmd += shell_quote(a) + " ";
  const auto out = dir / "cmd.out";
  const auto err = dir / "cmd.err";
  cmd += "> " + shell_quote(out.string()) + " 2> " + shell_quote(err.string());
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Writes a directory of 16-bit mono stems: decaying noise bursts.
inline std::filesystem::path write_stems(const std::filesystem::path& dir, const std::vector<std::string>& ids,
                                         int rate = 48000, std::size_t frames = 24000) {
  std::filesystem::create_directories(dir);
  std::uint64_t seed = 7;
  for (const auto& id : ids) {
    auto x = noise(frames, seed++, 0.4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= std::exp(-3.0 * static_cast<double>(i) / frames);
    stase::wav::write_wav(stase::AudioBuffer::mono(std::move(x), rate), dir / (id + ".wav"), stase::wav::BitDepth::Pcm16);
  }
  return dir;
}

}  // namespace testing

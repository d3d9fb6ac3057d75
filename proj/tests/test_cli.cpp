#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace stase;
namespace fs = std::filesystem;

namespace {

const std::string kCli = STASE_CLI_PATH;
const std::string kFixtures = STASE_FIXTURES_PATH;
const std::string kLeadPrompt = "place the lead guitar at 45° azimuth, 10 m distance";

testing::CommandResult cli(const std::vector<std::string>& args, const fs::path& dir) {
  std::vector<std::string> argv = {kCli};
  argv.insert(argv.end(), args.begin(), args.end());
  return testing::run_command(argv, dir);
}

void write_json(const fs::path& p, const Json& j) { std::ofstream(p) << j.dump(2); }

}  // namespace

TEST_CASE("plan, render and analyze the lead guitar prompt", "[cli]") {
  testing::TempDir tmp;
  const auto stems = testing::write_stems(tmp.path() / "stems", {"guitar"});
  const auto plan_path = tmp.path() / "plan.json";
  const auto mix_path = tmp.path() / "mix.wav";

  auto r = cli({"plan", "--prompt", kLeadPrompt, "--stems", stems.string(), "--out", plan_path.string()}, tmp.path());
  REQUIRE(r.exit_code == 0);
  const auto plan = plan_from_json_text(testing::slurp(plan_path));
  REQUIRE(plan.sources.size() == 1);
  CHECK(plan.sources[0].azimuth_deg == 45.0);
  CHECK(plan.sources[0].distance_m == 10.0);
  CHECK(plan.sources[0].mode == select_mode(45.0, 0.0, plan.output.format));

  r = cli({"render", "--plan", plan_path.string(), "--stems", stems.string(), "--out", mix_path.string(), "--trace"},
          tmp.path());
  REQUIRE(r.exit_code == 0);
  const auto mix = wav::read_wav(mix_path);
  CHECK(mix.channel_count() == 2);
  CHECK(mix.sample_rate() == 48000);
  const auto trace = Json::parse(testing::slurp(tmp.path() / "mix.trace.json"));
  CHECK(trace["sources"][0]["mode"] == to_string(plan.sources[0].mode));

  const auto report_path = tmp.path() / "report.json";
  r = cli({"analyze", "--plan", plan_path.string(), "--stems", stems.string(), "--report", report_path.string()},
          tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("guitar") != std::string::npos);
  const auto report = Json::parse(testing::slurp(report_path));
  CHECK(report["sources"][0]["within_tolerance"] == true);
}

TEST_CASE("plan and render are byte-for-byte deterministic", "[cli][determinism]") {
  testing::TempDir tmp;
  const auto stems = testing::write_stems(tmp.path() / "stems", {"drums", "bass", "vocals"});
  std::vector<std::string> plans, mixes;
  for (int run = 0; run < 2; ++run) {
    const auto dir = tmp.path() / ("run" + std::to_string(run));
    fs::create_directories(dir);
    REQUIRE(cli({"plan", "--prompt", "rock band on stage, drums behind", "--stems", stems.string(), "--out",
                 (dir / "plan.json").string()},
                dir)
                .exit_code == 0);
    REQUIRE(cli({"render", "--plan", (dir / "plan.json").string(), "--stems", stems.string(), "--out",
                 (dir / "mix.wav").string()},
                dir)
                .exit_code == 0);
    plans.push_back(testing::slurp(dir / "plan.json"));
    mixes.push_back(testing::slurp(dir / "mix.wav"));
  }
  CHECK(plans[0] == plans[1]);
  CHECK(mixes[0] == mixes[1]);
  CHECK_FALSE(mixes[0].empty());
}

TEST_CASE("render errors exit 2 with the error name", "[cli][errors]") {
  testing::TempDir tmp;
  const auto stems = testing::write_stems(tmp.path() / "stems", {"guitar"});
  auto plan = testing::dry_plan({testing::source("guitar", 10, LocalizationMode::ItdIld)});
  plan.reverb = ReverbSpec{RirConvolution{"moon_base"}, 0.3};
  write_json(tmp.path() / "plan.json", to_json(plan));
  auto r = cli({"render", "--plan", (tmp.path() / "plan.json").string(), "--stems", stems.string(), "--out",
                (tmp.path() / "mix.wav").string()},
               tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("UnknownRir") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp.path() / "mix.wav"));

  plan = testing::dry_plan({testing::source("violin", 10, LocalizationMode::ItdIld)});
  write_json(tmp.path() / "plan2.json", to_json(plan));
  r = cli({"render", "--plan", (tmp.path() / "plan2.json").string(), "--stems", stems.string(), "--out",
           (tmp.path() / "mix.wav").string()},
          tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("MissingStem") != std::string::npos);

  std::ofstream(tmp.path() / "bad.json") << "{not json";
  r = cli({"render", "--plan", (tmp.path() / "bad.json").string(), "--stems", stems.string(), "--out",
           (tmp.path() / "mix.wav").string()},
          tmp.path());
  CHECK(r.exit_code == 2);
}

TEST_CASE("plan errors", "[cli][errors]") {
  testing::TempDir tmp;
  fs::create_directories(tmp.path() / "empty");
  auto r = cli({"plan", "--prompt", "anything", "--stems", (tmp.path() / "empty").string(), "--out",
                (tmp.path() / "p.json").string()},
               tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("NoStems") != std::string::npos);

  testing::write_stems(tmp.path() / "mixed", {"a"}, 48000);
  testing::write_stems(tmp.path() / "mixed_b", {"b"}, 44100);
  fs::copy_file(tmp.path() / "mixed_b" / "b.wav", tmp.path() / "mixed" / "b.wav");
  r = cli({"plan", "--prompt", "anything", "--stems", (tmp.path() / "mixed").string(), "--out",
           (tmp.path() / "p.json").string()},
          tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("SampleRateMismatch") != std::string::npos);

  r = cli({"plan", "--prompt", "   ", "--stems", (tmp.path() / "mixed_b").string(), "--out",
           (tmp.path() / "p.json").string()},
          tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("EmptyPrompt") != std::string::npos);
}

TEST_CASE("analyze exit codes", "[cli][analyze]") {
  testing::TempDir tmp;
  const auto stems = testing::write_stems(tmp.path() / "stems", {"a", "b"});
  const auto plan = testing::dry_plan(
      {testing::source("a", 60, LocalizationMode::ItdIld), testing::source("b", -30, LocalizationMode::ItdIld)});
  write_json(tmp.path() / "plan.json", to_json(plan));

  auto r = cli({"analyze", "--plan", (tmp.path() / "plan.json").string(), "--stems", stems.string()}, tmp.path());
  CHECK(r.exit_code == 0);

  write_json(tmp.path() / "no_delay.json", {{"disable_itd_delay", true}});
  r = cli({"analyze", "--plan", (tmp.path() / "plan.json").string(), "--stems", stems.string(), "--config",
           (tmp.path() / "no_delay.json").string()},
          tmp.path());
  CHECK(r.exit_code == 1);

  SpatialPlan empty = testing::dry_plan({});
  write_json(tmp.path() / "empty.json", to_json(empty));
  r = cli({"analyze", "--plan", (tmp.path() / "empty.json").string(), "--report", (tmp.path() / "r.json").string()},
          tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(Json::parse(testing::slurp(tmp.path() / "r.json"))["sources"].empty());

  write_json(tmp.path() / "bad_cfg.json", {{"ild_max", 3}});
  r = cli({"analyze", "--plan", (tmp.path() / "plan.json").string(), "--stems", stems.string(), "--config",
           (tmp.path() / "bad_cfg.json").string()},
          tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("ConfigError") != std::string::npos);
}

TEST_CASE("templates subcommand", "[cli][templates]") {
  testing::TempDir tmp;
  auto r = cli({"templates", "list"}, tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 10);
  CHECK(r.out.find("classical_orchestra") != std::string::npos);

  r = cli({"templates", "show", "jazz_ensemble"}, tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(Json::parse(r.out)["template_id"] == "jazz_ensemble");

  r = cli({"templates", "show", "polka_band"}, tmp.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("UnknownTemplate") != std::string::npos);
}

TEST_CASE("usage errors", "[cli]") {
  testing::TempDir tmp;
  CHECK(cli({}, tmp.path()).exit_code == 2);
  CHECK(cli({"render"}, tmp.path()).exit_code == 2);
  CHECK(cli({"plan", "--prompt", "x", "--stems", ".", "--out", "p.json", "--backend", "magic"}, tmp.path()).exit_code == 2);
  CHECK(cli({"--help"}, tmp.path()).exit_code == 0);
  CHECK(cli({"render", "--help"}, tmp.path()).exit_code == 0);
}

TEST_CASE("remote backend without an endpoint still plans", "[cli]") {
  testing::TempDir tmp;
  const auto stems = testing::write_stems(tmp.path() / "stems", {"piano"});
  ::unsetenv("STASE_LLM_ENDPOINT");
  auto r = cli({"plan", "--prompt", "solo piano recital", "--stems", stems.string(), "--out",
                (tmp.path() / "p.json").string(), "--backend", "remote"},
               tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("fixture generator reproduces the shipped banks", "[cli][fixtures]") {
  testing::TempDir tmp;
  const auto r = testing::run_command({kFixtures, "--out", tmp.path().string()}, tmp.path());
  REQUIRE(r.exit_code == 0);
  for (const char* sub : {"hrir", "rir"}) {
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(testing::kDataDir / sub)) {
      ++files;
      const auto regenerated = tmp.path() / sub / e.path().filename();
      INFO(regenerated.string());
      REQUIRE(fs::exists(regenerated));
      CHECK(testing::slurp(regenerated) == testing::slurp(e.path()));
    }
    CHECK(files > 0);
  }
}

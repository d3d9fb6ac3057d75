// stase: plan, render, analyze, templates.
//
// Exit codes: 0 success, 1 analysis outside tolerance, 2 error.
// Data goes to stdout and files; diagnostics go to stderr.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stase/stase.hpp"

namespace fs = std::filesystem;
using namespace stase;

namespace {

#ifndef STASE_DATA_DIR
#define STASE_DATA_DIR "data"
#endif

const fs::path kDataDir = STASE_DATA_DIR;

struct Stem {
  std::string id;
  fs::path path;
};

std::vector<Stem> list_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "stems directory not found: " + dir.string());
  std::vector<Stem> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = text::to_lower(e.path().extension().string());
    if (ext == ".wav") out.push_back({e.path().stem().string(), e.path()});
  }
  std::sort(out.begin(), out.end(), [](const Stem& a, const Stem& b) { return a.id < b.id; });
  if (out.empty()) throw Error(ErrorCode::NoStems, "no .wav files in " + dir.string());
  return out;
}

std::map<std::string, AudioBuffer> load_stems(const fs::path& dir) {
  std::map<std::string, AudioBuffer> out;
  for (const auto& s : list_stems(dir)) out.emplace(s.id, wav::read_wav(s.path));
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

struct PlanArgs {
  std::string prompt, stems, templates = (kDataDir / "templates.json").string(), out, backend = "rule";
};

int run_plan(const PlanArgs& a) {
  const auto stems = list_stems(a.stems);
  std::vector<StemInfo> infos;
  PlanContext ctx;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    const auto rate = wav::read_wav(stems[i].path).sample_rate();
    if (i == 0) ctx.sample_rate_hz = rate;
    else if (rate != ctx.sample_rate_hz)
      throw Error(ErrorCode::SampleRateMismatch, "stem '" + stems[i].id + "' sample rate differs from '" + stems[0].id + "'");
    infos.push_back({stems[i].id, ""});
  }
  const auto rir_manifest = kDataDir / "rir" / "manifest.json";
  if (fs::exists(rir_manifest)) ctx.rir_catalog = load_rir_catalog(rir_manifest);

  ConductorBackend backend = RuleBased{};
  if (a.backend == "remote") {
    backend = backend_from_env();
    if (std::holds_alternative<RuleBased>(backend))
      std::cerr << "warning: --backend remote but STASE_LLM_ENDPOINT is not set; using rule-based planning\n";
  }
  const auto bank = load_bank(a.templates);
  const auto outcome = build_plan(a.prompt, infos, backend, bank, ctx);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  write_text(a.out, to_json(outcome.plan).dump(2) + "\n");
  return 0;
}

struct RenderArgs {
  std::string plan, stems, hrir = (kDataDir / "hrir" / "manifest.json").string(),
                           rir = (kDataDir / "rir" / "manifest.json").string(), out, config;
  bool trace = false;
};

EngineConfig config_or_default(const std::string& path) { return path.empty() ? EngineConfig{} : load_config(path); }

int run_render(const RenderArgs& a) {
  const auto cfg = config_or_default(a.config);
  const auto plan = plan_from_json_text(read_text(a.plan));
  const auto stems = load_stems(a.stems);
  const auto hrir = load_hrir_bank(a.hrir);
  const auto rir = load_rir_bank(a.rir);
  const auto result = render(plan, stems, hrir, rir, cfg.render);
  wav::write_wav(result.mix, a.out, wav::BitDepth::Float32);
  if (a.trace) {
    fs::path trace_path = a.out;
    trace_path.replace_extension(".trace.json");
    write_text(trace_path, to_json(result.trace).dump(2) + "\n");
  }
  return 0;
}

struct AnalyzeArgs {
  std::string plan, stems, hrir = (kDataDir / "hrir" / "manifest.json").string(),
                           rir = (kDataDir / "rir" / "manifest.json").string(), report, config;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto cfg = config_or_default(a.config);
  const auto plan = plan_from_json_text(read_text(a.plan));
  analysis::Report report;
  report.tolerance_deg = cfg.analysis_tolerance_deg;
  if (!plan.sources.empty())
    report = analysis::analyze_render(plan, load_stems(a.stems), load_hrir_bank(a.hrir), load_rir_bank(a.rir),
                                      cfg.render, cfg.analysis_tolerance_deg);
  if (!a.report.empty()) write_text(a.report, analysis::to_json(report).dump(2) + "\n");
  std::cout << analysis::to_table(report);
  if (!report.all_within()) {
    std::cerr << "analysis: source(s) deviate beyond " << report.tolerance_deg << " deg\n";
    return 1;
  }
  return 0;
}

int run_templates(const std::string& templates, const std::string& action, const std::string& id) {
  const auto bank = load_bank(templates);
  if (action == "list") {
    for (const auto& t : bank.templates()) std::cout << t.template_id << "\t" << t.name << "\n";
    return 0;
  }
  if (id.empty()) throw Error(ErrorCode::UnknownTemplate, "templates show needs an ID");
  const auto* t = bank.find(id);
  if (t == nullptr) throw Error(ErrorCode::UnknownTemplate, "no template '" + id + "'");
  std::cout << to_json(*t).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-guided spatial audio: plan, render and verify stereo/binaural mixes"};
  app.require_subcommand(1);

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Build a spatial plan from a prompt and a stems directory");
  plan->add_option("--prompt", pa.prompt, "Text prompt")->required();
  plan->add_option("--stems", pa.stems, "Directory of mono WAV stems")->required();
  plan->add_option("--templates", pa.templates, "Template bank JSON");
  plan->add_option("--out", pa.out, "Output plan JSON")->required();
  plan->add_option("--backend", pa.backend, "Planner backend")->check(CLI::IsMember({"rule", "remote"}));

  RenderArgs ra;
  auto* rend = app.add_subcommand("render", "Render a plan to a stereo WAV");
  rend->add_option("--plan", ra.plan, "Plan JSON")->required();
  rend->add_option("--stems", ra.stems, "Directory of mono WAV stems")->required();
  rend->add_option("--hrir", ra.hrir, "HRIR bank manifest");
  rend->add_option("--rir", ra.rir, "RIR bank manifest");
  rend->add_option("--out", ra.out, "Output WAV (32-bit float)")->required();
  rend->add_flag("--trace", ra.trace, "Also write <out>.trace.json");
  rend->add_option("--config", ra.config, "Engine config JSON");

  AnalyzeArgs aa;
  auto* anal = app.add_subcommand("analyze", "Render each source solo and check its measured azimuth");
  anal->add_option("--plan", aa.plan, "Plan JSON")->required();
  anal->add_option("--stems", aa.stems, "Directory of mono WAV stems");
  anal->add_option("--hrir", aa.hrir, "HRIR bank manifest");
  anal->add_option("--rir", aa.rir, "RIR bank manifest");
  anal->add_option("--report", aa.report, "Report JSON output");
  anal->add_option("--config", aa.config, "Engine config JSON");

  std::string templates_path = (kDataDir / "templates.json").string(), action, id;
  auto* tpl = app.add_subcommand("templates", "List templates or show one");
  tpl->add_option("action", action, "list | show")->required()->check(CLI::IsMember({"list", "show"}));
  tpl->add_option("id", id, "Template id for show");
  tpl->add_option("--templates", templates_path, "Template bank JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*plan) return run_plan(pa);
    if (*rend) return run_render(ra);
    if (*anal) return run_analyze(aa);
    if (*tpl) return run_templates(templates_path, action, id);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

// aic3: command-line front end for the study toolkit.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>

#include "CLI11.hpp"

#include "aic3/design.hpp"
#include "aic3/errors.hpp"
#include "aic3/hash.hpp"
#include "aic3/http_api.hpp"
#include "aic3/pipeline.hpp"
#include "aic3/records.hpp"
#include "aic3/report.hpp"
#include "aic3/scale_analysis.hpp"
#include "aic3/service.hpp"
#include "aic3/simulate.hpp"
#include "aic3/stimulus_prep.hpp"

namespace fs = std::filesystem;
using namespace aic3;

namespace {

StudyServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const DesignError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const AnalysisError*>(&e)) return 4;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JPEG AIC-3 subjective study toolkit"};
  app.require_subcommand(0, 1);

  std::uint64_t seed = 0;
  fs::path config_path;
  fs::path out_dir = ".";
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.add_option("--config", config_path, "Pipeline config (JSON)");
  app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  app.fallthrough();

  // prep
  auto* prep = app.add_subcommand("prep", "Build boosted stimuli from a plain stimulus tree");
  fs::path src_dir;
  BoostConfig boost;
  bool no_zoom = false;
  prep->add_option("--src-dir", src_dir, "Tree of <source>/<codec>/<level>_plain.png")->required()->check(CLI::ExistingDirectory);
  prep->add_option("--factor", boost.amplification_factor, "Artifact amplification factor")->capture_default_str();
  prep->add_flag("--no-zoom", no_zoom, "Skip the 2x zoom");
  prep->add_option("--taps", boost.lanczos_taps, "Lanczos taps")->capture_default_str();

  // design
  auto* design = app.add_subcommand("design", "Generate a question design manifest");
  std::string protocol_name = "btc";
  fs::path design_out;
  design->add_option("--protocol", protocol_name, "btc or ptc")->check(CLI::IsMember({"btc", "ptc"}))->capture_default_str();
  design->add_option("--out", design_out, "Manifest path (default <out-dir>/design_<protocol>.jsonl)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate a crowd campaign against a design");
  fs::path sim_design, truth_path, sim_out;
  double jnd_per_level = 0.25, gain_a = 2.0, gain_b = 0.0, band = 0.2;
  CampaignOptions campaign;
  campaign.n_workers = 300;
  simulate->add_option("--design", sim_design, "Design manifest")->required()->check(CLI::ExistingFile);
  simulate->add_option("--truth", truth_path, "Ground-truth JSON")->check(CLI::ExistingFile);
  simulate->add_option("--jnd-per-level", jnd_per_level, "Linear truth when --truth is absent")->capture_default_str();
  simulate->add_option("--gain-a", gain_a, "Boost gain a (linear truth)")->capture_default_str();
  simulate->add_option("--gain-b", gain_b, "Boost gain b (linear truth)")->capture_default_str();
  simulate->add_option("--not-sure-band", band, "Not-sure band in JND (linear truth)")->capture_default_str();
  simulate->add_option("--workers", campaign.n_workers, "Number of workers")->capture_default_str();
  simulate->add_option("--unreliable-fraction", campaign.mix.unreliable_fraction, "Share of unreliable workers")->capture_default_str();
  simulate->add_option("--unreliable-lapse", campaign.mix.unreliable.lapse_rate)->capture_default_str();
  simulate->add_option("--unreliable-right-bias", campaign.mix.unreliable.right_bias)->capture_default_str();
  simulate->add_option("--out", sim_out, "Export CSV path (default <out-dir>/responses_<protocol>.csv)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the study service");
  std::vector<fs::path> serve_designs;
  fs::path stimuli_root, db_path = "study.sqlite";
  std::string host = "127.0.0.1";
  int port = 8080;
  CampaignConfig campaign_config;
  serve->add_option("--design", serve_designs, "Design manifest(s)")->required()->check(CLI::ExistingFile);
  serve->add_option("--stimuli", stimuli_root, "Prepared stimulus store")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--db", db_path, "SQLite database")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--campaign", campaign_config.campaign_id)->capture_default_str();
  serve->add_option("--quota", campaign_config.batch_quota, "Workers per batch")->capture_default_str();
  serve->add_option("--max-assignments", campaign_config.max_assignments, "0 = unlimited")->capture_default_str();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Filter responses, reconstruct and align scales");
  std::vector<fs::path> an_designs, an_responses;
  AnalysisConfig analysis;
  std::string granularity = "auto";
  analyze_cmd->add_option("--design", an_designs, "Design manifest(s)")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--responses", an_responses, "Export CSV(s)")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--bootstrap", analysis.bootstrap_samples, "Bootstrap replicates (0 disables)")->capture_default_str();
  analyze_cmd->add_option("--threshold", analysis.reliability_threshold, "Batch reliability threshold")->capture_default_str();
  analyze_cmd->add_option("--granularity", granularity, "auto|global|per_source|per_codec|per_pair")->capture_default_str();
  analyze_cmd->add_option("--threads", analysis.threads, "Worker threads (0 = all cores)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run stages from a config file");
  fs::path verify_manifest;
  pipeline->add_option("--verify", verify_manifest, "Check a run manifest against its outputs")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prep) {
      boost.zoom_enabled = !no_zoom;
      boost.validate();
      const auto summary = prepare_store(StimulusStore(src_dir), StimulusStore(out_dir), boost);
      std::cout << "prepared " << summary.stimuli << " stimuli from " << summary.sources << " sources\n";
    } else if (*design) {
      const auto protocol = parse_protocol(protocol_name);
      auto config = DesignConfig::standard();
      config.rng_seed = seed;
      if (design_out.empty()) design_out = out_dir / ("design_" + protocol_name + ".jsonl");
      if (design_out.has_parent_path()) fs::create_directories(design_out.parent_path());
      const auto batches = generate_design(config, protocol);
      write_file_atomic(design_out, manifest_string(batches));
      std::size_t n = 0;
      for (const auto& b : batches) n += b.questions.size();
      std::cout << "wrote " << n << " questions in " << batches.size() << " batches to " << design_out.string() << "\n";
    } else if (*simulate) {
      const auto index = DesignIndex::load(sim_design);
      if (index.questions().empty()) throw InputError("design manifest is empty");
      GroundTruth truth;
      if (!truth_path.empty()) {
        truth = GroundTruth::load(truth_path);
      } else {
        auto config = DesignConfig::standard();
        config.sources = index.source_ids();
        truth = GroundTruth::linear(config, jnd_per_level, BoostGain{gain_a, gain_b});
        truth.not_sure_band = band;
      }
      campaign.seed = seed;
      const auto result = simulate_campaign(index, truth, campaign);
      const std::string protocol(to_string(index.questions().front().protocol));
      if (sim_out.empty()) sim_out = out_dir / ("responses_" + protocol + ".csv");
      if (sim_out.has_parent_path()) fs::create_directories(sim_out.parent_path());
      write_file_atomic(sim_out, export_csv_string(result.responses, index));
      std::cout << "wrote " << result.responses.size() << " responses to " << sim_out.string() << "\n";
    } else if (*serve) {
      DesignIndex index;
      for (const auto& p : serve_designs) index.merge(DesignIndex::load(p));
      StudyService service(std::move(index), db_path, campaign_config);
      StudyServer server(service, stimuli_root);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cout << "serving on http://" << host << ":" << port << std::endl;
      if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
      g_server = nullptr;
    } else if (*analyze_cmd) {
      DesignIndex index;
      for (const auto& p : an_designs) index.merge(DesignIndex::load(p));
      std::vector<ResponseRecord> responses;
      for (const auto& p : an_responses) {
        auto rs = load_export_csv(p, &index);
        responses.insert(responses.end(), rs.begin(), rs.end());
      }
      if (granularity != "auto") analysis.granularity = parse_granularity(granularity);
      analysis.seed = seed;
      const auto result = analyze(responses, index, analysis);
      fs::create_directories(out_dir);
      write_file_atomic(out_dir / "scales.csv", scales_csv(result.results));
      write_file_atomic(out_dir / "alignment.json", alignment_json(result));
      write_file_atomic(out_dir / "report.json", report_json(result));
      std::cout << "kept " << result.filter.kept.size() << " of " << responses.size() << " responses; granularity "
                << (result.alignment ? std::string(to_string(result.alignment->granularity)) : std::string("none")) << "; wrote " << result.results.size()
                << " scale rows to " << out_dir.string() << "\n";
    } else if (*pipeline || !config_path.empty()) {
      if (!verify_manifest.empty()) {
        const auto bad = verify_run(verify_manifest);
        for (const auto& f : bad) std::cerr << "mismatch: " << f << "\n";
        if (!bad.empty()) return 5;
        std::cout << "run manifest verified\n";
        return 0;
      }
      if (config_path.empty()) throw InputError("pipeline needs --config");
      auto config = PipelineConfig::load(config_path);
      if (app.get_option("--seed")->count() > 0) {
        config.seed = seed;
        config.design.rng_seed = seed;
      }
      if (app.get_option("--out-dir")->count() > 0) config.out_dir = out_dir;
      const auto result = run_pipeline(config);
      for (const auto& [name, path] : result.artifacts) std::cout << name << "\t" << path.string() << "\n";
      std::cout << "run " << result.run_id << "\t" << result.manifest.string() << "\n";
    } else {
      std::cout << app.help();
    }
  } catch (const std::exception& e) {
    std::cerr << "aic3: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}

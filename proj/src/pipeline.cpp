#include "aic3/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "aic3/errors.hpp"
#include "aic3/hash.hpp"
#include "aic3/records.hpp"
#include "aic3/report.hpp"
#include "aic3/scale_analysis.hpp"

namespace aic3 {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

bool has_stage(const PipelineConfig& c, const std::string& s) {
  return std::find(c.stages.begin(), c.stages.end(), s) != c.stages.end();
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() || base.empty() ? p : base / p; }

std::string stage_error(const std::string& stage, const std::string& what) { return "stage '" + stage + "' failed: " + what; }

}  // namespace

PipelineConfig PipelineConfig::parse(const std::string& json_text, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    const auto j = json::parse(json_text);
    if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j.at("out_dir").get<std::string>());
    c.seed = j.value("seed", c.seed);
    if (j.contains("stages")) c.stages = j.at("stages").get<std::vector<std::string>>();
    for (const auto& s : c.stages)
      if (s != "prep" && s != "design" && s != "simulate" && s != "analyze") throw InputError("unknown stage '" + s + "'");
    if (j.contains("protocols")) {
      c.protocols.clear();
      for (const auto& p : j.at("protocols")) c.protocols.push_back(parse_protocol(p.get<std::string>()));
    }
    if (j.contains("design")) {
      const auto& d = j.at("design");
      if (d.contains("sources")) c.design.sources = d.at("sources").get<std::vector<std::string>>();
      if (d.contains("codecs")) c.design.codecs = d.at("codecs").get<std::vector<std::string>>();
      c.design.cross_codec_ratio = d.value("cross_codec_ratio", c.design.cross_codec_ratio);
      c.design.n_batches = d.value("n_batches", c.design.n_batches);
    }
    c.design.rng_seed = c.seed;
    if (j.contains("prep")) {
      const auto& p = j.at("prep");
      c.stimuli_in = resolve(base_dir, p.at("src_dir").get<std::string>());
      c.stimuli_out = resolve(base_dir, p.at("out_dir").get<std::string>());
      c.boost.amplification_factor = p.value("factor", c.boost.amplification_factor);
      c.boost.zoom_enabled = p.value("zoom", c.boost.zoom_enabled);
      c.boost.lanczos_taps = p.value("lanczos_taps", c.boost.lanczos_taps);
    }
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      if (t.contains("path")) c.truth_path = resolve(base_dir, t.at("path").get<std::string>());
      c.jnd_per_level = t.value("jnd_per_level", c.jnd_per_level);
      c.not_sure_band = t.value("not_sure_band", c.not_sure_band);
      if (t.contains("gain")) c.gain = BoostGain{t.at("gain").at("a").get<double>(), t.at("gain").at("b").get<double>()};
    }
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      if (s.contains("workers"))
        for (const auto& [k, v] : s.at("workers").items()) c.workers[parse_protocol(k)] = v.get<int>();
      c.mix.unreliable_fraction = s.value("unreliable_fraction", c.mix.unreliable_fraction);
      c.mix.unreliable.lapse_rate = s.value("unreliable_lapse", c.mix.unreliable.lapse_rate);
      c.mix.unreliable.right_bias = s.value("unreliable_right_bias", c.mix.unreliable.right_bias);
    }
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      if (in.contains("designs"))
        for (const auto& [k, v] : in.at("designs").items()) c.design_paths[parse_protocol(k)] = resolve(base_dir, v.get<std::string>());
      if (in.contains("responses"))
        for (const auto& [k, v] : in.at("responses").items())
          c.response_paths[parse_protocol(k)] = resolve(base_dir, v.get<std::string>());
    }
    if (j.contains("analyze")) {
      const auto& a = j.at("analyze");
      c.bootstrap = a.value("bootstrap", c.bootstrap);
      c.threshold = a.value("threshold", c.threshold);
      c.granularity = a.value("granularity", c.granularity);
      if (c.granularity != "auto") parse_granularity(c.granularity);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return parse(read_file(path), fs::absolute(path).parent_path());
}

std::string PipelineConfig::canonical() const {
  ordered_json j;
  j["seed"] = seed;
  j["stages"] = stages;
  std::vector<std::string> ps;
  for (auto p : protocols) ps.emplace_back(to_string(p));
  j["protocols"] = ps;
  j["design"] = {{"sources", design.sources},
                 {"codecs", design.codecs},
                 {"cross_codec_ratio", design.cross_codec_ratio},
                 {"n_batches", design.n_batches}};
  j["boost"] = {{"factor", boost.amplification_factor}, {"zoom", boost.zoom_enabled}, {"taps", boost.lanczos_taps}};
  j["truth"] = {{"jnd_per_level", jnd_per_level}, {"gain", {gain.a, gain.b}}, {"not_sure_band", not_sure_band}};
  ordered_json w;
  for (const auto& [p, n] : workers) w[std::string(to_string(p))] = n;
  j["workers"] = w;
  j["mix"] = {mix.unreliable_fraction, mix.unreliable.lapse_rate, mix.unreliable.right_bias};
  j["analyze"] = {{"bootstrap", bootstrap}, {"threshold", threshold}, {"granularity", granularity}};
  return j.dump();
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  // Validate every referenced input before any stage runs.
  std::vector<fs::path> inputs;
  if (has_stage(config, "prep")) {
    if (config.stimuli_in.empty() || !fs::is_directory(config.stimuli_in))
      throw InputError("prep: stimulus directory '" + config.stimuli_in.string() + "' does not exist");
    config.boost.validate();
  }
  if (has_stage(config, "simulate") && config.truth_path) {
    if (!fs::exists(*config.truth_path)) throw InputError("truth file '" + config.truth_path->string() + "' does not exist");
    inputs.push_back(*config.truth_path);
  }
  for (auto p : config.protocols) {
    if (!has_stage(config, "design") && (has_stage(config, "simulate") || has_stage(config, "analyze"))) {
      auto it = config.design_paths.find(p);
      if (it == config.design_paths.end() || !fs::exists(it->second))
        throw InputError(std::string("design manifest for ") + std::string(to_string(p)) + " is missing");
      inputs.push_back(it->second);
    }
    if (!has_stage(config, "simulate") && has_stage(config, "analyze")) {
      auto it = config.response_paths.find(p);
      if (it == config.response_paths.end() || !fs::exists(it->second))
        throw InputError(std::string("response CSV for ") + std::string(to_string(p)) + " is missing");
      inputs.push_back(it->second);
    }
  }
  config.design.validate();

  fs::create_directories(config.out_dir);
  ordered_json input_hashes = ordered_json::object();
  for (const auto& in : inputs) input_hashes[in.filename().string()] = sha256_file(in);
  PipelineResult result;
  result.run_id = sha256_hex(config.canonical() + input_hashes.dump()).substr(0, 16);

  std::map<Protocol, fs::path> designs = config.design_paths;
  std::map<Protocol, fs::path> responses = config.response_paths;

  if (has_stage(config, "prep")) {
    try {
      prepare_store(StimulusStore(config.stimuli_in), StimulusStore(config.stimuli_out), config.boost);
    } catch (const std::exception& e) {
      throw std::runtime_error(stage_error("prep", e.what()));
    }
  }

  if (has_stage(config, "design")) {
    try {
      for (auto p : config.protocols) {
        const auto path = config.out_dir / ("design_" + std::string(to_string(p)) + ".jsonl");
        write_file_atomic(path, manifest_string(generate_design(config.design, p)));
        designs[p] = path;
        result.artifacts[path.filename().string()] = path;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(stage_error("design", e.what()));
    }
  }

  if (has_stage(config, "simulate")) {
    try {
      GroundTruth truth;
      if (config.truth_path) {
        truth = GroundTruth::load(*config.truth_path);
      } else {
        truth = GroundTruth::linear(config.design, config.jnd_per_level, config.gain);
        truth.not_sure_band = config.not_sure_band;
        const auto path = config.out_dir / "truth.json";
        truth.save(path);
        result.artifacts["truth.json"] = path;
      }
      for (auto p : config.protocols) {
        const auto design = DesignIndex::load(designs.at(p));
        CampaignOptions opt;
        opt.n_workers = config.workers.count(p) ? config.workers.at(p) : 300;
        opt.mix = config.mix;
        opt.seed = config.seed * 2 + (p == Protocol::btc ? 0 : 1);
        const auto sim = simulate_campaign(design, truth, opt);
        const auto path = config.out_dir / ("responses_" + std::string(to_string(p)) + ".csv");
        write_file_atomic(path, export_csv_string(sim.responses, design));
        responses[p] = path;
        result.artifacts[path.filename().string()] = path;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(stage_error("simulate", e.what()));
    }
  }

  if (has_stage(config, "analyze")) {
    try {
      DesignIndex design;
      std::vector<ResponseRecord> all;
      for (auto p : config.protocols) design.merge(DesignIndex::load(designs.at(p)));
      for (auto p : config.protocols) {
        auto rs = load_export_csv(responses.at(p), &design);
        all.insert(all.end(), rs.begin(), rs.end());
      }
      AnalysisConfig ac;
      ac.reliability_threshold = config.threshold;
      ac.bootstrap_samples = config.bootstrap;
      ac.seed = config.seed;
      if (config.granularity != "auto") ac.granularity = parse_granularity(config.granularity);
      const auto analysis = analyze(all, design, ac);
      const auto scales = config.out_dir / "scales.csv";
      const auto align = config.out_dir / "alignment.json";
      const auto report = config.out_dir / "report.json";
      write_file_atomic(scales, scales_csv(analysis.results));
      write_file_atomic(align, alignment_json(analysis, result.run_id));
      write_file_atomic(report, report_json(analysis, result.run_id));
      result.artifacts["scales.csv"] = scales;
      result.artifacts["alignment.json"] = align;
      result.artifacts["report.json"] = report;
    } catch (const std::exception& e) {
      throw std::runtime_error(stage_error("analyze", e.what()));
    }
  }

  ordered_json manifest;
  manifest["tool"] = "aic3";
  manifest["version"] = kToolVersion;
  manifest["run_id"] = result.run_id;
  manifest["seed"] = config.seed;
  manifest["config"] = ordered_json::parse(config.canonical());
  manifest["inputs"] = input_hashes;
  ordered_json outputs = ordered_json::object();
  for (const auto& [name, path] : result.artifacts) outputs[name] = sha256_file(path);
  manifest["outputs"] = outputs;
  result.manifest = config.out_dir / "run_manifest.json";
  const auto text = manifest.dump(2) + "\n";
  write_file_atomic(result.manifest, text);
  write_file_atomic(config.out_dir / "run_manifest.sha256", sha256_hex(text) + "\n");
  return result;
}

std::vector<std::string> verify_run(const fs::path& manifest_path) {
  const auto text = read_file(manifest_path);
  std::vector<std::string> bad;
  const auto sidecar = manifest_path.parent_path() / "run_manifest.sha256";
  if (fs::exists(sidecar)) {
    auto expected = read_file(sidecar);
    expected.erase(expected.find_last_not_of("\r\n") + 1);
    if (expected != sha256_hex(text)) bad.push_back(manifest_path.filename().string());
  }
  const auto manifest = json::parse(text);
  const auto run_id = manifest.at("run_id").get<std::string>();
  for (const auto& [name, hash] : manifest.at("outputs").items()) {
    const auto path = manifest_path.parent_path() / name;
    if (!fs::exists(path) || sha256_file(path) != hash.get<std::string>()) {
      bad.push_back(name);
      continue;
    }
    if (path.extension() == ".json" && name != "truth.json") {
      const auto j = json::parse(read_file(path));
      if (j.value("run_id", std::string()) != run_id) bad.push_back(name);
    }
  }
  return bad;
}

}  // namespace aic3

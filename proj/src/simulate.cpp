#include "aic3/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "aic3/errors.hpp"
#include "aic3/hash.hpp"
#include "aic3/parallel.hpp"
#include "aic3/stats.hpp"

namespace aic3 {

using nlohmann::json;

double GroundTruth::latent(const StimulusKey& key, Protocol protocol) const {
  if (key.is_source()) return 0.0;
  auto it = scale.find(key);
  if (it == scale.end()) throw InputError("ground truth has no stimulus " + to_string(key));
  return protocol == Protocol::btc ? gain_for(key.source_id, key.codec_id).apply(it->second) : it->second;
}

BoostGain GroundTruth::gain_for(const std::string& source_id, const std::string& codec_id) const {
  auto it = boost_gain.find({source_id, codec_id});
  return it == boost_gain.end() ? BoostGain{} : it->second;
}

void GroundTruth::validate() const {
  if (!(lapse_rate >= 0.0 && lapse_rate <= 1.0)) throw InputError("lapse_rate must lie in [0, 1]");
  if (!(not_sure_band >= 0.0)) throw InputError("not_sure_band must be >= 0");
  for (const auto& [key, v] : scale)
    if (key.is_source() && v != 0.0) throw InputError("source stimulus " + to_string(key) + " must have scale 0");
}

GroundTruth GroundTruth::linear(const DesignConfig& config, double jnd_per_level, BoostGain gain) {
  GroundTruth t;
  for (const auto& src : config.sources) {
    t.scale[make_key(src, "", 0)] = 0.0;
    for (const auto& codec : config.codecs) {
      for (int level = 1; level <= kMaxLevel; ++level) t.scale[make_key(src, codec, level)] = jnd_per_level * level;
      t.boost_gain[{src, codec}] = gain;
    }
  }
  return t;
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
  GroundTruth t;
  try {
    const auto j = json::parse(read_file(path));
    t.lapse_rate = j.value("lapse_rate", 0.0);
    t.not_sure_band = j.value("not_sure_band", 0.2);
    for (const auto& s : j.at("scales"))
      t.scale[make_key(s.at("source_id"), s.at("codec_id"), s.at("level"))] = s.at("jnd").get<double>();
    if (j.contains("boost_gain"))
      for (const auto& g : j.at("boost_gain"))
        t.boost_gain[{g.at("source_id"), g.at("codec_id")}] = BoostGain{g.at("a").get<double>(), g.at("b").get<double>()};
  } catch (const json::exception& e) {
    throw InputError("truth file " + path.string() + ": " + e.what());
  }
  t.validate();
  return t;
}

void GroundTruth::save(const std::filesystem::path& path) const {
  json j;
  j["lapse_rate"] = lapse_rate;
  j["not_sure_band"] = not_sure_band;
  j["scales"] = json::array();
  for (const auto& [k, v] : scale)
    j["scales"].push_back({{"source_id", k.source_id}, {"codec_id", k.codec_id}, {"level", k.level}, {"jnd", v}});
  j["boost_gain"] = json::array();
  for (const auto& [k, g] : boost_gain)
    j["boost_gain"].push_back({{"source_id", k.first}, {"codec_id", k.second}, {"a", g.a}, {"b", g.b}});
  write_file_atomic(path, j.dump(2) + "\n");
}

Answer simulate_response(const TripletQuestion& question, const GroundTruth& truth, Rng& rng) {
  return simulate_response(question, truth, ObserverProfile{truth.lapse_rate, truth.not_sure_band, 0.0}, rng);
}

Answer simulate_response(const TripletQuestion& question, const GroundTruth& truth, const ObserverProfile& observer,
                         Rng& rng) {
  const double unit = thurstone_units_per_jnd();
  const double mean = unit * (truth.latent(question.left, question.protocol) -
                              truth.latent(question.right, question.protocol));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double d = mean + noise(rng);
  Answer answer = Answer::not_sure;
  if (std::abs(d) >= observer.not_sure_band * unit) answer = d > 0.0 ? Answer::left : Answer::right;

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (u01(rng) < observer.lapse_rate) {
    if (u01(rng) < observer.right_bias) return Answer::right;
    static constexpr Answer kAll[] = {Answer::left, Answer::right, Answer::not_sure};
    return kAll[std::uniform_int_distribution<int>(0, 2)(rng)];
  }
  return answer;
}

SimulatedCampaign simulate_campaign(const DesignIndex& design, const GroundTruth& truth,
                                    const CampaignOptions& options) {
  truth.validate();
  if (design.questions().empty()) throw InputError("simulate_campaign: empty design");
  if (options.n_workers < 0) throw InputError("n_workers must be >= 0");
  const auto n_workers = static_cast<std::size_t>(options.n_workers);

  auto master = rng_stream(options.seed, 0);
  auto batch_ids = design.batch_ids();
  std::shuffle(batch_ids.begin(), batch_ids.end(), master);

  std::vector<std::size_t> order(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), master);
  const auto n_unreliable = static_cast<std::size_t>(std::llround(options.mix.unreliable_fraction * n_workers));
  std::vector<bool> unreliable(n_workers, false);
  for (std::size_t i = 0; i < n_unreliable && i < n_workers; ++i) unreliable[order[i]] = true;

  // Balanced rotation over batches.
  std::vector<std::vector<std::string>> assigned(n_workers);
  std::bernoulli_distribution two(options.two_batch_probability);
  std::size_t cursor = 0;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t nb = std::min<std::size_t>(two(master) ? 2 : 1, batch_ids.size());
    for (std::size_t k = 0; k < nb; ++k) assigned[w].push_back(batch_ids[cursor++ % batch_ids.size()]);
  }

  std::vector<std::string> worker_ids(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    char id[32];
    std::snprintf(id, sizeof id, "w%05zu", w + 1);
    worker_ids[w] = id;
  }

  const ObserverProfile reliable{truth.lapse_rate, truth.not_sure_band, 0.0};
  ObserverProfile flaky = options.mix.unreliable;
  flaky.not_sure_band = truth.not_sure_band;

  std::vector<std::vector<ResponseRecord>> per_worker(n_workers);
  parallel_for(n_workers, [&](std::size_t w) {
    auto rng = rng_stream(options.seed, w + 1);
    const auto& profile = unreliable[w] ? flaky : reliable;
    std::int64_t clock = options.start_ms + static_cast<std::int64_t>(w) * 3'600'000;
    for (const auto& batch_id : assigned[w]) {
      auto questions = design.batch(batch_id);
      std::shuffle(questions.begin(), questions.end(), rng);
      for (const auto* q : questions) {
        ResponseRecord r;
        r.question_id = q->question_id;
        r.worker_id = worker_ids[w];
        r.batch_id = batch_id;
        r.answer = simulate_response(*q, truth, profile, rng);
        const std::int64_t window = answer_window_ms(q->protocol);
        r.response_time_ms = std::uniform_int_distribution<std::int64_t>(500, window * 2 / 3)(rng);
        r.toggled_count = q->protocol == Protocol::ptc ? std::uniform_int_distribution<int>(1, 6)(rng) : 0;
        clock += r.response_time_ms + 250;
        r.submitted_at_ms = clock;
        per_worker[w].push_back(std::move(r));
      }
    }
  });

  SimulatedCampaign out;
  for (std::size_t w = 0; w < n_workers; ++w) {
    out.responses.insert(out.responses.end(), std::make_move_iterator(per_worker[w].begin()),
                         std::make_move_iterator(per_worker[w].end()));
    if (unreliable[w]) out.unreliable_workers.push_back(worker_ids[w]);
  }
  return out;
}

}  // namespace aic3

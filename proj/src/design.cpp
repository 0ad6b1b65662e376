#include "aic3/design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "aic3/errors.hpp"
#include "aic3/hash.hpp"

namespace aic3 {
namespace {

using nlohmann::json;

std::vector<int> nonzero(const std::vector<int>& levels) {
  std::vector<int> out;
  std::copy_if(levels.begin(), levels.end(), std::back_inserter(out), [](int l) { return l != 0; });
  return out;
}

TripletQuestion make_question(Protocol protocol, QuestionKind kind, const std::string& source, StimulusKey left,
                              StimulusKey right, int replicate = 0) {
  TripletQuestion q;
  q.protocol = protocol;
  q.kind = kind;
  q.source_id = source;
  q.left = std::move(left);
  q.right = std::move(right);
  q.replicate = replicate;
  q.question_id = question_id_for(q);
  return q;
}

json key_json(const StimulusKey& k) { return json{{"source_id", k.source_id}, {"codec_id", k.codec_id}, {"level", k.level}}; }

StimulusKey key_from_json(const json& j) {
  return make_key(j.at("source_id").get<std::string>(), j.at("codec_id").get<std::string>(), j.at("level").get<int>());
}

void check_question(const TripletQuestion& q) {
  if (q.left.source_id != q.source_id || q.right.source_id != q.source_id)
    throw InputError("question " + q.question_id + " mixes sources");
  switch (q.kind) {
    case QuestionKind::bias:
      if (q.left != q.right) throw InputError("bias question " + q.question_id + " must pair an image with itself");
      break;
    case QuestionKind::trap: {
      const int lo = std::min(q.left.level, q.right.level);
      const int hi = std::max(q.left.level, q.right.level);
      if (lo != 0 || hi != kMaxLevel) throw InputError("trap question " + q.question_id + " must pair levels 0 and 10");
      break;
    }
    case QuestionKind::cross_codec:
      if (q.left.codec_id == q.right.codec_id)
        throw InputError("cross-codec question " + q.question_id + " uses one codec");
      break;
    case QuestionKind::same_codec:
      if (!q.left.is_source() && !q.right.is_source() && q.left.codec_id != q.right.codec_id)
        throw InputError("same-codec question " + q.question_id + " uses two codecs");
      break;
  }
}

}  // namespace

const std::string& TripletQuestion::codec_group() const { return left.is_source() ? right.codec_id : left.codec_id; }

bool TripletQuestion::is_zero_vs(int level) const {
  return (left.level == 0 && right.level == level) || (right.level == 0 && left.level == level);
}

DesignConfig DesignConfig::standard() {
  DesignConfig c;
  c.sources = {"src01", "src02", "src03", "src04", "src05"};
  c.codecs = {"jpeg", "jpeg2000", "vvc", "jpegxl", "avif"};
  return c;
}

void DesignConfig::validate() const {
  if (sources.empty() || codecs.empty()) throw InputError("design needs at least one source and one codec");
  if (std::set<std::string>(sources.begin(), sources.end()).size() != sources.size())
    throw InputError("duplicate source ids");
  if (std::set<std::string>(codecs.begin(), codecs.end()).size() != codecs.size())
    throw InputError("duplicate codec ids");
  for (const auto& c : codecs)
    if (c == kSourceCodec) throw InputError("codec id 'source' is reserved");
  for (const auto* lv : {&btc_levels, &ptc_levels}) {
    if (lv->size() < 2) throw InputError("level set needs at least two levels");
    if (!std::is_sorted(lv->begin(), lv->end()) || std::adjacent_find(lv->begin(), lv->end()) != lv->end())
      throw InputError("levels must be strictly increasing");
    if (lv->front() != 0 || lv->back() > kMaxLevel) throw InputError("levels must start at 0 and stay <= 10");
  }
  if (!(cross_codec_ratio > 0.0 && cross_codec_ratio <= 1.0)) throw InputError("cross_codec_ratio must lie in (0, 1]");
  if (n_batches < 1) throw InputError("n_batches must be positive");
  if (max_cross_level_gap < 0) throw InputError("max_cross_level_gap must be >= 0");
  for (int n : {btc_bias_count, btc_trap_count, ptc_bias_count, ptc_trap_count})
    if (n < 0) throw InputError("question counts must be non-negative");
}

std::string question_id_for(const TripletQuestion& q) {
  std::ostringstream canon;
  canon << to_string(q.protocol) << '|' << to_string(q.kind) << '|' << q.source_id << '|' << q.left.codec_id << '|'
        << q.left.level << '|' << q.right.codec_id << '|' << q.right.level << '|' << q.replicate;
  return std::string(to_string(q.protocol)) + "-" + sha256_hex(canon.str()).substr(0, 16);
}

std::vector<TripletQuestion> generate_same_codec(const DesignConfig& config, Protocol protocol) {
  config.validate();
  const auto& levels = config.levels(protocol);
  std::vector<TripletQuestion> out;
  for (const auto& src : config.sources) {
    for (const auto& codec : config.codecs) {
      for (int a : levels) {
        for (int b : levels) {
          if (a == b) continue;
          out.push_back(make_question(protocol, QuestionKind::same_codec, src, make_key(src, codec, a),
                                      make_key(src, codec, b)));
        }
      }
    }
  }
  return out;
}

std::vector<TripletQuestion> generate_cross_codec(const DesignConfig& config, Protocol protocol, Rng& rng) {
  config.validate();
  if (config.codecs.size() < 2) throw DesignError("cross-codec questions need at least two codecs");
  const auto levels = nonzero(config.levels(protocol));
  const auto per_source_same = static_cast<double>(config.codecs.size() * config.levels(protocol).size() *
                                                   (config.levels(protocol).size() - 1));
  const auto total = static_cast<std::size_t>(
      std::llround(config.cross_codec_ratio * per_source_same * static_cast<double>(config.sources.size())));

  std::vector<TripletQuestion> out;
  out.reserve(total);
  const std::size_t n_src = config.sources.size();
  for (std::size_t s = 0; s < n_src; ++s) {
    const auto& src = config.sources[s];
    const std::size_t quota = total / n_src + (s < total % n_src ? 1 : 0);
    std::vector<TripletQuestion> candidates;
    for (const auto& ca : config.codecs)
      for (const auto& cb : config.codecs) {
        if (ca == cb) continue;
        for (int la : levels)
          for (int lb : levels)
            if (std::abs(la - lb) <= config.max_cross_level_gap)
              candidates.push_back(make_question(protocol, QuestionKind::cross_codec, src, make_key(src, ca, la),
                                                 make_key(src, cb, lb)));
      }
    if (candidates.size() < quota)
      throw DesignError("source " + src + ": only " + std::to_string(candidates.size()) +
                        " cross-codec pairs available, need " + std::to_string(quota));
    std::vector<std::size_t> idx(candidates.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(quota);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) out.push_back(std::move(candidates[i]));
  }
  return out;
}

std::vector<TripletQuestion> generate_bias_and_trap(const DesignConfig& config, Protocol protocol) {
  config.validate();
  const auto levels = nonzero(config.levels(protocol));
  const int top = config.levels(protocol).back();
  if (top != kMaxLevel && config.trap_count(protocol) > 0)
    throw DesignError("trap questions need level 10 in the level set");
  const std::size_t n_src = config.sources.size();
  const std::size_t n_cells = n_src * config.codecs.size();
  std::vector<TripletQuestion> out;

  // Bias: round-robin over (source, codec) cells, rotating the level each round so a
  // cell never sees the same level twice.
  const auto n_bias = static_cast<std::size_t>(config.bias_count(protocol));
  if (n_bias > n_cells * levels.size())
    throw DesignError("more bias questions requested than distinct stimuli available");
  for (std::size_t k = 0; k < n_bias; ++k) {
    const std::size_t cell = k % n_cells;
    const std::size_t round = k / n_cells;
    const auto& src = config.sources[cell % n_src];
    const auto& codec = config.codecs[cell / n_src];
    const int level = levels[(round + cell) % levels.size()];
    auto key = make_key(src, codec, level);
    out.push_back(make_question(protocol, QuestionKind::bias, src, key, key));
  }

  // Traps: level 0 vs level 10 of one codec, alternating which side shows level 10.
  const auto n_trap = static_cast<std::size_t>(config.trap_count(protocol));
  for (std::size_t k = 0; k < n_trap; ++k) {
    const std::size_t cell = k % n_cells;
    const std::size_t round = k / n_cells;
    const auto& src = config.sources[cell % n_src];
    const auto& codec = config.codecs[cell / n_src];
    auto zero = make_key(src, codec, 0);
    auto ten = make_key(src, codec, kMaxLevel);
    const bool ten_left = (k % 2) == 0;
    // Same orientation repeats every other round within a cell; the replicate keeps ids distinct.
    const int replicate = static_cast<int>(round);
    out.push_back(ten_left ? make_question(protocol, QuestionKind::trap, src, ten, zero, replicate)
                           : make_question(protocol, QuestionKind::trap, src, zero, ten, replicate));
  }
  return out;
}

std::vector<Batch> split_into_batches(std::vector<TripletQuestion> questions, const DesignConfig& config,
                                      Protocol protocol, Rng& rng) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_batches);
  std::vector<TripletQuestion> traps, bias, study;
  std::set<std::string> seen;
  for (auto& q : questions) {
    if (q.protocol != protocol) throw DesignError("question " + q.question_id + " belongs to another protocol");
    if (!seen.insert(q.question_id).second) throw DesignError("duplicate question " + q.question_id);
    check_question(q);
    switch (q.kind) {
      case QuestionKind::trap: traps.push_back(std::move(q)); break;
      case QuestionKind::bias: bias.push_back(std::move(q)); break;
      default: study.push_back(std::move(q)); break;
    }
  }
  for (const auto* group : {&traps, &bias, &study})
    if (group->size() % n != 0)
      throw DesignError("group of " + std::to_string(group->size()) + " questions does not divide into " +
                        std::to_string(n) + " batches");
  if (traps.size() < n) throw DesignError("every batch needs at least one trap question");

  std::vector<Batch> batches(n);
  for (std::size_t b = 0; b < n; ++b) {
    char id[32];
    std::snprintf(id, sizeof id, "%s-b%02zu", std::string(to_string(protocol)).c_str(), b + 1);
    batches[b].batch_id = id;
    batches[b].protocol = protocol;
  }
  for (auto* group : {&traps, &bias, &study}) {
    std::shuffle(group->begin(), group->end(), rng);
    const std::size_t per = group->size() / n;
    for (std::size_t i = 0; i < group->size(); ++i) {
      auto& q = (*group)[i];
      q.batch_id = batches[i / per].batch_id;
      batches[i / per].questions.push_back(std::move(q));
    }
  }
  for (auto& b : batches) std::shuffle(b.questions.begin(), b.questions.end(), rng);
  return batches;
}

std::vector<Batch> generate_design(const DesignConfig& config, Protocol protocol) {
  auto cross_rng = rng_stream(config.rng_seed, 1);
  auto split_rng = rng_stream(config.rng_seed, 2);
  auto questions = generate_same_codec(config, protocol);
  auto cross = generate_cross_codec(config, protocol, cross_rng);
  auto extra = generate_bias_and_trap(config, protocol);
  questions.insert(questions.end(), std::make_move_iterator(cross.begin()), std::make_move_iterator(cross.end()));
  questions.insert(questions.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  return split_into_batches(std::move(questions), config, protocol, split_rng);
}

void write_manifest(std::ostream& out, const std::vector<Batch>& batches) {
  for (const auto& b : batches) {
    for (const auto& q : b.questions) {
      json j{{"question_id", q.question_id},
             {"batch_id", b.batch_id},
             {"protocol", to_string(q.protocol)},
             {"kind", to_string(q.kind)},
             {"source_id", q.source_id},
             {"left", key_json(q.left)},
             {"right", key_json(q.right)},
             {"replicate", q.replicate}};
      out << j.dump() << '\n';
    }
  }
}

std::string manifest_string(const std::vector<Batch>& batches) {
  std::ostringstream ss;
  write_manifest(ss, batches);
  return ss.str();
}

DesignIndex::DesignIndex(std::vector<TripletQuestion> questions) : questions_(std::move(questions)) {
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    check_question(questions_[i]);
    if (!by_id_.emplace(questions_[i].question_id, i).second)
      throw InputError("duplicate question id " + questions_[i].question_id);
  }
}

DesignIndex DesignIndex::parse(std::istream& in) {
  std::vector<TripletQuestion> qs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      TripletQuestion q;
      q.question_id = j.at("question_id").get<std::string>();
      q.batch_id = j.at("batch_id").get<std::string>();
      q.protocol = parse_protocol(j.at("protocol").get<std::string>());
      q.kind = parse_kind(j.at("kind").get<std::string>());
      q.source_id = j.at("source_id").get<std::string>();
      q.left = key_from_json(j.at("left"));
      q.right = key_from_json(j.at("right"));
      q.replicate = j.value("replicate", 0);
      qs.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw InputError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return DesignIndex(std::move(qs));
}

DesignIndex DesignIndex::load(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open design manifest " + manifest.string());
  return parse(in);
}

void DesignIndex::merge(const DesignIndex& other) {
  auto qs = questions_;
  qs.insert(qs.end(), other.questions_.begin(), other.questions_.end());
  *this = DesignIndex(std::move(qs));
}

const TripletQuestion* DesignIndex::find(const std::string& question_id) const {
  auto it = by_id_.find(question_id);
  return it == by_id_.end() ? nullptr : &questions_[it->second];
}

const TripletQuestion& DesignIndex::at(const std::string& question_id) const {
  const auto* q = find(question_id);
  if (!q) throw NotFoundError("unknown question " + question_id);
  return *q;
}

std::vector<std::string> DesignIndex::batch_ids() const {
  std::set<std::string> ids;
  for (const auto& q : questions_) ids.insert(q.batch_id);
  return {ids.begin(), ids.end()};
}

std::vector<const TripletQuestion*> DesignIndex::batch(const std::string& batch_id) const {
  std::vector<const TripletQuestion*> out;
  for (const auto& q : questions_)
    if (q.batch_id == batch_id) out.push_back(&q);
  return out;
}

std::vector<std::string> DesignIndex::source_ids() const {
  std::set<std::string> ids;
  for (const auto& q : questions_) ids.insert(q.source_id);
  return {ids.begin(), ids.end()};
}

}  // namespace aic3

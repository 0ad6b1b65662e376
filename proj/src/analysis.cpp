#include "aic3/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aic3/errors.hpp"
#include "aic3/stats.hpp"

namespace aic3 {
namespace {

bool is_reliability_question(const TripletQuestion& q) {
  return (q.kind == QuestionKind::trap || q.kind == QuestionKind::same_codec) && q.is_zero_vs(kMaxLevel);
}

// The answer that names the more distorted side of a level-0 vs level-d question.
Answer impaired_side(const TripletQuestion& q) { return q.left.level == 0 ? Answer::right : Answer::left; }

}  // namespace

FilterResult filter_batches(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                            double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InputError("reliability threshold must lie in [0, 1]");

  for (const auto& id : design.batch_ids()) {
    const auto qs = design.batch(id);
    if (std::none_of(qs.begin(), qs.end(), [](const auto* q) { return is_reliability_question(*q); }))
      throw AnalysisError("batch " + id + " has no level-0 vs level-10 questions to judge reliability");
  }

  std::map<std::pair<std::string, std::string>, BatchInstance> instances;
  for (const auto& r : responses) {
    const auto& q = design.at(r.question_id);
    auto& inst = instances[{r.worker_id, r.batch_id}];
    inst.worker_id = r.worker_id;
    inst.batch_id = r.batch_id;
    inst.protocol = q.protocol;
    if (!is_reliability_question(q)) continue;
    ++inst.qualifying;
    if (r.answer == impaired_side(q)) ++inst.correct;
  }

  FilterResult out;
  out.report.threshold = threshold;
  std::map<Protocol, std::set<std::string>> workers_all, workers_kept;
  for (auto& [key, inst] : instances) {
    // An instance with no answered reliability question cannot be vetted and is dropped.
    inst.accuracy = inst.qualifying ? static_cast<double>(inst.correct) / inst.qualifying : 0.0;
    inst.kept = inst.qualifying > 0 && inst.accuracy >= threshold;
    auto& hist = out.report.histogram[inst.protocol];
    hist.resize(20, 0);
    ++hist[std::min<std::size_t>(19, static_cast<std::size_t>(inst.accuracy * 20.0))];
    ++out.report.batches_total[inst.protocol];
    workers_all[inst.protocol].insert(inst.worker_id);
    if (inst.kept) {
      ++out.report.batches_kept[inst.protocol];
      workers_kept[inst.protocol].insert(inst.worker_id);
    }
    out.report.instances.push_back(inst);
  }
  for (auto& [p, ws] : workers_all) {
    out.report.workers_total[p] = static_cast<int>(ws.size());
    out.report.workers_kept[p] = static_cast<int>(workers_kept[p].size());
    out.report.batches_kept.try_emplace(p, 0);
  }

  for (const auto& r : responses)
    if (instances.at({r.worker_id, r.batch_id}).kept) out.kept.push_back(r);
  return out;
}

ComparisonCounts build_counts(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                              const std::string& source_id, Protocol protocol) {
  std::set<StimulusKey> keys{make_key(source_id, "", 0)};
  std::vector<std::pair<const TripletQuestion*, Answer>> relevant;
  for (const auto& r : responses) {
    const auto& q = design.at(r.question_id);
    if (q.source_id != source_id || q.protocol != protocol || q.kind == QuestionKind::bias) continue;
    keys.insert(q.left);
    keys.insert(q.right);
    relevant.emplace_back(&q, r.answer);
  }
  ComparisonCounts counts(std::vector<StimulusKey>(keys.begin(), keys.end()));
  for (const auto& [q, answer] : relevant) {
    const auto l = *counts.index_of(q->left);
    const auto rgt = *counts.index_of(q->right);
    switch (answer) {
      case Answer::left: counts.add(l, rgt, 1.0); break;
      case Answer::right: counts.add(rgt, l, 1.0); break;
      case Answer::not_sure:
        counts.add(l, rgt, 0.5);
        counts.add(rgt, l, 0.5);
        break;
    }
  }
  return counts;
}

std::optional<double> threshold_crossing(const std::vector<PsychometricPoint>& points, double target) {
  double prev_level = 0.0;
  double prev_p = 0.5;
  for (const auto& pt : points) {
    if (pt.proportion >= target) {
      if (pt.proportion == prev_p) return static_cast<double>(pt.level);
      const double t = (target - prev_p) / (pt.proportion - prev_p);
      return prev_level + std::clamp(t, 0.0, 1.0) * (pt.level - prev_level);
    }
    prev_level = pt.level;
    prev_p = pt.proportion;
  }
  return std::nullopt;
}

std::map<Protocol, PsychometricCurve> psychometric_curves(const std::vector<ResponseRecord>& responses,
                                                          const DesignIndex& design) {
  // (protocol, level, source, codec) -> (correct, total)
  std::map<std::tuple<Protocol, int, std::string, std::string>, std::pair<int, int>> cells;
  std::map<Protocol, std::set<int>> levels;
  std::map<Protocol, std::set<std::pair<std::string, std::string>>> all_cells;
  for (const auto& q : design.questions()) {
    if (q.kind != QuestionKind::same_codec && q.kind != QuestionKind::trap) continue;
    if (q.left.level != 0 && q.right.level != 0) continue;
    const int level = std::max(q.left.level, q.right.level);
    levels[q.protocol].insert(level);
    all_cells[q.protocol].insert({q.source_id, q.codec_group()});
  }
  for (const auto& r : responses) {
    const auto& q = design.at(r.question_id);
    if (q.kind != QuestionKind::same_codec && q.kind != QuestionKind::trap) continue;
    if (q.left.level != 0 && q.right.level != 0) continue;
    const int level = std::max(q.left.level, q.right.level);
    auto& c = cells[{q.protocol, level, q.source_id, q.codec_group()}];
    c.first += r.answer == impaired_side(q) ? 1 : 0;
    ++c.second;
  }

  std::map<Protocol, PsychometricCurve> out;
  for (const auto& [protocol, lv] : levels) {
    PsychometricCurve curve;
    curve.protocol = protocol;
    for (int level : lv) {
      PsychometricPoint pt;
      pt.level = level;
      double sum = 0.0;
      for (const auto& [src, codec] : all_cells[protocol]) {
        auto it = cells.find({protocol, level, src, codec});
        if (it == cells.end() || it->second.second == 0) {
          curve.empty_cells.push_back(std::to_string(level) + ":" + src + "/" + codec);
          continue;
        }
        sum += static_cast<double>(it->second.first) / it->second.second;
        ++pt.cells;
        pt.responses += it->second.second;
      }
      if (pt.cells == 0) continue;
      pt.proportion = sum / pt.cells;
      curve.points.push_back(pt);
    }
    curve.jnd_threshold_level = threshold_crossing(curve.points);
    out[protocol] = std::move(curve);
  }
  return out;
}

BiasTally tally_bias(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                     std::optional<Protocol> protocol) {
  BiasTally t;
  for (const auto& r : responses) {
    const auto& q = design.at(r.question_id);
    if (q.kind != QuestionKind::bias || (protocol && q.protocol != *protocol)) continue;
    switch (r.answer) {
      case Answer::left: ++t.left; break;
      case Answer::right: ++t.right; break;
      case Answer::not_sure: ++t.not_sure; break;
    }
  }
  t.p_value = binomial_two_sided_p(static_cast<std::uint64_t>(t.left), static_cast<std::uint64_t>(t.left + t.right));
  return t;
}

BiasReport bias_report(const std::vector<ResponseRecord>& all_responses, const std::vector<ResponseRecord>& kept,
                       const DesignIndex& design) {
  BiasReport rep;
  std::set<Protocol> protocols;
  for (const auto& q : design.questions())
    if (q.kind == QuestionKind::bias) protocols.insert(q.protocol);
  for (auto p : protocols) {
    rep.before_filtering[p] = tally_bias(all_responses, design, p);
    rep.after_filtering[p] = tally_bias(kept, design, p);
  }
  return rep;
}

}  // namespace aic3

#include "aic3/scale_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aic3/errors.hpp"
#include "aic3/parallel.hpp"
#include "aic3/rng.hpp"
#include "aic3/stats.hpp"

namespace aic3 {
namespace {

std::vector<std::string> sources_for(const DesignIndex& design, Protocol protocol) {
  std::set<std::string> out;
  for (const auto& q : design.questions())
    if (q.protocol == protocol) out.insert(q.source_id);
  return {out.begin(), out.end()};
}

std::set<Protocol> protocols_in(const std::vector<ResponseRecord>& responses, const DesignIndex& design) {
  std::set<Protocol> out;
  for (const auto& r : responses) out.insert(design.at(r.question_id).protocol);
  return out;
}

// One (protocol, source) reconstruction problem.
struct Slot {
  Protocol protocol;
  ComparisonCounts counts;
  std::vector<double> start;  // point estimate, Thurstone units
};

// Answers observed for one question, pre-resolved to count indices.
struct QuestionSample {
  std::size_t slot;
  std::size_t left;
  std::size_t right;
  std::vector<Answer> answers;
};

void add_answer(ComparisonCounts& counts, std::size_t l, std::size_t r, Answer a) {
  switch (a) {
    case Answer::left: counts.add(l, r, 1.0); break;
    case Answer::right: counts.add(r, l, 1.0); break;
    case Answer::not_sure:
      counts.add(l, r, 0.5);
      counts.add(r, l, 0.5);
      break;
  }
}

struct OutputVar {
  StimulusKey key;
  Protocol protocol;
  bool aligned;
};

}  // namespace

ProtocolScales reconstruct_protocol(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                                    Protocol protocol, const ReconstructionOptions& options) {
  ProtocolScales out;
  for (const auto& src : sources_for(design, protocol)) {
    const auto counts = build_counts(responses, design, src, protocol);
    if (counts.total() == 0.0) continue;
    const auto fit = reconstruct_scales(counts, options);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out.jnd[counts.stimuli()[i]] = to_jnd(fit.scales[i]);
      if (!fit.standard_errors.empty()) out.standard_error_jnd[counts.stimuli()[i]] = to_jnd(fit.standard_errors[i]);
    }
  }
  return out;
}

BootstrapResult bootstrap_cis(const std::vector<ResponseRecord>& kept, const DesignIndex& design,
                              const AnalysisConfig& config, const std::map<Protocol, ProtocolScales>& point,
                              const std::optional<AlignmentModel>& alignment) {
  if (config.bootstrap_samples < 100) throw InputError("bootstrap needs at least 100 replicates");
  const double unit = thurstone_units_per_jnd();

  // Slots and per-question answer lists.
  std::vector<Slot> slots;
  std::map<std::pair<Protocol, std::string>, std::size_t> slot_of;
  for (const auto& [protocol, scales] : point) {
    for (const auto& src : sources_for(design, protocol)) {
      auto counts = build_counts(kept, design, src, protocol);
      if (counts.total() == 0.0) continue;
      Slot slot{protocol, counts, std::vector<double>(counts.size(), 0.0)};
      for (std::size_t i = 0; i < counts.size(); ++i) {
        auto it = scales.jnd.find(counts.stimuli()[i]);
        if (it != scales.jnd.end()) slot.start[i] = unit * it->second;
      }
      slot.counts.clear();
      slot_of[{protocol, src}] = slots.size();
      slots.push_back(std::move(slot));
    }
  }
  std::map<std::string, QuestionSample> by_question;
  for (const auto& r : kept) {
    const auto& q = design.at(r.question_id);
    if (q.kind == QuestionKind::bias) continue;
    auto sit = slot_of.find({q.protocol, q.source_id});
    if (sit == slot_of.end()) continue;
    auto [it, fresh] = by_question.try_emplace(r.question_id);
    if (fresh) {
      const auto& counts = slots[sit->second].counts;
      it->second = QuestionSample{sit->second, *counts.index_of(q.left), *counts.index_of(q.right), {}};
    }
    it->second.answers.push_back(r.answer);
  }
  std::vector<QuestionSample> samples;
  samples.reserve(by_question.size());
  for (auto& [id, s] : by_question) samples.push_back(std::move(s));

  // Output variables in a fixed order: raw scales per protocol, then aligned BTC.
  std::vector<OutputVar> vars;
  for (const auto& [protocol, scales] : point)
    for (const auto& [key, v] : scales.jnd)
      if (!key.is_source()) vars.push_back({key, protocol, false});
  if (alignment && point.count(Protocol::btc))
    for (const auto& [key, v] : point.at(Protocol::btc).jnd)
      if (!key.is_source()) vars.push_back({key, Protocol::btc, true});

  ScaleMap weights;
  if (alignment && config.weighted_alignment)
    for (const auto& [key, se] : point.at(Protocol::ptc).standard_error_jnd)
      if (!key.is_source()) weights[key] = 1.0 / std::max(se * se, 1e-12);

  const auto n = static_cast<std::size_t>(config.bootstrap_samples);
  std::vector<double> values(n * vars.size(), 0.0);
  std::vector<char> failed(n, 0);
  ReconstructionOptions ropt = config.reconstruction;
  ropt.standard_errors = false;

  parallel_for(
      n,
      [&](std::size_t rep) {
        auto rng = rng_stream(config.seed, rep);
        std::vector<ComparisonCounts> counts;
        counts.reserve(slots.size());
        for (const auto& s : slots) counts.push_back(s.counts);
        for (const auto& qs : samples) {
          std::uniform_int_distribution<std::size_t> pick(0, qs.answers.size() - 1);
          for (std::size_t k = 0; k < qs.answers.size(); ++k)
            add_answer(counts[qs.slot], qs.left, qs.right, qs.answers[pick(rng)]);
        }
        std::map<Protocol, ScaleMap> jnd;
        try {
          for (std::size_t s = 0; s < slots.size(); ++s) {
            ReconstructionOptions o = ropt;
            o.start = slots[s].start;
            const auto fit = reconstruct_scales(counts[s], o);
            for (std::size_t i = 0; i < counts[s].size(); ++i)
              jnd[slots[s].protocol][counts[s].stimuli()[i]] = to_jnd(fit.scales[i]);
          }
          std::optional<AlignmentModel> refit;
          if (alignment)
            refit = fit_alignment(jnd[Protocol::btc], jnd[Protocol::ptc], alignment->granularity,
                                  config.weighted_alignment ? &weights : nullptr);
          double* row = &values[rep * vars.size()];
          for (std::size_t v = 0; v < vars.size(); ++v) {
            const auto& var = vars[v];
            const double raw = jnd.at(var.protocol).at(var.key);
            row[v] = var.aligned ? refit->apply(var.key, raw) : raw;
          }
        } catch (const AnalysisError&) {
          failed[rep] = 1;
        }
      },
      config.threads);

  BootstrapResult out;
  out.diagnostics.requested = static_cast<int>(n);
  out.diagnostics.dropped = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  out.diagnostics.completed = out.diagnostics.requested - out.diagnostics.dropped;
  if (out.diagnostics.dropped > config.max_failed_fraction * static_cast<double>(n))
    throw AnalysisError(std::to_string(out.diagnostics.dropped) + " of " + std::to_string(n) +
                        " bootstrap replicates failed to reconstruct");

  std::vector<double> column;
  column.reserve(n);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    column.clear();
    for (std::size_t rep = 0; rep < n; ++rep)
      if (!failed[rep]) column.push_back(values[rep * vars.size() + v]);
    std::sort(column.begin(), column.end());
    const auto& var = vars[v];
    const double raw = point.at(var.protocol).jnd.at(var.key);
    ScaleResult res;
    res.stimulus = var.key;
    res.protocol = var.protocol;
    res.aligned = var.aligned;
    res.scale_jnd = var.aligned ? alignment->apply(var.key, raw) : raw;
    res.ci_low = std::min(res.scale_jnd, percentile_sorted(column, 0.025));
    res.ci_high = std::max(res.scale_jnd, percentile_sorted(column, 0.975));
    out.results.push_back(res);
  }
  return out;
}

AnalysisResult analyze(const std::vector<ResponseRecord>& responses, const DesignIndex& design,
                       const AnalysisConfig& config) {
  AnalysisResult out;
  out.filter = filter_batches(responses, design, config.reliability_threshold);
  const auto& kept = out.filter.kept;
  out.bias = bias_report(responses, kept, design);
  out.psychometric = psychometric_curves(kept, design);

  ReconstructionOptions ropt = config.reconstruction;
  ropt.standard_errors = ropt.standard_errors || config.weighted_alignment;
  for (auto p : protocols_in(kept, design)) out.scales[p] = reconstruct_protocol(kept, design, p, ropt);

  if (out.scales.count(Protocol::btc) && out.scales.count(Protocol::ptc)) {
    const auto& btc = out.scales.at(Protocol::btc).jnd;
    const auto& ptc = out.scales.at(Protocol::ptc).jnd;
    ScaleMap weights;
    if (config.weighted_alignment)
      for (const auto& [key, se] : out.scales.at(Protocol::ptc).standard_error_jnd)
        if (!key.is_source()) weights[key] = 1.0 / std::max(se * se, 1e-12);
    const ScaleMap* w = config.weighted_alignment ? &weights : nullptr;

    std::vector<ComparisonCounts> ptc_counts;
    for (const auto& src : sources_for(design, Protocol::ptc)) {
      auto c = build_counts(kept, design, src, Protocol::ptc);
      if (c.total() > 0.0) ptc_counts.push_back(std::move(c));
    }
    for (auto g : kAllGranularities) {
      try {
        out.candidates.push_back(fit_alignment(btc, ptc, g, w));
      } catch (const AnalysisError&) {
        if (config.granularity == g) throw;
      }
    }
    if (out.candidates.empty()) throw AnalysisError("no alignment granularity could be fitted");
    const auto best = select_granularity(out.candidates, btc, ptc_counts, config.aic);
    if (config.granularity) {
      for (const auto& m : out.candidates)
        if (m.granularity == *config.granularity) out.alignment = m;
    } else {
      out.alignment = out.candidates[best];
    }
  }

  if (config.bootstrap_samples > 0) {
    auto boot = bootstrap_cis(kept, design, config, out.scales, out.alignment);
    out.results = std::move(boot.results);
    out.bootstrap = boot.diagnostics;
  } else {
    for (const auto& [protocol, scales] : out.scales)
      for (const auto& [key, v] : scales.jnd)
        if (!key.is_source()) out.results.push_back({key, protocol, false, v, v, v});
    if (out.alignment)
      for (const auto& [key, v] : out.scales.at(Protocol::btc).jnd)
        if (!key.is_source()) {
          const double a = out.alignment->apply(key, v);
          out.results.push_back({key, Protocol::btc, true, a, a, a});
        }
  }
  return out;
}

}  // namespace aic3

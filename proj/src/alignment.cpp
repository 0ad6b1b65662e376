#include "aic3/alignment.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "aic3/errors.hpp"
#include "aic3/stats.hpp"

namespace aic3 {

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::global: return "global";
    case Granularity::per_source: return "per_source";
    case Granularity::per_codec: return "per_codec";
    case Granularity::per_pair: return "per_pair";
  }
  return "?";
}

Granularity parse_granularity(std::string_view s) {
  for (auto g : kAllGranularities)
    if (to_string(g) == s) return g;
  throw InputError("unknown granularity '" + std::string(s) + "'");
}

std::string alignment_group(Granularity g, const StimulusKey& key) {
  switch (g) {
    case Granularity::global: return "all";
    case Granularity::per_source: return key.source_id;
    case Granularity::per_codec: return key.codec_id;
    case Granularity::per_pair: return key.source_id + "/" + key.codec_id;
  }
  return {};
}

double AlignmentModel::apply(const StimulusKey& key, double boosted_jnd) const {
  if (key.is_source()) return 0.0;
  const auto group = alignment_group(granularity, key);
  auto it = coefficients.find(group);
  if (it == coefficients.end()) throw AnalysisError("no alignment fitted for group " + group);
  return it->second(boosted_jnd);
}

ScaleMap AlignmentModel::apply(const ScaleMap& boosted_jnd) const {
  ScaleMap out;
  for (const auto& [k, v] : boosted_jnd) out[k] = apply(k, v);
  return out;
}

AlignmentModel fit_alignment(const ScaleMap& btc_jnd, const ScaleMap& ptc_jnd, Granularity granularity,
                             const ScaleMap* weights) {
  struct Point {
    double x, y, w;
  };
  std::map<std::string, std::vector<Point>> groups;
  for (const auto& [key, y] : ptc_jnd) {
    if (key.is_source()) continue;
    auto it = btc_jnd.find(key);
    if (it == btc_jnd.end()) continue;
    double w = 1.0;
    if (weights) {
      auto wit = weights->find(key);
      if (wit == weights->end() || !(wit->second > 0.0)) throw AnalysisError("missing weight for " + to_string(key));
      w = wit->second;
    }
    groups[alignment_group(granularity, key)].push_back({it->second, y, w});
  }
  if (groups.empty()) throw AnalysisError("no stimuli shared by the boosted and plain scales");

  AlignmentModel model;
  model.granularity = granularity;
  for (const auto& [group, pts] : groups) {
    if (pts.size() < 2)
      throw AnalysisError("alignment group " + group + " has " + std::to_string(pts.size()) +
                          " overlap point(s), needs at least 2");
    Eigen::MatrixXd design(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::VectorXd target(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double sw = std::sqrt(pts[i].w);
      const auto r = static_cast<Eigen::Index>(i);
      design(r, 0) = sw * pts[i].x;
      design(r, 1) = sw * pts[i].x * pts[i].x;
      target[r] = sw * pts[i].y;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 2) throw AnalysisError("alignment group " + group + " is degenerate (collinear predictors)");
    const Eigen::Vector2d coef = qr.solve(target);
    model.coefficients[group] = Quadratic{coef[0], coef[1]};
    model.rss += (design * coef - target).squaredNorm();
    model.points += static_cast<int>(pts.size());
  }
  return model;
}

std::size_t select_granularity(std::vector<AlignmentModel>& models, const ScaleMap& btc_jnd,
                               const std::vector<ComparisonCounts>& ptc_counts, const AicOptions& options) {
  if (models.empty()) throw InputError("select_granularity: no candidate models");
  int btc_params = 0;
  if (options.btc_param_count) {
    btc_params = *options.btc_param_count;
  } else {
    for (const auto& [k, v] : btc_jnd)
      if (!k.is_source()) ++btc_params;
  }

  const double unit = thurstone_units_per_jnd();
  std::size_t best = 0;
  for (std::size_t m = 0; m < models.size(); ++m) {
    auto& model = models[m];
    model.aic_parameter_count = btc_params + model.parameter_count();
    if (options.mode == AicMode::ptc_likelihood) {
      double ll = 0.0;
      for (const auto& counts : ptc_counts) {
        std::vector<double> s(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
          const auto& key = counts.stimuli()[i];
          if (key.is_source()) continue;
          auto it = btc_jnd.find(key);
          if (it == btc_jnd.end()) throw AnalysisError("no boosted scale for plain stimulus " + to_string(key));
          s[i] = unit * model.apply(key, it->second);
        }
        ll += log_likelihood(counts, s, options.epsilon);
      }
      model.log_likelihood = ll;
    } else {
      const double n = model.points;
      model.log_likelihood = -0.5 * n * std::log(std::max(model.rss, 1e-300) / n);
    }
    model.aic = 2.0 * model.aic_parameter_count - 2.0 * model.log_likelihood;
    if (model.aic < models[best].aic) best = m;
  }
  return best;
}

}  // namespace aic3

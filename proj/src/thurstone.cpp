#include "aic3/thurstone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "aic3/errors.hpp"
#include "aic3/stats.hpp"

namespace aic3 {

ComparisonCounts::ComparisonCounts(std::vector<StimulusKey> stimuli) : stimuli_(std::move(stimuli)) {
  for (std::size_t i = 0; i < stimuli_.size(); ++i)
    if (!index_.emplace(stimuli_[i], i).second) throw InputError("duplicate stimulus " + to_string(stimuli_[i]));
  counts_.assign(stimuli_.size() * stimuli_.size(), 0.0);
}

std::optional<std::size_t> ComparisonCounts::index_of(const StimulusKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ComparisonCounts::anchor() const {
  for (std::size_t i = 0; i < stimuli_.size(); ++i)
    if (stimuli_[i].is_source()) return i;
  return std::nullopt;
}

void ComparisonCounts::add(std::size_t worse, std::size_t better, double weight) {
  if (worse == better) throw InputError("cannot compare a stimulus with itself");
  if (weight < 0.0) throw InputError("negative comparison weight");
  counts_.at(worse * stimuli_.size() + better) += weight;
}

void ComparisonCounts::clear() { std::fill(counts_.begin(), counts_.end(), 0.0); }

double ComparisonCounts::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0.0); }

std::map<StimulusKey, double> ScaleFit::as_map(const ComparisonCounts& counts) const {
  std::map<StimulusKey, double> out;
  for (std::size_t i = 0; i < scales.size(); ++i) out[counts.stimuli()[i]] = scales[i];
  return out;
}

namespace {

double clamped_log_cdf(double x, double eps) { return std::log(std::clamp(normal_cdf(x), eps, 1.0 - eps)); }

// lambda(x) = phi(x) / Phi(x) and its derivative -lambda (x + lambda).
double mills(double x) { return normal_pdf(x) / normal_cdf(x); }
double mills_slope(double x) {
  const double l = mills(x);
  return -l * (x + l);
}

struct Derivatives {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

Derivatives derivatives(const ComparisonCounts& counts, std::span<const double> s, double eps) {
  const std::size_t n = counts.size();
  Derivatives d{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)),
                Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const double cik = counts.count(i, k);
      const double cki = counts.count(k, i);
      if (cik + cki == 0.0) continue;
      const double x = s[i] - s[k];
      const double p = normal_cdf(x);
      // Clamped probabilities are flat in x.
      if (p <= eps || p >= 1.0 - eps) continue;
      const double g = cik * mills(x) - cki * mills(-x);
      const double h = cik * mills_slope(x) + cki * mills_slope(-x);
      const auto ii = static_cast<Eigen::Index>(i);
      const auto kk = static_cast<Eigen::Index>(k);
      d.gradient[ii] += g;
      d.gradient[kk] -= g;
      d.hessian(ii, ii) += h;
      d.hessian(kk, kk) += h;
      d.hessian(ii, kk) -= h;
      d.hessian(kk, ii) -= h;
    }
  }
  return d;
}

std::string describe_components(const ComparisonCounts& counts, const std::vector<std::vector<std::size_t>>& comps) {
  std::string msg;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    msg += c ? "; {" : "{";
    for (std::size_t j = 0; j < comps[c].size(); ++j) {
      if (j) msg += ", ";
      msg += to_string(counts.stimuli()[comps[c][j]]);
    }
    msg += "}";
  }
  return msg;
}

}  // namespace

double log_likelihood(const ComparisonCounts& counts, std::span<const double> scales, double epsilon) {
  if (scales.size() != counts.size()) throw InputError("scale vector does not match counts");
  double ll = 0.0;
  const std::size_t n = counts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      const double cik = counts.count(i, k);
      const double cki = counts.count(k, i);
      if (cik + cki == 0.0) continue;
      const double x = scales[i] - scales[k];
      ll += cik * clamped_log_cdf(x, epsilon) + cki * clamped_log_cdf(-x, epsilon);
    }
  return ll;
}

std::vector<std::vector<std::size_t>> comparison_components(const ComparisonCounts& counts) {
  const std::size_t n = counts.size();
  std::vector<int> label(n, -1);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<std::size_t> stack{start};
    label[start] = id;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      comps.back().push_back(i);
      for (std::size_t k = 0; k < n; ++k) {
        if (label[k] >= 0 || counts.count(i, k) + counts.count(k, i) == 0.0) continue;
        label[k] = id;
        stack.push_back(k);
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

ScaleFit reconstruct_scales(const ComparisonCounts& counts, const ReconstructionOptions& options) {
  const std::size_t n = counts.size();
  const auto anchor = counts.anchor();
  if (!anchor) throw AnalysisError("comparison counts contain no level-0 source stimulus to anchor the scale");
  const auto comps = comparison_components(counts);
  if (comps.size() > 1) throw AnalysisError("comparison graph is disconnected: " + describe_components(counts, comps));

  ScaleFit fit;
  fit.scales.assign(n, 0.0);
  if (options.start) {
    if (options.start->size() != n) throw InputError("starting point has the wrong size");
    const double shift = (*options.start)[*anchor];
    for (std::size_t i = 0; i < n; ++i) fit.scales[i] = (*options.start)[i] - shift;
  }
  if (n == 1) {
    fit.log_likelihood = 0.0;
    fit.likelihood_trace = {0.0};
    return fit;
  }

  // Free parameters are all stimuli except the anchor.
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i)
    if (i != *anchor) free.push_back(i);
  const auto m = static_cast<Eigen::Index>(free.size());

  const double eps = options.epsilon;
  double ll = log_likelihood(counts, fit.scales, eps);
  fit.likelihood_trace.push_back(ll);
  std::vector<double> trial(n);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const auto d = derivatives(counts, fit.scales, eps);
    Eigen::VectorXd g(m);
    Eigen::MatrixXd neg_h(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      g[a] = d.gradient[static_cast<Eigen::Index>(free[a])];
      for (Eigen::Index b = 0; b < m; ++b)
        neg_h(a, b) = -d.hessian(static_cast<Eigen::Index>(free[a]), static_cast<Eigen::Index>(free[b]));
    }
    fit.gradient_norm = g.lpNorm<Eigen::Infinity>();
    fit.iterations = iter;
    if (fit.gradient_norm < options.gradient_tolerance) break;

    // Newton step on the concave objective, damped (Levenberg) when the Hessian is
    // singular or the full step fails to improve the likelihood.
    const double diag_scale = std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff());
    // Below this predicted gain the likelihood cannot resolve the step any more.
    const double resolution = 1e-12 * (1.0 + std::abs(ll));
    double damping = 0.0;
    bool accepted = false;
    bool at_resolution = false;
    for (int attempt = 0; attempt < 40 && !accepted && !at_resolution; ++attempt) {
      Eigen::MatrixXd system = neg_h;
      system.diagonal().array() += damping + 1e-12 * diag_scale;
      Eigen::LLT<Eigen::MatrixXd> llt(system);
      if (llt.info() != Eigen::Success) {
        damping = damping == 0.0 ? 1e-8 * diag_scale : damping * 10.0;
        continue;
      }
      const Eigen::VectorXd step = llt.solve(g);
      if (damping == 0.0 && 0.5 * g.dot(step) < resolution) {
        // Judge the full Newton step by the gradient instead.
        at_resolution = true;
        trial = fit.scales;
        for (Eigen::Index a = 0; a < m; ++a) trial[free[a]] += step[a];
        const auto dt = derivatives(counts, trial, eps);
        double trial_norm = 0.0;
        for (Eigen::Index a = 0; a < m; ++a)
          trial_norm = std::max(trial_norm, std::abs(dt.gradient[static_cast<Eigen::Index>(free[a])]));
        if (trial_norm < fit.gradient_norm) {
          fit.scales = trial;
          ll = log_likelihood(counts, trial, eps);
          accepted = true;
        }
        break;
      }
      double t = 1.0;
      for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
        trial = fit.scales;
        for (Eigen::Index a = 0; a < m; ++a) trial[free[a]] += t * step[a];
        const double ll_trial = log_likelihood(counts, trial, eps);
        if (ll_trial >= ll) {
          fit.scales = trial;
          ll = ll_trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) damping = damping == 0.0 ? 1e-6 * diag_scale : damping * 10.0;
    }
    fit.likelihood_trace.push_back(ll);
    fit.iterations = iter + 1;
    if (!accepted) break;
  }
  fit.log_likelihood = ll;

  if (options.standard_errors) {
    const auto d = derivatives(counts, fit.scales, eps);
    Eigen::MatrixXd info(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b)
        info(a, b) = -d.hessian(static_cast<Eigen::Index>(free[a]), static_cast<Eigen::Index>(free[b]));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw AnalysisError("observed information is singular; standard errors undefined");
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
    fit.standard_errors.assign(n, 0.0);
    for (Eigen::Index a = 0; a < m; ++a) fit.standard_errors[free[a]] = std::sqrt(std::max(0.0, cov(a, a)));
  }
  return fit;
}

double to_jnd(double thurstone_units) { return thurstone_units / thurstone_units_per_jnd(); }

std::map<StimulusKey, double> to_jnd(const std::map<StimulusKey, double>& scales) {
  std::map<StimulusKey, double> out;
  for (const auto& [k, v] : scales) out[k] = to_jnd(v);
  return out;
}

}  // namespace aic3

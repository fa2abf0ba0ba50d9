#include "macpo/priority/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace macpo {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::macpo: return "macpo";
    case Scheme::macpo_approx: return "macpo_approx";
    case Scheme::uniform: return "uniform";
    case Scheme::per: return "per";
    case Scheme::discor: return "discor";
    case Scheme::remern: return "remern";
    case Scheme::pser: return "pser";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  for (Scheme k : {Scheme::macpo, Scheme::macpo_approx, Scheme::uniform, Scheme::per, Scheme::discor, Scheme::remern,
                   Scheme::pser})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scheme '" + s +
                              "' (expected macpo, macpo_approx, uniform, per, discor, remern or pser)");
}

void ApproxThresholds::validate() const {
  if (!(0.0 < eps_low && eps_low < eps_high && eps_high < 1.0))
    throw std::invalid_argument("thresholds need 0 < eps_low < eps_high < 1");
  if (!(0.0 <= alpha_low && alpha_low < alpha_medium && alpha_medium < alpha_high))
    throw std::invalid_argument("scaled weights need 0 <= alpha_low < alpha_medium < alpha_high");
}

namespace {

void check_values(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument(std::string("weight input '") + what + "' must be finite and >= 0");
}

void check_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw std::invalid_argument(std::string("weight input '") + what + "' has the wrong length");
}

}  // namespace

void WeightInputs::validate() const {
  const std::size_t S = samples();
  check_size(value_gap.size(), S, "value_gap");
  check_size(filled.size(), S, "filled");
  check_size(probs.size(), S * static_cast<std::size_t>(n_agents), "probs");
  check_values(bellman_error, "bellman_error");
  check_values(value_gap, "value_gap");
  for (double p : probs)
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw std::invalid_argument("weight input 'probs' must lie in [0,1]");
  if (time > 0 && static_cast<std::size_t>(episodes) * static_cast<std::size_t>(time) != S)
    throw std::invalid_argument("weight input layout episodes*time does not match sample count");
}

PriorityWeights normalize_weights(std::span<const double> raw, std::span<const std::uint8_t> filled, double cap) {
  check_size(filled.size(), raw.size(), "filled");
  check_values(raw, "raw weight");
  PriorityWeights out;
  out.w.assign(raw.size(), 0.0);
  std::size_t count = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!filled[i]) continue;
    ++count;
    sum += raw[i];
    out.raw_max = std::max(out.raw_max, raw[i]);
  }
  if (count == 0) return out;
  out.raw_mean = sum / static_cast<double>(count);
  if (!(sum > 0.0)) {
    for (std::size_t i = 0; i < raw.size(); ++i) out.w[i] = filled[i] ? 1.0 : 0.0;
    out.fallback_uniform = true;
    out.entropy = std::log(static_cast<double>(count));
    return out;
  }
  const double limit = cap > 0.0 ? cap * out.raw_mean : std::numeric_limits<double>::infinity();
  double capped_sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!filled[i]) continue;
    out.w[i] = std::min(raw[i], limit);
    capped_sum += out.w[i];
  }
  const double mean = capped_sum / static_cast<double>(count);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!filled[i]) continue;
    out.w[i] /= mean;
    const double p = out.w[i] / static_cast<double>(count);
    if (p > 0.0) out.entropy -= p * std::log(p);
  }
  return out;
}

PriorityWeights macpo_exact(const WeightInputs& in, const WeightOptions& opt) {
  in.validate();
  std::vector<double> raw(in.samples());
  kernels::raw_macpo_exact(opt.policy, in.bellman_error, in.value_gap, in.probs, in.n_agents, raw);
  return normalize_weights(raw, in.filled, opt.cap);
}

PriorityWeights macpo_approx(const WeightInputs& in, const WeightOptions& opt) {
  in.validate();
  opt.thresholds.validate();
  std::vector<double> raw(in.samples());
  kernels::raw_macpo_approx(opt.policy, in.bellman_error, in.value_gap, in.probs, in.n_agents, opt.thresholds, raw);
  return normalize_weights(raw, in.filled, opt.cap);
}

PriorityWeights per_weights(std::span<const double> bellman_error, std::span<const std::uint8_t> filled,
                            const WeightOptions& opt) {
  return normalize_weights(bellman_error, filled, opt.cap);
}

PriorityWeights discor_weights(std::span<const double> bellman_error, std::span<const double> value_gap,
                               std::span<const std::uint8_t> filled, const WeightOptions& opt) {
  check_size(value_gap.size(), bellman_error.size(), "value_gap");
  check_values(value_gap, "value_gap");
  std::vector<double> raw(bellman_error.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = bellman_error[i] * std::exp(-value_gap[i]);
  return normalize_weights(raw, filled, opt.cap);
}

PriorityWeights remern_weights(std::span<const double> bellman_error, std::span<const double> value_gap,
                               std::span<const double> likelihood, std::span<const std::uint8_t> filled,
                               const WeightOptions& opt) {
  check_size(value_gap.size(), bellman_error.size(), "value_gap");
  check_size(likelihood.size(), bellman_error.size(), "likelihood");
  check_values(value_gap, "value_gap");
  check_values(likelihood, "likelihood");
  std::vector<double> raw(bellman_error.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = bellman_error[i] * std::exp(-value_gap[i]) * likelihood[i];
  return normalize_weights(raw, filled, opt.cap);
}

PriorityWeights uniform_weights(std::span<const std::uint8_t> filled) {
  std::vector<double> ones(filled.size(), 1.0);
  return normalize_weights(ones, filled, 0.0);
}

std::vector<double> pser_propagate(std::span<const double> p, std::span<const std::uint8_t> filled, int episodes,
                                   int time, double decay, int window) {
  check_size(filled.size(), p.size(), "filled");
  if (static_cast<std::size_t>(episodes) * static_cast<std::size_t>(time) != p.size())
    throw std::invalid_argument("pser_propagate: episodes*time does not match sample count");
  std::vector<double> out(p.begin(), p.end());
  for (int e = 0; e < episodes; ++e) {
    const std::size_t base = static_cast<std::size_t>(e) * static_cast<std::size_t>(time);
    for (int t = 0; t < time; ++t) {
      if (!filled[base + static_cast<std::size_t>(t)]) continue;
      double factor = 1.0;
      for (int k = 1; k <= window && t - k >= 0; ++k) {
        const std::size_t src = base + static_cast<std::size_t>(t - k);
        if (!filled[src]) break;
        factor *= decay;
        out[base + static_cast<std::size_t>(t)] = std::max(out[base + static_cast<std::size_t>(t)], factor * p[src]);
      }
    }
  }
  return out;
}

PriorityWeights pser_weights(std::span<const double> priorities, std::span<const std::uint8_t> filled, int episodes,
                             int time, const WeightOptions& opt) {
  check_values(priorities, "priority");
  auto spread = pser_propagate(priorities, filled, episodes, time, opt.pser_decay, opt.pser_window);
  return normalize_weights(spread, filled, opt.cap);
}

PriorityWeights compute_weights(Scheme scheme, const WeightInputs& in, const WeightOptions& opt) {
  in.validate();
  switch (scheme) {
    case Scheme::macpo: return macpo_exact(in, opt);
    case Scheme::macpo_approx: return macpo_approx(in, opt);
    case Scheme::uniform: return uniform_weights(in.filled);
    case Scheme::per: return per_weights(in.bellman_error, in.filled, opt);
    case Scheme::discor: return discor_weights(in.bellman_error, in.value_gap, in.filled, opt);
    case Scheme::remern: {
      const auto n = static_cast<std::size_t>(in.n_agents);
      std::vector<double> like(in.samples(), 1.0);
      for (std::size_t s = 0; s < like.size(); ++s)
        for (std::size_t a = 0; a < n; ++a) like[s] *= in.probs[s * n + a];
      return remern_weights(in.bellman_error, in.value_gap, like, in.filled, opt);
    }
    case Scheme::pser: {
      const int time = in.time > 0 ? in.time : static_cast<int>(in.samples());
      const int episodes = in.time > 0 ? in.episodes : 1;
      return pser_weights(in.bellman_error, in.filled, episodes, time, opt);
    }
  }
  throw std::logic_error("unhandled scheme");
}

}  // namespace macpo

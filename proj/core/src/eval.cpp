#include "careflow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace careflow {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  for (const int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
  }
}

// 1-based midranks of `values` (ties share the mean of their ranks).
std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

struct Placements {
  std::vector<double> v10;  // per positive: share of negatives ranked below
  std::vector<double> v01;  // per negative: share of positives ranked above
  double auc = 0.0;
};

Placements placements(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("AUC needs at least one positive and one negative");
  }
  const auto m = static_cast<double>(pos.size());
  const auto n = static_cast<double>(neg.size());
  std::vector<double> all(pos);
  all.insert(all.end(), neg.begin(), neg.end());
  const auto r_all = midranks(all);
  const auto r_pos = midranks(pos);
  const auto r_neg = midranks(neg);

  Placements p;
  p.v10.resize(pos.size());
  p.v01.resize(neg.size());
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    p.v10[i] = (r_all[i] - r_pos[i]) / n;
    rank_sum += r_all[i];
  }
  for (std::size_t j = 0; j < neg.size(); ++j) {
    p.v01[j] = 1.0 - (r_all[pos.size() + j] - r_neg[j]) / m;
  }
  p.auc = (rank_sum - m * (m + 1.0) / 2.0) / (m * n);
  return p;
}

double sample_variance(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  return placements(scores, labels).auc;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= p_high) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley step on Phi(x) - p.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

DelongResult delong_ci(std::span<const double> scores, std::span<const int> labels, double level) {
  check_inputs(scores, labels);
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  const auto n_pos = std::count(labels.begin(), labels.end(), 1);
  const auto n_neg = static_cast<long>(labels.size()) - n_pos;
  if (n_pos < 2 || n_neg < 2) {
    throw std::invalid_argument("DeLong interval needs at least two positives and two negatives");
  }
  const auto p = placements(scores, labels);
  const double s10 = sample_variance(p.v10, p.auc);
  const double s01 = sample_variance(p.v01, p.auc);

  DelongResult r;
  r.auc = p.auc;
  r.level = level;
  r.variance = std::max(s10 / static_cast<double>(n_pos) + s01 / static_cast<double>(n_neg), 0.0);
  if (r.variance == 0.0) {
    r.low = r.high = r.auc;
    return r;
  }
  const double z = normal_quantile(0.5 + level / 2.0);
  const double half = z * std::sqrt(r.variance);
  r.low = std::clamp(r.auc - half, 0.0, 1.0);
  r.high = std::clamp(r.auc + half, 0.0, 1.0);
  return r;
}

Confusion confusion(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  check_inputs(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return c;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold,
                    double level) {
  const auto ci = delong_ci(scores, labels, level);
  EvalReport report;
  report.auc = ci.auc;
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  report.ci_level = level;
  report.threshold = threshold;
  report.confusion = confusion(scores, labels, threshold);
  report.n = scores.size();
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["auc"] = report.auc;
  j["ci"] = {report.ci_low, report.ci_high};
  j["level"] = report.ci_level;
  j["threshold"] = report.threshold;
  j["confusion"] = {{"tp", report.confusion.tp},
                    {"fp", report.confusion.fp},
                    {"tn", report.confusion.tn},
                    {"fn", report.confusion.fn}};
  j["n"] = report.n;
  return j.dump(2) + "\n";
}

std::string format_auc_summary(const EvalReport& report) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "AUC %.3f (%g%% CI [%.3f, %.3f])", report.auc,
                report.ci_level * 100.0, report.ci_low, report.ci_high);
  return buf;
}

}  // namespace careflow

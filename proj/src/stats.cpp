#include "tgen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tgen {

namespace {

constexpr size_t kExactLimit = 12;

bool tie_free(const std::vector<double>& pooled) {
  std::vector<double> s = pooled;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) == s.end();
}

// Average ranks of `a`'s elements within the pooled sample.
double rank_sum_of_a(const std::vector<double>& a, const std::vector<double>& b,
                     std::map<double, int>* tie_counts) {
  std::vector<std::pair<double, int>> pooled;  // (value, 0 for a / 1 for b)
  for (double x : a) pooled.push_back({x, 0});
  for (double x : b) pooled.push_back({x, 1});
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  double w = 0.0;
  size_t i = 0;
  while (i < pooled.size()) {
    size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    if (tie_counts && j - i > 1) (*tie_counts)[pooled[i].first] = static_cast<int>(j - i);
    for (size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) w += avg_rank;
    i = j;
  }
  return w;
}

double exact_p(size_t na, size_t nb, long w) {
  const size_t n = na + nb;
  const long max_sum = static_cast<long>(n * (n + 1) / 2);
  // count[k][s]: number of k-subsets of {1..n} with rank sum s.
  std::vector<std::vector<double>> count(na + 1, std::vector<double>(static_cast<size_t>(max_sum) + 1, 0.0));
  count[0][0] = 1.0;
  for (size_t r = 1; r <= n; ++r)
    for (size_t k = std::min(na, r); k >= 1; --k)
      for (long s = max_sum; s >= static_cast<long>(r); --s)
        count[k][static_cast<size_t>(s)] += count[k - 1][static_cast<size_t>(s - static_cast<long>(r))];

  double total = 0.0, le = 0.0, ge = 0.0;
  for (long s = 0; s <= max_sum; ++s) {
    double c = count[na][static_cast<size_t>(s)];
    total += c;
    if (s <= w) le += c;
    if (s >= w) ge += c;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

}  // namespace

bool wilcoxon_is_exact(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() + b.size() > kExactLimit) return false;
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  return tie_free(pooled);
}

double wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;

  if (wilcoxon_is_exact(a, b)) {
    double w = rank_sum_of_a(a, b, nullptr);
    return exact_p(a.size(), b.size(), std::lround(w));
  }

  std::map<double, int> ties;
  double w = rank_sum_of_a(a, b, &ties);
  double mu = na * (n + 1.0) / 2.0;
  double tie_term = 0.0;
  for (const auto& [v, t] : ties) tie_term += static_cast<double>(t) * t * t - t;
  double sigma2 = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (sigma2 <= 0.0) return 1.0;  // fully tied samples
  double d = w - mu;
  double z = (std::fabs(d) - 0.5) / std::sqrt(sigma2);
  if (z < 0.0) z = 0.0;
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double vargha_delaney_a12(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("vargha_delaney_a12: empty sample");
  double wins = 0.0;
  for (double x : a)
    for (double y : b) {
      if (x > y) wins += 1.0;
      else if (x == y) wins += 0.5;
    }
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::string a12_magnitude(double a12) {
  double d = std::fabs(a12 - 0.5);
  if (d < 0.06) return "negligible";
  if (d < 0.14) return "small";
  if (d < 0.21) return "medium";
  return "large";
}

double normalized_auc(const RunSeries& series, double budget, int max_coverage) {
  if (series.points.empty()) throw std::invalid_argument("normalized_auc: empty series");
  if (max_coverage < 1) throw std::invalid_argument("normalized_auc: max_coverage must be >= 1");
  double area = 0.0;
  for (size_t i = 0; i < series.points.size(); ++i) {
    double x0 = series.points[i].first;
    if (x0 > budget) throw std::invalid_argument("normalized_auc: series point beyond budget");
    double x1 = i + 1 < series.points.size() ? series.points[i + 1].first : budget;
    area += (x1 - x0) * static_cast<double>(series.points[i].second);
  }
  return area / (budget * static_cast<double>(max_coverage));
}

namespace {

// R type-7 quantile.
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  size_t lo = static_cast<size_t>(std::floor(h));
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile(xs, 0.5);
}

double iqr(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile(xs, 0.75) - quantile(xs, 0.25);
}

}  // namespace tgen

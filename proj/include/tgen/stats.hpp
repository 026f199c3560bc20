#pragma once

#include <string>
#include <vector>

namespace tgen {

// Two-sided p-value of the unpaired Wilcoxon rank-sum test. Exact enumeration
// of the rank-sum distribution when |a|+|b| <= 12 and the pooled sample is
// tie-free; normal approximation with tie and continuity corrections otherwise.
double wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b);

// True when the exact enumeration path applies to these inputs.
bool wilcoxon_is_exact(const std::vector<double>& a, const std::vector<double>& b);

// A12 = (#{a_i > b_j} + 0.5 #{a_i = b_j}) / (|a| |b|).
double vargha_delaney_a12(const std::vector<double>& a, const std::vector<double>& b);

// Magnitude label from |A12 - 0.5|: <0.06 negligible, <0.14 small,
// <0.21 medium, else large.
std::string a12_magnitude(double a12);

struct RunSeries {
  std::vector<std::pair<double, int>> points;  // (budget consumed, covered count), both monotone
  int final_covered = 0;
  int faults_found = 0;
};

// Step-function integral of covered count over [0, budget], divided by
// budget * max_coverage.
double normalized_auc(const RunSeries& series, double budget, int max_coverage);

double median(std::vector<double> xs);
double iqr(std::vector<double> xs);

}  // namespace tgen

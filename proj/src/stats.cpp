#include "transferscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "transferscope/error.hpp"

namespace transferscope {

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// Fraction of the N! relabellings of `ry` whose |rho| reaches |observed|.
double exact_permutation_pvalue(std::span<const double> rx, std::vector<double> ry,
                                double observed) {
  constexpr double kSlack = 1e-12;
  std::vector<std::size_t> order(ry.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> permuted(ry.size());
  std::size_t hits = 0;
  std::size_t total = 0;
  do {
    for (std::size_t i = 0; i < order.size(); ++i) permuted[i] = ry[order[i]];
    if (std::abs(pearson(rx, permuted)) >= std::abs(observed) - kSlack) ++hits;
    ++total;
  } while (std::next_permutation(order.begin(), order.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

RankVector rank_vector(std::span<const double> values, std::vector<std::string> labels) {
  if (values.size() < 2) throw MetricError("ranking needs at least two values");
  if (!labels.empty() && labels.size() != values.size())
    throw MetricError("rank_vector: labels and values differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  RankVector out{std::move(labels), std::vector<double>(values.size())};
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the average of ranks i+1..j+1.
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = avg;
    i = j + 1;
  }
  return out;
}

double spearman_t_pvalue(double rho, std::size_t n) {
  if (n < 3) throw MetricError("t approximation needs at least 3 pairs");
  if (std::abs(rho) >= 1.0) return 0.0;
  const double dof = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(dof / ((1.0 - rho) * (1.0 + rho)));
  const boost::math::students_t_distribution<double> dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw MetricError("spearman: inputs differ in length");
  if (x.size() < 3)
    throw MetricError(fmt::format("spearman needs at least 3 pairs, got {}", x.size()));
  const auto rx = rank_vector(x);
  const auto ry = rank_vector(y);
  SpearmanResult result;
  result.n = x.size();
  result.rho = pearson(rx.ranks, ry.ranks);
  if (std::isnan(result.rho)) {
    result.degenerate = true;
    result.p_value = std::numeric_limits<double>::quiet_NaN();
    result.method = PValueMethod::None;
    return result;
  }
  if (result.n <= kExactPermutationMaxN) {
    result.method = PValueMethod::ExactPermutation;
    result.p_value = exact_permutation_pvalue(rx.ranks, ry.ranks, result.rho);
  } else {
    result.method = PValueMethod::TApproximation;
    result.p_value = spearman_t_pvalue(result.rho, result.n);
  }
  return result;
}

SpearmanResult spearman(const std::map<std::string, double>& x,
                        const std::map<std::string, double>& y) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [label, value] : x) {
    const auto it = y.find(label);
    if (it == y.end()) continue;
    xs.push_back(value);
    ys.push_back(it->second);
  }
  return spearman(xs, ys);
}

CorrelationMatrix task_correlation_matrix(
    const std::map<std::string, std::map<std::string, double>>& scores_by_task, double alpha) {
  if (scores_by_task.size() < 2) throw MetricError("correlation matrix needs at least two tasks");
  CorrelationMatrix m;
  for (const auto& [task, scores] : scores_by_task) m.tasks.push_back(task);
  const auto n = m.tasks.size();
  m.cells.assign(n, std::vector<CorrelationCell>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const auto& xa = scores_by_task.at(m.tasks[a]);
      const auto& xb = scores_by_task.at(m.tasks[b]);
      std::size_t common = 0;
      for (const auto& [label, v] : xa) common += xb.count(label);
      if (common < 3)
        throw MetricError(fmt::format("tasks {} and {} share {} labels, need at least 3",
                                      m.tasks[a], m.tasks[b], common));
      CorrelationCell cell;
      cell.common = common;
      cell.result = spearman(xa, xb);
      cell.significant = !cell.result.degenerate && cell.result.p_value < alpha;
      m.cells[a][b] = cell;
      m.cells[b][a] = cell;
    }
  }
  return m;
}

}  // namespace transferscope

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace transferscope {

// Average ranks, rank 1 = largest value.
struct RankVector {
  std::vector<std::string> labels;  // may be empty for unlabelled input
  std::vector<double> ranks;
};

// Throws MetricError for fewer than two values.
RankVector rank_vector(std::span<const double> values, std::vector<std::string> labels = {});

enum class PValueMethod { ExactPermutation, TApproximation, None };

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
  PValueMethod method = PValueMethod::None;
  bool degenerate = false;  // a constant input leaves rho undefined (NaN)
};

// Up to this many pairs the p-value enumerates all N! permutations.
inline constexpr std::size_t kExactPermutationMaxN = 8;

// Aligned inputs; throws MetricError for mismatched lengths or fewer than 3 pairs.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);
// Aligns on the labels both maps share.
SpearmanResult spearman(const std::map<std::string, double>& x,
                        const std::map<std::string, double>& y);

// Two-sided Student-t approximation with n-2 degrees of freedom.
double spearman_t_pvalue(double rho, std::size_t n);

struct CorrelationCell {
  SpearmanResult result;
  std::size_t common = 0;
  bool significant = false;
};

struct CorrelationMatrix {
  std::vector<std::string> tasks;
  std::vector<std::vector<CorrelationCell>> cells;  // symmetric, tasks x tasks
};

// Pairwise Spearman over the shared labels of each pair of tasks. Throws
// MetricError for fewer than two tasks or a pair sharing fewer than 3 labels.
CorrelationMatrix task_correlation_matrix(
    const std::map<std::string, std::map<std::string, double>>& scores_by_task,
    double alpha = 0.05);

}  // namespace transferscope

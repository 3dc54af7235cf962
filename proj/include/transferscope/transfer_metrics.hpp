#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transferscope/ledger.hpp"

namespace transferscope {

// Relative change of the mean repetition score over the zero-shot baseline:
// (mean(reps) - base) / base. Dimensionless; reports multiply by 100.
struct TransferScore {
  double value = 0.0;
  std::string model;
  std::string task;
  std::string transfer;
  std::string target;
  int steps = 0;
};

// Throws MetricError when the baseline is missing or zero, or the cell has no
// repetitions. With `strict`, the cell must hold exactly rep_count(model, task)
// repetitions.
TransferScore transfer_score(const Ledger& ledger, std::string_view model, std::string_view task,
                             std::string_view transfer, std::string_view target, int steps,
                             bool strict = false);

// Which training steps feed a matrix cell. A set selector averages the
// per-step transfer scores of the steps the cell actually has.
class StepSelector {
 public:
  static StepSelector single(int steps);
  static StepSelector mean_of(std::vector<int> steps);
  // Mean over the grid steps <= 100 (the short continued-training settings).
  static StepSelector minimal();

  // Steps of `grid` selected by this selector; throws MetricError if none.
  std::vector<int> resolve(const std::vector<int>& grid) const;
  std::string describe() const;

 private:
  enum class Kind { Single, Set, Minimal };
  StepSelector(Kind kind, std::vector<int> steps) : kind_(kind), steps_(std::move(steps)) {}

  Kind kind_;
  std::vector<int> steps_;
};

enum class Axis { Transfer, Target };

struct AbsentCell {
  std::string transfer;
  std::string target;
  std::string reason;
};

// Transfer scores over (transfer x target) for one model and task. Axes are
// sorted by iso code; cells without a defined score are empty.
class TransferMatrix {
 public:
  struct Cell {
    std::string transfer;
    std::string target;
    double value = 0.0;
  };

  TransferMatrix() = default;
  TransferMatrix(std::string model, std::string task, std::vector<std::string> transfers,
                 std::vector<std::string> targets);
  // Builds a matrix directly from values; axes are the languages mentioned.
  static TransferMatrix from_cells(std::string model, std::string task,
                                   const std::vector<Cell>& cells);

  const std::string& model() const noexcept { return model_; }
  const std::string& task() const noexcept { return task_; }
  const std::vector<std::string>& transfers() const noexcept { return transfers_; }
  const std::vector<std::string>& targets() const noexcept { return targets_; }
  const std::vector<std::string>& axis(Axis a) const noexcept {
    return a == Axis::Transfer ? transfers_ : targets_;
  }

  std::optional<std::size_t> transfer_index(std::string_view iso) const;
  std::optional<std::size_t> target_index(std::string_view iso) const;

  const std::optional<double>& at(std::size_t transfer, std::size_t target) const {
    return values_[transfer * targets_.size() + target];
  }
  std::optional<double> at(std::string_view transfer, std::string_view target) const;
  void set(std::size_t transfer, std::size_t target, double value);
  void mark_absent(std::size_t transfer, std::size_t target, std::string reason);

  // Populated values along one language's row (Axis::Transfer) or column
  // (Axis::Target), in counterpart iso order. Throws MetricError for a
  // language not on that axis.
  std::vector<double> values_for(std::string_view lang, Axis axis) const;

  std::size_t populated() const noexcept;
  const std::vector<AbsentCell>& absent() const noexcept { return absent_; }

 private:
  std::string model_;
  std::string task_;
  std::vector<std::string> transfers_;
  std::vector<std::string> targets_;
  std::vector<std::optional<double>> values_;
  std::vector<AbsentCell> absent_;
};

// Matrix over the transfer and target languages seen in the runs of (model,
// task). Cells lacking runs or a positive baseline are recorded as absent.
TransferMatrix transfer_matrix(const Ledger& ledger, std::string_view model, std::string_view task,
                               const StepSelector& selector = StepSelector::minimal());

// Mean transfer score of a transfer language over its populated targets.
double aggregated_transfer(const TransferMatrix& matrix, std::string_view transfer);
// Mean transfer score a target receives over the transfer languages reaching it.
double aggregated_target(const TransferMatrix& matrix, std::string_view target);
// 100 * (strictly positive counterparts) / (populated counterparts).
double positive_pct(const TransferMatrix& matrix, std::string_view lang, Axis axis);

struct RankEntry {
  std::string lang;
  double agg_ts = 0.0;
  double positive_pct = 0.0;
  int rank = 0;
};

// Languages on `axis` with at least one populated cell, by aggregated score
// descending; equal scores are ordered by iso code.
std::vector<RankEntry> rank_languages(const TransferMatrix& matrix, Axis axis);

struct RecipientCounts {
  int max_count = 0;
  int min_count = 0;

  friend bool operator==(const RecipientCounts&, const RecipientCounts&) = default;
};

// For every target, each transfer language attaining the column maximum gets
// one max credit and each attaining the minimum one min credit (ties credit
// every attainer). Requires at least two transfer languages.
std::map<std::string, RecipientCounts> max_min_recipient_counts(const TransferMatrix& matrix);

struct VarianceStats {
  double variance = 0.0;  // population variance of 100 * ts
  int max_count = 0;
  int min_count = 0;
};

VarianceStats variance_stats(const TransferMatrix& matrix, std::string_view transfer);

enum class VarianceProfile { PlusAndMinus, MostlyPlus, MostlyMinus, Neutral };

std::string_view to_string(VarianceProfile profile);

inline constexpr int kDefaultProfileThreshold = 3;

VarianceProfile variance_profile(const VarianceStats& stats,
                                 int threshold = kDefaultProfileThreshold);

// Absent inputs yield absent flags.
struct ImprovementFlags {
  std::optional<bool> first_step;   // Imp_c:1, first continued-training step beats base
  std::optional<bool> last_step;    // Imp_c:kmax, last step beats base
  std::optional<bool> interaction;  // any of [1A], [2A], [3A] beats base
};

ImprovementFlags improvement_flags(double base, std::optional<double> first_step,
                                   std::optional<double> last_step,
                                   std::span<const std::optional<double>> interactions);

struct ProgressionPoint {
  int steps = 0;
  double mean_ts = 0.0;
  double sd_ts = 0.0;  // population sd of the per-repetition relative improvements
  int reps = 0;
};

// One point per grid step at which the cell has runs, in grid order.
std::vector<ProgressionPoint> progression_series(const Ledger& ledger, std::string_view model,
                                                 std::string_view task, std::string_view transfer,
                                                 std::string_view target);

struct TaskShare {
  std::string task;
  int positive = 0;
  int total = 0;
  double percent = 0.0;
};

struct SustainedImprovement {
  double percent = 0.0;  // macro average of the per-task percentages
  std::vector<TaskShare> per_task;
};

// Share of transfer languages whose self-evaluation (transfer == target) has
// ts > 0 at `steps`. Tasks without self cells are left out.
SustainedImprovement sustained_improvement_pct(const Ledger& ledger, std::string_view model,
                                               std::span<const std::string> tasks, int steps);

struct SeenUnseenCell {
  std::optional<double> mean_ts;
  std::size_t count = 0;
};

// cells[transfer_group][target_group]; group 0 = seen, 1 = unseen.
struct SeenUnseenTable {
  std::array<std::array<SeenUnseenCell, 2>, 2> cells{};
};

SeenUnseenTable seen_unseen_matrix(const TransferMatrix& matrix, const LanguageRegistry& registry);

enum class RecipientBucket { Never, Low, High, Universal };

std::string_view to_string(RecipientBucket bucket);
// never: 0; low: (0, 90]; high: (90, 100); universal: 100.
RecipientBucket recipient_bucket(double positive_pct);

struct RecipientSummary {
  double positive_pct = 0.0;
  RecipientBucket bucket = RecipientBucket::Never;
};

RecipientSummary recipient_summary(const TransferMatrix& matrix, std::string_view target);

struct Coverage {
  std::string model;
  std::string task;
  std::size_t transfers = 0;
  std::size_t targets = 0;
  std::size_t populated = 0;
  std::size_t absent = 0;
};

Coverage coverage(const TransferMatrix& matrix);

}  // namespace transferscope

#include "transferscope/transfer_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "transferscope/error.hpp"

namespace transferscope {

namespace {

double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// (mean(reps) - base) / base, summed as differences so equal scores give exactly 0.
double relative_gain(std::span<const double> reps, double base) {
  double sum = 0.0;
  for (double r : reps) sum += r - base;
  return sum / static_cast<double>(reps.size()) / base;
}

std::size_t find_sorted(const std::vector<std::string>& axis, std::string_view iso) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), iso);
  if (it == axis.end() || *it != iso) return axis.size();
  return static_cast<std::size_t>(it - axis.begin());
}

// Max/min credits without the two-transfer precondition.
std::map<std::string, RecipientCounts> recipient_counts(const TransferMatrix& matrix) {
  std::map<std::string, RecipientCounts> counts;
  for (const auto& t : matrix.transfers()) counts[t];
  const auto& transfers = matrix.transfers();
  for (std::size_t j = 0; j < matrix.targets().size(); ++j) {
    std::optional<double> hi;
    std::optional<double> lo;
    for (std::size_t i = 0; i < transfers.size(); ++i) {
      if (const auto& v = matrix.at(i, j)) {
        if (!hi || *v > *hi) hi = *v;
        if (!lo || *v < *lo) lo = *v;
      }
    }
    if (!hi) continue;
    for (std::size_t i = 0; i < transfers.size(); ++i) {
      if (const auto& v = matrix.at(i, j)) {
        if (*v == *hi) ++counts[transfers[i]].max_count;
        if (*v == *lo) ++counts[transfers[i]].min_count;
      }
    }
  }
  return counts;
}

}  // namespace

TransferScore transfer_score(const Ledger& ledger, std::string_view model, std::string_view task,
                             std::string_view transfer, std::string_view target, int steps,
                             bool strict) {
  const auto base = ledger.baseline(model, task, target);
  if (!base)
    throw MetricError(
        fmt::format("missing baseline for model={} task={} target={}", model, task, target));
  if (*base == 0.0)
    throw MetricError(fmt::format("baseline is zero for model={} task={} target={}", model, task,
                                  target));
  const auto reps = ledger.runs(model, task, transfer, target, steps);
  if (!reps || reps->empty())
    throw MetricError(fmt::format("missing cell model={} task={} transfer={} target={} steps={}",
                                  model, task, transfer, target, steps));
  if (strict) {
    const auto n = ledger.rep_count(model, task);
    if (!n || static_cast<int>(reps->size()) != *n)
      throw MetricError(fmt::format(
          "cell model={} task={} transfer={} target={} steps={} has {} repetitions, expected {}",
          model, task, transfer, target, steps, reps->size(), n.value_or(0)));
  }
  return TransferScore{relative_gain(*reps, *base), std::string(model), std::string(task),
                       std::string(transfer), std::string(target), steps};
}

// ---- step selection ----------------------------------------------------------

StepSelector StepSelector::single(int steps) { return StepSelector(Kind::Single, {steps}); }

StepSelector StepSelector::mean_of(std::vector<int> steps) {
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return StepSelector(Kind::Set, std::move(steps));
}

StepSelector StepSelector::minimal() { return StepSelector(Kind::Minimal, {}); }

std::vector<int> StepSelector::resolve(const std::vector<int>& grid) const {
  std::vector<int> out;
  if (kind_ == Kind::Minimal) {
    std::copy_if(grid.begin(), grid.end(), std::back_inserter(out), [](int s) { return s <= 100; });
  } else {
    std::copy_if(steps_.begin(), steps_.end(), std::back_inserter(out), [&](int s) {
      return std::binary_search(grid.begin(), grid.end(), s);
    });
  }
  if (out.empty())
    throw MetricError(fmt::format("step selection '{}' matches nothing in grid [{}]", describe(),
                                  fmt::join(grid, ",")));
  return out;
}

std::string StepSelector::describe() const {
  switch (kind_) {
    case Kind::Single:
      return fmt::format("{}", steps_.front());
    case Kind::Set:
      return fmt::format("mean({})", fmt::join(steps_, ","));
    case Kind::Minimal:
      break;
  }
  return "mean(<=100)";
}

// ---- matrix ------------------------------------------------------------------

TransferMatrix::TransferMatrix(std::string model, std::string task,
                               std::vector<std::string> transfers, std::vector<std::string> targets)
    : model_(std::move(model)),
      task_(std::move(task)),
      transfers_(std::move(transfers)),
      targets_(std::move(targets)) {
  std::sort(transfers_.begin(), transfers_.end());
  transfers_.erase(std::unique(transfers_.begin(), transfers_.end()), transfers_.end());
  std::sort(targets_.begin(), targets_.end());
  targets_.erase(std::unique(targets_.begin(), targets_.end()), targets_.end());
  values_.assign(transfers_.size() * targets_.size(), std::nullopt);
}

TransferMatrix TransferMatrix::from_cells(std::string model, std::string task,
                                          const std::vector<Cell>& cells) {
  std::vector<std::string> transfers;
  std::vector<std::string> targets;
  for (const auto& c : cells) {
    transfers.push_back(c.transfer);
    targets.push_back(c.target);
  }
  TransferMatrix m(std::move(model), std::move(task), std::move(transfers), std::move(targets));
  for (const auto& c : cells) m.set(*m.transfer_index(c.transfer), *m.target_index(c.target), c.value);
  for (std::size_t i = 0; i < m.transfers_.size(); ++i)
    for (std::size_t j = 0; j < m.targets_.size(); ++j)
      if (!m.at(i, j)) m.absent_.push_back({m.transfers_[i], m.targets_[j], "no value"});
  return m;
}

std::optional<std::size_t> TransferMatrix::transfer_index(std::string_view iso) const {
  const auto i = find_sorted(transfers_, iso);
  if (i == transfers_.size()) return std::nullopt;
  return i;
}

std::optional<std::size_t> TransferMatrix::target_index(std::string_view iso) const {
  const auto j = find_sorted(targets_, iso);
  if (j == targets_.size()) return std::nullopt;
  return j;
}

std::optional<double> TransferMatrix::at(std::string_view transfer, std::string_view target) const {
  const auto i = transfer_index(transfer);
  const auto j = target_index(target);
  if (!i || !j) return std::nullopt;
  return at(*i, *j);
}

void TransferMatrix::set(std::size_t transfer, std::size_t target, double value) {
  values_.at(transfer * targets_.size() + target) = value;
}

void TransferMatrix::mark_absent(std::size_t transfer, std::size_t target, std::string reason) {
  values_.at(transfer * targets_.size() + target).reset();
  absent_.push_back({transfers_.at(transfer), targets_.at(target), std::move(reason)});
}

std::vector<double> TransferMatrix::values_for(std::string_view lang, Axis axis) const {
  std::vector<double> out;
  if (axis == Axis::Transfer) {
    const auto i = transfer_index(lang);
    if (!i) throw MetricError(fmt::format("'{}' is not a transfer language of this matrix", lang));
    for (std::size_t j = 0; j < targets_.size(); ++j)
      if (const auto& v = at(*i, j)) out.push_back(*v);
  } else {
    const auto j = target_index(lang);
    if (!j) throw MetricError(fmt::format("'{}' is not a target language of this matrix", lang));
    for (std::size_t i = 0; i < transfers_.size(); ++i)
      if (const auto& v = at(i, *j)) out.push_back(*v);
  }
  return out;
}

std::size_t TransferMatrix::populated() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

TransferMatrix transfer_matrix(const Ledger& ledger, std::string_view model, std::string_view task,
                               const StepSelector& selector) {
  const auto steps = selector.resolve(ledger.step_grid());
  TransferMatrix matrix(std::string(model), std::string(task), ledger.transfers(model, task),
                        ledger.targets(model, task));
  if (matrix.transfers().empty())
    throw MetricError(fmt::format("no runs for model={} task={}", model, task));

  for (std::size_t j = 0; j < matrix.targets().size(); ++j) {
    const auto& target = matrix.targets()[j];
    const auto base = ledger.baseline(model, task, target);
    for (std::size_t i = 0; i < matrix.transfers().size(); ++i) {
      if (!base) {
        matrix.mark_absent(i, j, "missing baseline");
        continue;
      }
      if (*base == 0.0) {
        matrix.mark_absent(i, j, "zero baseline");
        continue;
      }
      double sum = 0.0;
      int used = 0;
      for (const int s : steps) {
        const auto reps = ledger.runs(model, task, matrix.transfers()[i], target, s);
        if (!reps || reps->empty()) continue;
        sum += relative_gain(*reps, *base);
        ++used;
      }
      if (used == 0)
        matrix.mark_absent(i, j, "no runs at selected steps");
      else
        matrix.set(i, j, sum / used);
    }
  }
  return matrix;
}

// ---- aggregation ---------------------------------------------------------------

double aggregated_transfer(const TransferMatrix& matrix, std::string_view transfer) {
  const auto values = matrix.values_for(transfer, Axis::Transfer);
  if (values.empty())
    throw MetricError(fmt::format("transfer language '{}' has no populated targets", transfer));
  return mean(values);
}

double aggregated_target(const TransferMatrix& matrix, std::string_view target) {
  const auto values = matrix.values_for(target, Axis::Target);
  if (values.empty())
    throw MetricError(fmt::format("no transfer language reaches target '{}'", target));
  return mean(values);
}

double positive_pct(const TransferMatrix& matrix, std::string_view lang, Axis axis) {
  const auto values = matrix.values_for(lang, axis);
  if (values.empty()) throw MetricError(fmt::format("'{}' has no populated counterparts", lang));
  const auto positive = std::count_if(values.begin(), values.end(), [](double v) { return v > 0.0; });
  return 100.0 * static_cast<double>(positive) / static_cast<double>(values.size());
}

std::vector<RankEntry> rank_languages(const TransferMatrix& matrix, Axis axis) {
  std::vector<RankEntry> entries;
  for (const auto& lang : matrix.axis(axis)) {
    const auto values = matrix.values_for(lang, axis);
    if (values.empty()) continue;
    const auto positive =
        std::count_if(values.begin(), values.end(), [](double v) { return v > 0.0; });
    entries.push_back(RankEntry{lang, mean(values),
                                100.0 * static_cast<double>(positive) /
                                    static_cast<double>(values.size()),
                                0});
  }
  std::sort(entries.begin(), entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.agg_ts != b.agg_ts) return a.agg_ts > b.agg_ts;
    return a.lang < b.lang;
  });
  for (std::size_t k = 0; k < entries.size(); ++k) entries[k].rank = static_cast<int>(k + 1);
  return entries;
}

std::map<std::string, RecipientCounts> max_min_recipient_counts(const TransferMatrix& matrix) {
  if (matrix.transfers().size() < 2)
    throw MetricError("max/min recipient counts need at least two transfer languages");
  return recipient_counts(matrix);
}

VarianceStats variance_stats(const TransferMatrix& matrix, std::string_view transfer) {
  auto values = matrix.values_for(transfer, Axis::Transfer);
  if (values.size() < 2)
    throw MetricError(
        fmt::format("variance of '{}' needs at least two populated targets", transfer));
  for (auto& v : values) v *= 100.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const auto counts = recipient_counts(matrix).at(std::string(transfer));
  return VarianceStats{ss / static_cast<double>(values.size()), counts.max_count,
                       counts.min_count};
}

std::string_view to_string(VarianceProfile profile) {
  switch (profile) {
    case VarianceProfile::PlusAndMinus:
      return "PlusAndMinus";
    case VarianceProfile::MostlyPlus:
      return "MostlyPlus";
    case VarianceProfile::MostlyMinus:
      return "MostlyMinus";
    case VarianceProfile::Neutral:
      break;
  }
  return "Neutral";
}

VarianceProfile variance_profile(const VarianceStats& stats, int threshold) {
  const bool many_max = stats.max_count >= threshold;
  const bool many_min = stats.min_count >= threshold;
  if (many_max && many_min) return VarianceProfile::PlusAndMinus;
  if (many_max) return VarianceProfile::MostlyPlus;
  if (many_min) return VarianceProfile::MostlyMinus;
  return VarianceProfile::Neutral;
}

ImprovementFlags improvement_flags(double base, std::optional<double> first_step,
                                   std::optional<double> last_step,
                                   std::span<const std::optional<double>> interactions) {
  ImprovementFlags flags;
  if (first_step) flags.first_step = *first_step > base;
  if (last_step) flags.last_step = *last_step > base;
  for (const auto& score : interactions) {
    if (!score) continue;
    flags.interaction = flags.interaction.value_or(false) || *score > base;
  }
  return flags;
}

// ---- progression ----------------------------------------------------------------

std::vector<ProgressionPoint> progression_series(const Ledger& ledger, std::string_view model,
                                                 std::string_view task, std::string_view transfer,
                                                 std::string_view target) {
  const auto base = ledger.baseline(model, task, target);
  if (!base)
    throw MetricError(
        fmt::format("missing baseline for model={} task={} target={}", model, task, target));
  if (*base == 0.0)
    throw MetricError(fmt::format("baseline is zero for model={} task={} target={}", model, task,
                                  target));
  std::vector<ProgressionPoint> series;
  for (const int steps : ledger.step_grid()) {
    const auto reps = ledger.runs(model, task, transfer, target, steps);
    if (!reps || reps->empty()) continue;
    std::vector<double> rel;
    rel.reserve(reps->size());
    for (double s : *reps) rel.push_back((s - *base) / *base);
    const double m = mean(rel);
    double ss = 0.0;
    for (double r : rel) ss += (r - m) * (r - m);
    series.push_back(ProgressionPoint{steps, m, std::sqrt(ss / static_cast<double>(rel.size())),
                                      static_cast<int>(rel.size())});
  }
  if (series.empty())
    throw MetricError(fmt::format("no runs for model={} task={} transfer={} target={}", model,
                                  task, transfer, target));
  return series;
}

SustainedImprovement sustained_improvement_pct(const Ledger& ledger, std::string_view model,
                                               std::span<const std::string> tasks, int steps) {
  SustainedImprovement result;
  for (const auto& task : tasks) {
    TaskShare share{task, 0, 0, 0.0};
    for (const auto& lang : ledger.transfers(model, task)) {
      const auto base = ledger.baseline(model, task, lang);
      const auto reps = ledger.runs(model, task, lang, lang, steps);
      if (!base || *base == 0.0 || !reps || reps->empty()) continue;
      ++share.total;
      if (relative_gain(*reps, *base) > 0.0) ++share.positive;
    }
    if (share.total == 0) continue;
    share.percent = 100.0 * share.positive / share.total;
    result.per_task.push_back(std::move(share));
  }
  if (result.per_task.empty())
    throw MetricError(fmt::format("no self-evaluation cells at steps={} for model={}", steps, model));
  double sum = 0.0;
  for (const auto& s : result.per_task) sum += s.percent;
  result.percent = sum / static_cast<double>(result.per_task.size());
  return result;
}

SeenUnseenTable seen_unseen_matrix(const TransferMatrix& matrix, const LanguageRegistry& registry) {
  std::array<std::array<double, 2>, 2> sums{};
  SeenUnseenTable table;
  auto group = [&](const std::string& iso) {
    const auto* info = registry.find(iso);
    if (!info) throw MetricError(fmt::format("language '{}' is not in the registry", iso));
    return info->seen ? 0 : 1;
  };
  for (std::size_t i = 0; i < matrix.transfers().size(); ++i) {
    const int g_transfer = group(matrix.transfers()[i]);
    for (std::size_t j = 0; j < matrix.targets().size(); ++j) {
      const auto& v = matrix.at(i, j);
      if (!v) continue;
      const int g_target = group(matrix.targets()[j]);
      sums[g_transfer][g_target] += *v;
      ++table.cells[g_transfer][g_target].count;
    }
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (table.cells[a][b].count > 0)
        table.cells[a][b].mean_ts = sums[a][b] / static_cast<double>(table.cells[a][b].count);
  return table;
}

std::string_view to_string(RecipientBucket bucket) {
  switch (bucket) {
    case RecipientBucket::Never:
      return "never";
    case RecipientBucket::Low:
      return "low";
    case RecipientBucket::High:
      return "high";
    case RecipientBucket::Universal:
      break;
  }
  return "universal";
}

RecipientBucket recipient_bucket(double pct) {
  if (pct <= 0.0) return RecipientBucket::Never;
  if (pct >= 100.0) return RecipientBucket::Universal;
  if (pct <= 90.0) return RecipientBucket::Low;
  return RecipientBucket::High;
}

RecipientSummary recipient_summary(const TransferMatrix& matrix, std::string_view target) {
  const double pct = positive_pct(matrix, target, Axis::Target);
  return RecipientSummary{pct, recipient_bucket(pct)};
}

Coverage coverage(const TransferMatrix& matrix) {
  const std::size_t populated = matrix.populated();
  return Coverage{matrix.model(),
                  matrix.task(),
                  matrix.transfers().size(),
                  matrix.targets().size(),
                  populated,
                  matrix.transfers().size() * matrix.targets().size() - populated};
}

}  // namespace transferscope

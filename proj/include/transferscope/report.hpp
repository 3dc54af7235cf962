#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transferscope/interference.hpp"
#include "transferscope/ledger.hpp"
#include "transferscope/stats.hpp"
#include "transferscope/transfer_metrics.hpp"

namespace transferscope {

enum class ReportKind {
  RankTable,
  ComparisonTable,
  RecipientMap,
  ViolinData,
  Progression,
  InterferenceScatter,
  SeenUnseenHeatmap,
  CorrelationTable,
  Coverage,
};

enum class OutputFormat { Csv, Markdown, Json, Svg };

struct ReportSpec {
  ReportKind kind = ReportKind::RankTable;
  std::optional<std::string> model;
  std::optional<std::string> task;
  OutputFormat format = OutputFormat::Csv;
};

// Throws UsageError when the format cannot express the kind (svg is only
// available for scatter, progression, heatmap and violin data).
void validate(const ReportSpec& spec);

std::string_view to_string(ReportKind kind);
std::string_view to_string(OutputFormat format);
ReportKind parse_report_kind(std::string_view text);
OutputFormat parse_output_format(std::string_view text);

// Plain string table used by the csv / markdown / json renderers.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  // Columns whose cells are emitted as JSON numbers (empty cells become null).
  std::vector<bool> numeric;
};

std::string render_table(const Table& table, OutputFormat format);
Table parse_table_csv(std::string_view text);

// ---- rank tables -------------------------------------------------------------

// csv: rank,lang,unseen,agg_ts,positive_pct (ts 4 d.p., unseen as "*").
// markdown: | rank | lang | ts | +(%) | with unseen languages suffixed by "*",
// ts to 2 d.p. and +(%) to 1 d.p.
std::string render_rank_table(std::span<const RankEntry> ranking, const LanguageRegistry& registry,
                              OutputFormat format);

// ---- comparison tables -------------------------------------------------------

struct ComparisonRow {
  std::string lang;
  bool unseen = false;
  double base = 0.0;
  std::vector<std::optional<double>> step_scores;       // aligned with ComparisonTable::steps
  std::array<std::optional<double>, 3> interactions{};  // [1A], [2A], [3A]
  ImprovementFlags flags;
};

struct ComparisonTable {
  std::vector<int> steps;
  std::vector<ComparisonRow> rows;
};

// Completes the flags of a row from its scores: first and last step against
// base, plus the interaction columns.
void fill_improvement_flags(ComparisonRow& row);

// Self-evaluation rows (transfer == target) of every transfer language with a
// baseline: mean repetition score per grid step and the averaged [kA] scores.
ComparisonTable comparison_table(const Ledger& ledger, std::string_view model,
                                 std::string_view task);

std::string render_comparison_table(const ComparisonTable& table, OutputFormat format);

// ---- per-language summaries ------------------------------------------------

struct RecipientRow {
  std::string target;
  bool unseen = false;
  double agg_ts = 0.0;
  RecipientSummary summary;
};

std::vector<RecipientRow> recipient_map(const TransferMatrix& matrix,
                                        const LanguageRegistry& registry);
std::string render_recipient_map(std::span<const RecipientRow> rows, OutputFormat format);

struct VarianceRow {
  std::string transfer;
  bool unseen = false;
  double agg_ts = 0.0;
  VarianceStats stats;
  VarianceProfile profile = VarianceProfile::Neutral;
};

// Transfer languages with at least two populated targets, by variance
// descending (ties by iso).
std::vector<VarianceRow> variance_table(const TransferMatrix& matrix,
                                        const LanguageRegistry& registry,
                                        int threshold = kDefaultProfileThreshold);
std::string render_variance_table(std::span<const VarianceRow> rows, OutputFormat format);

std::string render_correlation_table(const CorrelationMatrix& matrix, OutputFormat format);
std::string render_heatmap(const SeenUnseenTable& table, OutputFormat format);
std::string render_coverage(std::span<const Coverage> rows, OutputFormat format);
std::string render_sustained(const SustainedImprovement& result, int steps, OutputFormat format);

// ---- figure data -------------------------------------------------------------

struct ProgressionSeries {
  std::string transfer;
  std::string target;
  std::vector<ProgressionPoint> points;
};

// Per-transfer raw ts distributions ordered like `order` (csv or svg).
std::string render_violin(const TransferMatrix& matrix, std::span<const VarianceRow> order,
                          OutputFormat format);
std::string render_progression(std::span<const ProgressionSeries> series, OutputFormat format);
std::string render_scatter(std::span<const ScatterPoint> points, OutputFormat format);

// ---- batch -----------------------------------------------------------------

struct ReportAllOptions {
  StepSelector selector = StepSelector::minimal();
  int threshold = kDefaultProfileThreshold;
  TieRule ties = TieRule::Negative;
  // Worker threads for the per-(model, task) work; output does not depend on it.
  int threads = 1;
};

// Every report for every (model, task) as relative path -> file content.
std::map<std::string, std::string> build_all_reports(const Ledger& ledger,
                                                     const ReportAllOptions& options = {});

// Writes build_all_reports() below `out_dir`; returns the number of files.
std::size_t report_all(const Ledger& ledger, const std::filesystem::path& out_dir,
                       const ReportAllOptions& options = {});

}  // namespace transferscope

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace transferscope {

// One transfer/target language as listed in the language registry.
struct LanguageInfo {
  std::string iso;  // three lowercase ASCII letters
  std::string family;
  std::string genus;
  std::string script;
  bool seen = true;  // present in the base model's pretraining data

  friend bool operator==(const LanguageInfo&, const LanguageInfo&) = default;
};

bool is_valid_iso(std::string_view code) noexcept;

// Registry of languages keyed by iso code. Entries are kept sorted by iso.
class LanguageRegistry {
 public:
  LanguageRegistry() = default;
  // Throws LedgerError on invalid codes, duplicates or empty descriptive fields.
  explicit LanguageRegistry(std::vector<LanguageInfo> entries);

  const LanguageInfo* find(std::string_view iso) const noexcept;
  bool contains(std::string_view iso) const noexcept { return find(iso) != nullptr; }
  const std::vector<LanguageInfo>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<LanguageInfo> entries_;
};

struct TaskId {
  std::string id;
  std::string metric_name;
};

// Known task ids map to their evaluation metric; anything else reports "score".
TaskId task_id(std::string_view id);

// Canonical (sorted, duplicate-free) list of 1-3 language codes.
using Combo = std::vector<std::string>;

// Sorts the codes; throws LedgerError on duplicates or a size outside [1,3].
Combo make_combo(std::vector<std::string> codes);
// Parses "ara+ben+hin" style combos into canonical order.
Combo parse_combo(std::string_view text);
std::string combo_to_string(const Combo& combo);

struct BaselineRecord {
  std::string model;
  std::string task;
  std::string target;
  double score = 0.0;

  friend bool operator==(const BaselineRecord&, const BaselineRecord&) = default;
};

struct RunRecord {
  std::string model;
  std::string task;
  std::string transfer;
  std::string target;
  int steps = 1;
  int rep = 0;
  double score = 0.0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct InteractionRecord {
  std::string model;
  std::string task;
  Combo combo;
  std::string eval;
  double score = 0.0;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

struct LoadOptions {
  // Promote warnings (non-constant repetition counts) to errors.
  bool strict = false;
};

// Immutable collection of experiment scores with exact-match lookups.
//
// Records are stored in canonical order: baselines by (model, task, target),
// runs by (model, task, transfer, target, steps, rep), interactions by
// (model, task, combo, eval). Every lookup is deterministic and the object
// is safe to share between threads once built.
class Ledger {
 public:
  Ledger() = default;

  // Validates all cross-record invariants. Throws LedgerError.
  static Ledger build(LanguageRegistry languages, std::vector<BaselineRecord> baselines,
                      std::vector<RunRecord> runs, std::vector<InteractionRecord> interactions,
                      const LoadOptions& options = {});

  const LanguageRegistry& languages() const noexcept { return languages_; }
  const std::vector<BaselineRecord>& baselines() const noexcept { return baselines_; }
  const std::vector<RunRecord>& runs() const noexcept { return runs_; }
  const std::vector<InteractionRecord>& interactions() const noexcept { return interactions_; }
  const std::vector<int>& step_grid() const noexcept { return step_grid_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  // Repetition count n inferred for (model, task).
  std::optional<int> rep_count(std::string_view model, std::string_view task) const;
  // The common n when every (model, task) agrees.
  std::optional<int> rep_count() const;

  std::vector<std::string> models() const;
  std::vector<std::string> tasks(std::string_view model) const;
  // Languages appearing on the transfer / target side of runs for (model, task).
  std::vector<std::string> transfers(std::string_view model, std::string_view task) const;
  std::vector<std::string> targets(std::string_view model, std::string_view task) const;

  std::optional<double> baseline(std::string_view model, std::string_view task,
                                 std::string_view target) const;
  // Scores ordered by repetition index.
  std::optional<std::vector<double>> runs(std::string_view model, std::string_view task,
                                          std::string_view transfer, std::string_view target,
                                          int steps) const;
  std::optional<double> interaction(std::string_view model, std::string_view task,
                                    const Combo& combo, std::string_view eval) const;

 private:
  using BaselineKey = std::tuple<std::string, std::string, std::string>;
  using CellKey = std::tuple<std::string, std::string, std::string, std::string, int>;
  using InteractionKey = std::tuple<std::string, std::string, std::string, std::string>;
  using ModelTask = std::tuple<std::string, std::string>;

  LanguageRegistry languages_;
  std::vector<BaselineRecord> baselines_;
  std::vector<RunRecord> runs_;
  std::vector<InteractionRecord> interactions_;
  std::vector<int> step_grid_;
  std::vector<std::string> warnings_;

  std::map<BaselineKey, double, std::less<>> baseline_index_;
  std::map<CellKey, std::pair<std::size_t, std::size_t>, std::less<>> run_index_;
  std::map<InteractionKey, double, std::less<>> interaction_index_;
  std::map<ModelTask, int, std::less<>> rep_counts_;
};

// ---- ingestion -------------------------------------------------------------

LanguageRegistry load_language_registry(const std::filesystem::path& path);
LanguageRegistry parse_language_registry(std::istream& in, const std::string& source);

struct LedgerPaths {
  std::filesystem::path baselines;
  std::filesystem::path runs;
  std::filesystem::path interactions;  // optional; empty path means none
};

// Each file may be CSV or JSON-lines; the format is detected from content.
Ledger load_ledger(const LedgerPaths& paths, LanguageRegistry registry,
                   const LoadOptions& options = {});

// Loads `languages`, `baselines`, `runs` and (optionally) `interactions` from
// a directory, accepting either the .csv or .jsonl extension for each.
Ledger load_ledger_dir(const std::filesystem::path& dir, const LoadOptions& options = {});

// ---- canonical serialization -----------------------------------------------

// Shortest decimal text that parses back to exactly `value`.
std::string format_score(double value);

void write_languages_csv(const LanguageRegistry& registry, std::ostream& out);
void write_baselines_csv(const Ledger& ledger, std::ostream& out);
void write_runs_csv(const Ledger& ledger, std::ostream& out);
void write_interactions_csv(const Ledger& ledger, std::ostream& out);
// Writes languages.csv, baselines.csv, runs.csv and interactions.csv.
void save_ledger(const Ledger& ledger, const std::filesystem::path& dir);

// ---- synthetic generation --------------------------------------------------

// Additive effect (in score points) forced onto one (task, transfer, target) cell.
struct PlantedEffect {
  std::string task;
  std::string transfer;
  std::string target;
  double effect = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  int n_transfer = 3;
  int n_target = 4;
  int tasks = 1;
  std::vector<int> step_grid{1, 10, 100, 1000};
  int rep_count = 10;
  double noise_sd = 1.0;
  // Spread of the random per-cell effect; 0 disables random effects.
  double effect_sd = 2.0;
  // Effect at step s is effect * (1 + trend * log10(s)).
  double trend = 0.0;
  // Probability that a non-self (transfer, target) cell is left out entirely.
  double missing_rate = 0.0;
  // Largest adapter combination size generated (0 disables interactions).
  int max_arity = 3;
  double interaction_sd = 1.0;
  std::string model = "synth";
  std::vector<PlantedEffect> planted;
};

// Ground truth for one generated cell: the effect added at that step.
struct TruthRow {
  std::string task;
  std::string transfer;
  std::string target;
  int steps = 1;
  double effect = 0.0;
};

struct SynthResult {
  Ledger ledger;
  std::vector<TruthRow> truth;
};

// Pure function of its configuration. Throws std::invalid_argument on bad dims.
SynthResult synth_ledger(const SynthConfig& config);
void write_truth_csv(const std::vector<TruthRow>& truth, std::ostream& out);

}  // namespace transferscope

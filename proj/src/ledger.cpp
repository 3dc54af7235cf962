#include "transferscope/ledger.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "transferscope/error.hpp"

namespace transferscope {

namespace {

constexpr std::array<std::string_view, 5> kLanguageColumns{"iso", "family", "genus", "script",
                                                           "seen"};
constexpr std::array<std::string_view, 4> kBaselineColumns{"model", "task", "target", "score"};
constexpr std::array<std::string_view, 7> kRunColumns{"model",  "task", "transfer", "target",
                                                      "steps", "rep",  "score"};
constexpr std::array<std::string_view, 5> kInteractionColumns{"model", "task", "combo", "eval",
                                                              "score"};

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::string json_field_text(const nlohmann::json& value) {
  switch (value.type()) {
    case nlohmann::json::value_t::string:
      return value.get<std::string>();
    case nlohmann::json::value_t::boolean:
      return value.get<bool>() ? "true" : "false";
    case nlohmann::json::value_t::number_integer:
      return std::to_string(value.get<long long>());
    case nlohmann::json::value_t::number_unsigned:
      return std::to_string(value.get<unsigned long long>());
    case nlohmann::json::value_t::number_float:
      return format_score(value.get<double>());
    case nlohmann::json::value_t::array: {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined.push_back('+');
        joined += json_field_text(item);
      }
      return joined;
    }
    default:
      return value.dump();
  }
}

// Reads a CSV (header required) or JSON-lines table into rows ordered like
// `columns`. The format is chosen from the first non-blank character.
template <std::size_t N>
std::vector<Row> read_table(std::istream& in, const std::string& source,
                            const std::array<std::string_view, N>& columns) {
  std::vector<std::string> lines;
  std::string line;
  while (csv::read_line(in, line)) lines.push_back(line);
  if (in.bad()) throw LedgerError("read failure", source);

  // Drop a UTF-8 byte order mark.
  if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);

  std::size_t first = 0;
  while (first < lines.size() && csv::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw LedgerError("empty file, header row required", source, 1);

  std::vector<Row> rows;
  const bool json_lines = csv::trim(lines[first]).front() == '{';
  if (json_lines) {
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (csv::trim(lines[i]).empty()) continue;
      nlohmann::json object;
      try {
        object = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::parse_error& e) {
        throw LedgerError(fmt::format("invalid JSON: {}", e.what()), source, i + 1);
      }
      if (!object.is_object()) throw LedgerError("expected a JSON object", source, i + 1);
      Row row{i + 1, {}};
      for (const auto column : columns) {
        const auto it = object.find(std::string(column));
        if (it == object.end())
          throw LedgerError(fmt::format("missing field '{}'", column), source, i + 1);
        row.fields.push_back(json_field_text(*it));
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }

  const auto header = csv::split_line(lines[first]);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c >= header.size())
      throw LedgerError(fmt::format("missing column '{}' in header", columns[c]), source, first + 1);
    if (csv::trim(header[c]) != columns[c])
      throw LedgerError(fmt::format("header column {} is '{}', expected '{}'", c + 1,
                                    csv::trim(header[c]), columns[c]),
                        source, first + 1);
  }
  if (header.size() != columns.size())
    throw LedgerError(fmt::format("header has {} columns, expected {}", header.size(),
                                  columns.size()),
                      source, first + 1);

  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    auto fields = csv::split_line(lines[i]);
    if (fields.size() != columns.size())
      throw LedgerError(fmt::format("expected {} fields, found {}", columns.size(), fields.size()),
                        source, i + 1);
    for (auto& f : fields) f = std::string(csv::trim(f));
    rows.push_back(Row{i + 1, std::move(fields)});
  }
  return rows;
}

std::vector<Row> read_table_file(const std::filesystem::path& path, auto columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LedgerError("cannot open file", path.string());
  return read_table(in, path.string(), columns);
}

double parse_score(std::string_view text, const std::string& source, std::size_t line) {
  const auto value = csv::parse_double(text);
  if (!value || !std::isfinite(*value))
    throw LedgerError(fmt::format("invalid score '{}'", text), source, line);
  if (*value < 0.0 || *value > 100.0)
    throw LedgerError(fmt::format("score {} outside [0,100]", text), source, line);
  return *value;
}

void require_known(const LanguageRegistry& registry, const std::string& iso,
                   const std::string& source, std::size_t line) {
  if (!is_valid_iso(iso))
    throw LedgerError(fmt::format("malformed iso code '{}'", iso), source, line);
  if (!registry.contains(iso))
    throw LedgerError(fmt::format("unknown language '{}'", iso), source, line);
}

void require_nonempty(const std::string& value, std::string_view column, const std::string& source,
                      std::size_t line) {
  if (value.empty()) throw LedgerError(fmt::format("empty '{}'", column), source, line);
}

std::vector<BaselineRecord> parse_baselines(const std::vector<Row>& rows,
                                            const LanguageRegistry& registry,
                                            const std::string& source) {
  std::vector<BaselineRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    BaselineRecord rec{row.fields[0], row.fields[1], row.fields[2],
                       parse_score(row.fields[3], source, row.line)};
    require_nonempty(rec.model, "model", source, row.line);
    require_nonempty(rec.task, "task", source, row.line);
    require_known(registry, rec.target, source, row.line);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RunRecord> parse_runs(const std::vector<Row>& rows, const LanguageRegistry& registry,
                                  const std::string& source) {
  std::vector<RunRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    RunRecord rec;
    rec.model = row.fields[0];
    rec.task = row.fields[1];
    rec.transfer = row.fields[2];
    rec.target = row.fields[3];
    require_nonempty(rec.model, "model", source, row.line);
    require_nonempty(rec.task, "task", source, row.line);
    require_known(registry, rec.transfer, source, row.line);
    require_known(registry, rec.target, source, row.line);
    const auto steps = csv::parse_int(row.fields[4]);
    if (!steps || *steps <= 0 || *steps > 1'000'000'000)
      throw LedgerError(fmt::format("steps must be a positive integer, got '{}'", row.fields[4]),
                        source, row.line);
    const auto rep = csv::parse_int(row.fields[5]);
    if (!rep || *rep < 0 || *rep > 1'000'000)
      throw LedgerError(fmt::format("rep must be a non-negative integer, got '{}'", row.fields[5]),
                        source, row.line);
    rec.steps = static_cast<int>(*steps);
    rec.rep = static_cast<int>(*rep);
    rec.score = parse_score(row.fields[6], source, row.line);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<InteractionRecord> parse_interactions(const std::vector<Row>& rows,
                                                  const LanguageRegistry& registry,
                                                  const std::string& source) {
  std::vector<InteractionRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    InteractionRecord rec;
    rec.model = row.fields[0];
    rec.task = row.fields[1];
    require_nonempty(rec.model, "model", source, row.line);
    require_nonempty(rec.task, "task", source, row.line);
    try {
      rec.combo = parse_combo(row.fields[2]);
    } catch (const LedgerError& e) {
      throw LedgerError(e.what(), source, row.line);
    }
    for (const auto& iso : rec.combo) require_known(registry, iso, source, row.line);
    rec.eval = row.fields[3];
    require_known(registry, rec.eval, source, row.line);
    if (std::find(rec.combo.begin(), rec.combo.end(), rec.eval) == rec.combo.end())
      throw LedgerError(fmt::format("eval language '{}' is not part of combo '{}'", rec.eval,
                                    row.fields[2]),
                        source, row.line);
    rec.score = parse_score(row.fields[4], source, row.line);
    out.push_back(std::move(rec));
  }
  return out;
}

bool parse_bool(std::string_view text, bool& value) {
  if (text == "true") {
    value = true;
    return true;
  }
  if (text == "false") {
    value = false;
    return true;
  }
  return false;
}

std::filesystem::path find_table(const std::filesystem::path& dir, std::string_view stem,
                                 bool required) {
  for (const char* ext : {".csv", ".jsonl"}) {
    auto candidate = dir / (std::string(stem) + ext);
    if (std::filesystem::exists(candidate)) return candidate;
  }
  if (required)
    throw LedgerError(fmt::format("no {}.csv or {}.jsonl in directory", stem, stem), dir.string());
  return {};
}

}  // namespace

// ---- registry ----------------------------------------------------------------

bool is_valid_iso(std::string_view code) noexcept {
  return code.size() == 3 &&
         std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

LanguageRegistry::LanguageRegistry(std::vector<LanguageInfo> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!is_valid_iso(e.iso)) throw LedgerError(fmt::format("malformed iso code '{}'", e.iso));
    if (e.family.empty() || e.genus.empty() || e.script.empty())
      throw LedgerError(fmt::format("language '{}' has an empty family, genus or script", e.iso));
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const LanguageInfo& a, const LanguageInfo& b) { return a.iso < b.iso; });
  const auto dup = std::adjacent_find(
      entries_.begin(), entries_.end(),
      [](const LanguageInfo& a, const LanguageInfo& b) { return a.iso == b.iso; });
  if (dup != entries_.end()) throw LedgerError(fmt::format("duplicate iso code '{}'", dup->iso));
}

const LanguageInfo* LanguageRegistry::find(std::string_view iso) const noexcept {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), iso,
                                   [](const LanguageInfo& e, std::string_view key) { return e.iso < key; });
  if (it == entries_.end() || it->iso != iso) return nullptr;
  return &*it;
}

LanguageRegistry parse_language_registry(std::istream& in, const std::string& source) {
  const auto rows = read_table(in, source, kLanguageColumns);
  std::vector<LanguageInfo> entries;
  std::set<std::string, std::less<>> seen_codes;
  for (const auto& row : rows) {
    LanguageInfo info{row.fields[0], row.fields[1], row.fields[2], row.fields[3], true};
    if (!is_valid_iso(info.iso))
      throw LedgerError(fmt::format("malformed iso code '{}'", info.iso), source, row.line);
    if (!seen_codes.insert(info.iso).second)
      throw LedgerError(fmt::format("duplicate iso code '{}'", info.iso), source, row.line);
    require_nonempty(info.family, "family", source, row.line);
    require_nonempty(info.genus, "genus", source, row.line);
    require_nonempty(info.script, "script", source, row.line);
    if (!parse_bool(row.fields[4], info.seen))
      throw LedgerError(fmt::format("seen must be true or false, got '{}'", row.fields[4]), source,
                        row.line);
    entries.push_back(std::move(info));
  }
  return LanguageRegistry(std::move(entries));
}

LanguageRegistry load_language_registry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LedgerError("cannot open file", path.string());
  return parse_language_registry(in, path.string());
}

TaskId task_id(std::string_view id) {
  static const std::map<std::string, std::string, std::less<>> kMetrics{
      {"dep", "LAS"},       {"pos", "accuracy"},  {"ner", "F1"},
      {"xnli", "accuracy"}, {"anli", "accuracy"}, {"tydiqa", "span-F1"}};
  const auto it = kMetrics.find(id);
  return TaskId{std::string(id), it == kMetrics.end() ? "score" : it->second};
}

// ---- combos ----------------------------------------------------------------

Combo make_combo(std::vector<std::string> codes) {
  if (codes.empty() || codes.size() > 3)
    throw LedgerError(fmt::format("combo must hold 1 to 3 languages, got {}", codes.size()));
  std::sort(codes.begin(), codes.end());
  if (std::adjacent_find(codes.begin(), codes.end()) != codes.end())
    throw LedgerError("combo lists a language twice");
  return codes;
}

Combo parse_combo(std::string_view text) {
  std::vector<std::string> codes;
  std::size_t start = 0;
  while (true) {
    const auto plus = text.find('+', start);
    codes.emplace_back(csv::trim(text.substr(start, plus - start)));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  for (const auto& c : codes)
    if (!is_valid_iso(c)) throw LedgerError(fmt::format("malformed iso code '{}' in combo", c));
  return make_combo(std::move(codes));
}

std::string combo_to_string(const Combo& combo) {
  std::string out;
  for (const auto& c : combo) {
    if (!out.empty()) out.push_back('+');
    out += c;
  }
  return out;
}

// ---- ledger ----------------------------------------------------------------

Ledger Ledger::build(LanguageRegistry languages, std::vector<BaselineRecord> baselines,
                     std::vector<RunRecord> runs, std::vector<InteractionRecord> interactions,
                     const LoadOptions& options) {
  auto check_iso = [&](const std::string& iso) {
    if (!languages.contains(iso)) throw LedgerError(fmt::format("unknown language '{}'", iso));
  };
  auto check_score = [](double score) {
    if (!std::isfinite(score) || score < 0.0 || score > 100.0)
      throw LedgerError(fmt::format("score {} outside [0,100]", score));
  };

  Ledger ledger;

  for (const auto& b : baselines) {
    check_iso(b.target);
    check_score(b.score);
  }
  std::sort(baselines.begin(), baselines.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.task, a.target) < std::tie(b.model, b.task, b.target);
  });
  for (const auto& b : baselines) {
    if (!ledger.baseline_index_.emplace(BaselineKey{b.model, b.task, b.target}, b.score).second)
      throw LedgerError(fmt::format("duplicate baseline for model={} task={} target={}", b.model,
                                    b.task, b.target));
  }

  for (const auto& r : runs) {
    check_iso(r.transfer);
    check_iso(r.target);
    check_score(r.score);
    if (r.steps <= 0) throw LedgerError(fmt::format("non-positive steps {}", r.steps));
    if (r.rep < 0) throw LedgerError(fmt::format("negative rep {}", r.rep));
  }
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.task, a.transfer, a.target, a.steps, a.rep) <
           std::tie(b.model, b.task, b.transfer, b.target, b.steps, b.rep);
  });
  std::set<int> grid;
  for (std::size_t i = 0; i < runs.size();) {
    const auto& r = runs[i];
    std::size_t j = i + 1;
    while (j < runs.size() && runs[j].model == r.model && runs[j].task == r.task &&
           runs[j].transfer == r.transfer && runs[j].target == r.target &&
           runs[j].steps == r.steps) {
      if (runs[j].rep == runs[j - 1].rep)
        throw LedgerError(fmt::format(
            "duplicate run for model={} task={} transfer={} target={} steps={} rep={}", r.model,
            r.task, r.transfer, r.target, r.steps, runs[j].rep));
      ++j;
    }
    ledger.run_index_.emplace(CellKey{r.model, r.task, r.transfer, r.target, r.steps},
                              std::pair{i, j});
    grid.insert(r.steps);
    i = j;
  }
  ledger.step_grid_.assign(grid.begin(), grid.end());

  // Repetition count: per (model, task) the largest repetition vector; every
  // cell must carry exactly reps 0..n-1.
  for (const auto& [key, range] : ledger.run_index_) {
    ModelTask mt{std::get<0>(key), std::get<1>(key)};
    auto& n = ledger.rep_counts_[mt];
    n = std::max(n, static_cast<int>(range.second - range.first));
  }
  std::map<ModelTask, std::pair<std::size_t, std::string>> irregular;
  for (const auto& [key, range] : ledger.run_index_) {
    ModelTask mt{std::get<0>(key), std::get<1>(key)};
    const int n = ledger.rep_counts_.at(mt);
    bool regular = static_cast<int>(range.second - range.first) == n;
    for (std::size_t k = range.first; regular && k < range.second; ++k)
      regular = runs[k].rep == static_cast<int>(k - range.first);
    if (!regular) {
      auto& entry = irregular[mt];
      if (entry.first++ == 0)
        entry.second = fmt::format("transfer={} target={} steps={}", std::get<2>(key),
                                   std::get<3>(key), std::get<4>(key));
    }
  }
  for (const auto& [mt, info] : irregular) {
    auto message = fmt::format(
        "non-constant repetition count for model={} task={}: {} cell(s) lack reps 0..{} "
        "(first: {})",
        std::get<0>(mt), std::get<1>(mt), info.first, ledger.rep_counts_.at(mt) - 1, info.second);
    if (options.strict) throw LedgerError(message);
    ledger.warnings_.push_back(std::move(message));
  }

  for (auto& rec : interactions) {
    rec.combo = make_combo(std::move(rec.combo));
    for (const auto& iso : rec.combo) check_iso(iso);
    check_iso(rec.eval);
    check_score(rec.score);
    if (std::find(rec.combo.begin(), rec.combo.end(), rec.eval) == rec.combo.end())
      throw LedgerError(fmt::format("eval language '{}' is not part of combo '{}'", rec.eval,
                                    combo_to_string(rec.combo)));
  }
  std::sort(interactions.begin(), interactions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.task, a.combo, a.eval) < std::tie(b.model, b.task, b.combo, b.eval);
  });
  for (const auto& rec : interactions) {
    if (!ledger.interaction_index_
             .emplace(InteractionKey{rec.model, rec.task, combo_to_string(rec.combo), rec.eval},
                      rec.score)
             .second)
      throw LedgerError(fmt::format("duplicate interaction for model={} task={} combo={} eval={}",
                                    rec.model, rec.task, combo_to_string(rec.combo), rec.eval));
  }

  ledger.languages_ = std::move(languages);
  ledger.baselines_ = std::move(baselines);
  ledger.runs_ = std::move(runs);
  ledger.interactions_ = std::move(interactions);
  return ledger;
}

std::optional<int> Ledger::rep_count(std::string_view model, std::string_view task) const {
  const auto it = rep_counts_.find(std::tuple<std::string_view, std::string_view>{model, task});
  if (it == rep_counts_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Ledger::rep_count() const {
  std::optional<int> common;
  for (const auto& [mt, n] : rep_counts_) {
    if (common && *common != n) return std::nullopt;
    common = n;
  }
  return common;
}

std::vector<std::string> Ledger::models() const {
  std::set<std::string> out;
  for (const auto& b : baselines_) out.insert(b.model);
  for (const auto& r : runs_) out.insert(r.model);
  for (const auto& i : interactions_) out.insert(i.model);
  return {out.begin(), out.end()};
}

std::vector<std::string> Ledger::tasks(std::string_view model) const {
  std::set<std::string> out;
  for (const auto& b : baselines_)
    if (b.model == model) out.insert(b.task);
  for (const auto& r : runs_)
    if (r.model == model) out.insert(r.task);
  for (const auto& i : interactions_)
    if (i.model == model) out.insert(i.task);
  return {out.begin(), out.end()};
}

std::vector<std::string> Ledger::transfers(std::string_view model, std::string_view task) const {
  std::set<std::string> out;
  for (const auto& [key, range] : run_index_)
    if (std::get<0>(key) == model && std::get<1>(key) == task) out.insert(std::get<2>(key));
  return {out.begin(), out.end()};
}

std::vector<std::string> Ledger::targets(std::string_view model, std::string_view task) const {
  std::set<std::string> out;
  for (const auto& [key, range] : run_index_)
    if (std::get<0>(key) == model && std::get<1>(key) == task) out.insert(std::get<3>(key));
  return {out.begin(), out.end()};
}

std::optional<double> Ledger::baseline(std::string_view model, std::string_view task,
                                       std::string_view target) const {
  const auto it = baseline_index_.find(
      std::tuple<std::string_view, std::string_view, std::string_view>{model, task, target});
  if (it == baseline_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<double>> Ledger::runs(std::string_view model, std::string_view task,
                                                std::string_view transfer, std::string_view target,
                                                int steps) const {
  const auto it = run_index_.find(
      std::tuple<std::string_view, std::string_view, std::string_view, std::string_view, int>{
          model, task, transfer, target, steps});
  if (it == run_index_.end()) return std::nullopt;
  std::vector<double> scores;
  scores.reserve(it->second.second - it->second.first);
  for (std::size_t k = it->second.first; k < it->second.second; ++k)
    scores.push_back(runs_[k].score);
  return scores;
}

std::optional<double> Ledger::interaction(std::string_view model, std::string_view task,
                                          const Combo& combo, std::string_view eval) const {
  const auto key = combo_to_string(combo);
  const auto it = interaction_index_.find(
      std::tuple<std::string_view, std::string_view, std::string_view, std::string_view>{
          model, task, key, eval});
  if (it == interaction_index_.end()) return std::nullopt;
  return it->second;
}

// ---- loading ---------------------------------------------------------------

Ledger load_ledger(const LedgerPaths& paths, LanguageRegistry registry, const LoadOptions& options) {
  std::vector<BaselineRecord> baselines;
  std::vector<RunRecord> runs;
  std::vector<InteractionRecord> interactions;
  if (!paths.baselines.empty())
    baselines = parse_baselines(read_table_file(paths.baselines, kBaselineColumns), registry,
                                paths.baselines.string());
  if (!paths.runs.empty())
    runs = parse_runs(read_table_file(paths.runs, kRunColumns), registry, paths.runs.string());
  if (!paths.interactions.empty())
    interactions = parse_interactions(read_table_file(paths.interactions, kInteractionColumns),
                                      registry, paths.interactions.string());
  return Ledger::build(std::move(registry), std::move(baselines), std::move(runs),
                       std::move(interactions), options);
}

Ledger load_ledger_dir(const std::filesystem::path& dir, const LoadOptions& options) {
  if (!std::filesystem::is_directory(dir)) throw LedgerError("not a directory", dir.string());
  auto registry = load_language_registry(find_table(dir, "languages", true));
  LedgerPaths paths{find_table(dir, "baselines", true), find_table(dir, "runs", true),
                    find_table(dir, "interactions", false)};
  return load_ledger(paths, std::move(registry), options);
}

// ---- serialization ---------------------------------------------------------

std::string format_score(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

void write_languages_csv(const LanguageRegistry& registry, std::ostream& out) {
  out << "iso,family,genus,script,seen\n";
  for (const auto& e : registry.entries())
    out << e.iso << ',' << csv::escape(e.family) << ',' << csv::escape(e.genus) << ','
        << csv::escape(e.script) << ',' << (e.seen ? "true" : "false") << '\n';
}

void write_baselines_csv(const Ledger& ledger, std::ostream& out) {
  out << "model,task,target,score\n";
  for (const auto& b : ledger.baselines())
    out << csv::escape(b.model) << ',' << csv::escape(b.task) << ',' << b.target << ','
        << format_score(b.score) << '\n';
}

void write_runs_csv(const Ledger& ledger, std::ostream& out) {
  out << "model,task,transfer,target,steps,rep,score\n";
  for (const auto& r : ledger.runs())
    out << csv::escape(r.model) << ',' << csv::escape(r.task) << ',' << r.transfer << ','
        << r.target << ',' << r.steps << ',' << r.rep << ',' << format_score(r.score) << '\n';
}

void write_interactions_csv(const Ledger& ledger, std::ostream& out) {
  out << "model,task,combo,eval,score\n";
  for (const auto& i : ledger.interactions())
    out << csv::escape(i.model) << ',' << csv::escape(i.task) << ',' << combo_to_string(i.combo)
        << ',' << i.eval << ',' << format_score(i.score) << '\n';
}

void save_ledger(const Ledger& ledger, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, auto&& writer) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw LedgerError("cannot write file", (dir / name).string());
    writer(out);
  };
  write("languages.csv", [&](std::ostream& o) { write_languages_csv(ledger.languages(), o); });
  write("baselines.csv", [&](std::ostream& o) { write_baselines_csv(ledger, o); });
  write("runs.csv", [&](std::ostream& o) { write_runs_csv(ledger, o); });
  write("interactions.csv", [&](std::ostream& o) { write_interactions_csv(ledger, o); });
}

}  // namespace transferscope

#include "transferscope/interference.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "transferscope/error.hpp"

namespace transferscope {

namespace {

bool in_scope(const TaskScope& scope, const std::string& task) { return !scope || *scope == task; }

std::string scope_name(const TaskScope& scope) { return scope ? *scope : std::string("all"); }

void check_arity(int arity) {
  if (arity != 2 && arity != 3)
    throw MetricError(fmt::format("interference arity must be 2 or 3, got {}", arity));
}

ProjectionPoint project(std::span<const int> counts, int arity) {
  double x = 0.0;
  double y = 0.0;
  int total = 0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (counts[p] < 0) throw MetricError("pattern counts must be non-negative");
    const double sign_a = (p >> (arity - 1)) & 1U ? 1.0 : -1.0;
    const double sign_b = (p >> (arity - 2)) & 1U ? 1.0 : -1.0;
    x += counts[p] * sign_a;
    y += counts[p] * sign_b;
    total += counts[p];
  }
  if (total == 0) throw MetricError("cannot project: total pattern count is zero");
  return ProjectionPoint{x / total, y / total};
}

}  // namespace

double interaction_delta(const Ledger& ledger, std::string_view model, std::string_view task,
                         const Combo& combo, std::string_view lang) {
  if (std::find(combo.begin(), combo.end(), lang) == combo.end())
    throw MetricError(fmt::format("'{}' is not a member of combo {}", lang, combo_to_string(combo)));
  const auto mixed = ledger.interaction(model, task, combo, lang);
  if (!mixed)
    throw MetricError(fmt::format("missing interaction score for combo {} evaluated on {}",
                                  combo_to_string(combo), lang));
  const auto mono = ledger.interaction(model, task, Combo{std::string(lang)}, lang);
  if (!mono)
    throw MetricError(fmt::format("missing monolingual score [{}] for model={} task={}", lang,
                                  model, task));
  return *mixed - *mono;
}

InterferenceSign interference_sign(const Ledger& ledger, std::string_view model,
                                   std::string_view task, const Combo& combo, std::string_view lang,
                                   TieRule ties) {
  const double delta = interaction_delta(ledger, model, task, combo, lang);
  return InterferenceSign{std::string(lang), combo, delta, classify(delta, ties)};
}

int InterferenceCounts::total() const {
  int sum = 0;
  for (int c : counts) sum += c;
  return sum;
}

InterferenceCounts InterferenceCounts::from_counts(std::string lang, int arity,
                                                   std::span<const int> counts) {
  check_arity(arity);
  if (counts.size() != (std::size_t{1} << arity))
    throw MetricError(fmt::format("arity {} needs {} pattern counts, got {}", arity, 1 << arity,
                                  counts.size()));
  return InterferenceCounts{std::move(lang), arity, {counts.begin(), counts.end()}, {}};
}

std::size_t InterferenceCounts::pattern_index(std::span<const Sign> signs) {
  std::size_t index = 0;
  for (const Sign s : signs) index = (index << 1) | (s == Sign::Plus ? 1U : 0U);
  return index;
}

std::string InterferenceCounts::pattern_label(std::size_t index, int arity) {
  static constexpr char kNames[] = {'A', 'B', 'C'};
  std::string label = "|";
  for (int k = 0; k < arity; ++k) {
    if (k > 0) label += ',';
    label += (index >> (arity - 1 - k)) & 1U ? '+' : '-';
    label += kNames[k];
  }
  return label + "|";
}

InterferenceCounts pattern_counts(const Ledger& ledger, std::string_view model,
                                  const TaskScope& scope, std::string_view lang, int arity,
                                  TieRule ties) {
  check_arity(arity);
  InterferenceCounts result{std::string(lang), arity, std::vector<int>(std::size_t{1} << arity, 0),
                            {}};
  for (const auto& rec : ledger.interactions()) {
    if (rec.model != model || !in_scope(scope, rec.task) || rec.eval != lang ||
        static_cast<int>(rec.combo.size()) != arity)
      continue;
    const auto mono_self = ledger.interaction(model, rec.task, Combo{rec.eval}, rec.eval);
    if (!mono_self) continue;

    ComboObservation obs{rec.task, {}, {classify(rec.score - *mono_self, ties)}};
    bool complete = true;
    for (const auto& member : rec.combo) {
      if (member == lang) continue;
      const auto mixed = ledger.interaction(model, rec.task, rec.combo, member);
      const auto mono = ledger.interaction(model, rec.task, Combo{member}, member);
      if (!mixed || !mono) {
        complete = false;
        break;
      }
      obs.partners.push_back(member);
      obs.signs.push_back(classify(*mixed - *mono, ties));
    }
    if (!complete) continue;
    ++result.counts[InterferenceCounts::pattern_index(obs.signs)];
    result.observations.push_back(std::move(obs));
  }
  if (result.observations.empty())
    throw MetricError(fmt::format("no arity-{} combos with complete scores for '{}' (model={} task={})",
                                  arity, lang, model, scope_name(scope)));
  return result;
}

ProjectionPoint project_bilingual(std::span<const int> counts) {
  if (counts.size() != 4)
    throw MetricError(fmt::format("bilingual projection needs 4 counts, got {}", counts.size()));
  return project(counts, 2);
}

ProjectionPoint project_bilingual(const InterferenceCounts& counts) {
  if (counts.arity != 2) throw MetricError("bilingual projection needs arity-2 counts");
  return project_bilingual(counts.counts);
}

TrilingualProjection project_trilingual(std::span<const int> counts) {
  if (counts.size() != 8)
    throw MetricError(fmt::format("trilingual projection needs 8 counts, got {}", counts.size()));
  TrilingualProjection result{project(counts, 3), {}, 0, 0};
  for (std::size_t p = 0; p < counts.size(); ++p)
    ((p & 1U) ? result.third_plus : result.third_minus) += counts[p];
  return result;
}

TrilingualProjection project_trilingual(const InterferenceCounts& counts, std::string_view partner) {
  if (counts.arity != 3) throw MetricError("trilingual projection needs arity-3 counts");
  std::vector<int> rekeyed(8, 0);
  for (const auto& obs : counts.observations) {
    const auto it = std::find(obs.partners.begin(), obs.partners.end(), partner);
    if (it == obs.partners.end()) continue;
    const auto b = static_cast<std::size_t>(it - obs.partners.begin());
    const std::array<Sign, 3> signs{obs.signs[0], obs.signs[1 + b], obs.signs[2 - b]};
    ++rekeyed[InterferenceCounts::pattern_index(signs)];
  }
  if (std::all_of(rekeyed.begin(), rekeyed.end(), [](int c) { return c == 0; }))
    throw MetricError(fmt::format("'{}' never interacts with '{}' in arity-3 combos", counts.lang,
                                  partner));
  auto result = project_trilingual(rekeyed);
  result.partner = std::string(partner);
  return result;
}

double averaged_interaction_score(const Ledger& ledger, std::string_view model,
                                  std::string_view task, std::string_view lang, int arity) {
  if (arity < 1 || arity > 3)
    throw MetricError(fmt::format("interaction arity must lie in [1,3], got {}", arity));
  double sum = 0.0;
  int n = 0;
  for (const auto& rec : ledger.interactions()) {
    if (rec.model != model || rec.task != task || rec.eval != lang ||
        static_cast<int>(rec.combo.size()) != arity)
      continue;
    sum += rec.score;
    ++n;
  }
  if (n == 0)
    throw MetricError(fmt::format("no arity-{} combos containing '{}' evaluated on it (model={} task={})",
                                  arity, lang, model, task));
  return sum / n;
}

std::vector<ScatterPoint> interference_scatter(const Ledger& ledger, std::string_view model,
                                               const TaskScope& scope, int arity, TieRule ties) {
  check_arity(arity);
  std::set<std::string> langs;
  for (const auto& rec : ledger.interactions())
    if (rec.model == model && in_scope(scope, rec.task) &&
        static_cast<int>(rec.combo.size()) == arity)
      langs.insert(rec.eval);

  std::vector<ScatterPoint> points;
  const auto task = scope_name(scope);
  for (const auto& lang : langs) {
    InterferenceCounts counts;
    try {
      counts = pattern_counts(ledger, model, scope, lang, arity, ties);
    } catch (const MetricError&) {
      continue;
    }
    if (arity == 2) {
      const auto p = project_bilingual(counts);
      points.push_back({lang, task, 2, p.x, p.y, {}});
      continue;
    }
    std::set<std::string> partners;
    for (const auto& obs : counts.observations) partners.insert(obs.partners.begin(), obs.partners.end());
    for (const auto& partner : partners) {
      const auto p = project_trilingual(counts, partner);
      points.push_back({lang, task, 3, p.point.x, p.point.y,
                        fmt::format("{}:{}", partner, sign_char(p.third_sign()))});
    }
  }
  return points;
}

void write_scatter_csv(std::span<const ScatterPoint> points, std::ostream& out) {
  out << "lang,task,arity,x,y,annotation\n";
  for (const auto& p : points)
    out << p.lang << ',' << csv::escape(p.task) << ',' << p.arity << ',' << fmt::format("{:.4f}", p.x)
        << ',' << fmt::format("{:.4f}", p.y) << ',' << csv::escape(p.annotation) << '\n';
}

std::vector<ScatterPoint> read_scatter_csv(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line) || line != "lang,task,arity,x,y,annotation")
    throw LedgerError("scatter csv: unexpected header");
  std::vector<ScatterPoint> points;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    const auto arity = f.size() == 6 ? csv::parse_int(f[2]) : std::nullopt;
    const auto x = f.size() == 6 ? csv::parse_double(f[3]) : std::nullopt;
    const auto y = f.size() == 6 ? csv::parse_double(f[4]) : std::nullopt;
    if (!arity || !x || !y) throw LedgerError("scatter csv: malformed row", "scatter", line_no);
    points.push_back({f[0], f[1], static_cast<int>(*arity), *x, *y, f[5]});
  }
  return points;
}

}  // namespace transferscope

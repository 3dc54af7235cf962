#include "transferscope/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "svg.hpp"
#include "transferscope/error.hpp"

namespace transferscope {

namespace {

std::string fixed(double value, int decimals) {
  auto text = fmt::format("{:.{}f}", value, decimals);
  // "-0.00" reads as a sign where there is none.
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

std::string fixed(const std::optional<double>& value, int decimals) {
  return value ? fixed(*value, decimals) : std::string();
}

// Transfer scores are ratios; reports show them in percent.
std::string scaled(const std::optional<double>& value, int decimals) {
  return value ? fixed(100.0 * *value, decimals) : std::string();
}

std::string yes_no(const std::optional<bool>& flag) {
  if (!flag) return {};
  return *flag ? "yes" : "no";
}

bool is_unseen(const LanguageRegistry& registry, std::string_view iso) {
  const auto* info = registry.find(iso);
  return info != nullptr && !info->seen;
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += csv::escape(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += csv::escape(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string md_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += '\\';
    out.push_back(c);
  }
  return out;
}

std::string render_markdown(const Table& table) {
  std::string out = "|";
  for (const auto& c : table.columns) out += " " + md_cell(c) + " |";
  out += "\n|";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out += (c < table.numeric.size() && table.numeric[c]) ? "---:|" : "---|";
  out += '\n';
  for (const auto& row : table.rows) {
    out += "|";
    for (const auto& cell : row) out += " " + md_cell(cell) + " |";
    out += '\n';
  }
  return out;
}

std::string render_json(const Table& table) {
  auto array = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json object = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& cell = row[c];
      const bool numeric = c < table.numeric.size() && table.numeric[c];
      if (numeric) {
        if (cell.empty())
          object[table.columns[c]] = nullptr;
        else if (const auto v = csv::parse_double(cell))
          object[table.columns[c]] = *v;
        else
          object[table.columns[c]] = cell;
      } else {
        object[table.columns[c]] = cell;
      }
    }
    array.push_back(std::move(object));
  }
  return array.dump(2) + "\n";
}

std::string render_tabular(const Table& table, OutputFormat format, std::string_view what) {
  if (format == OutputFormat::Svg)
    throw UsageError(fmt::format("{} cannot be rendered as svg", what));
  return render_table(table, format);
}

// Maps [lo, hi] onto [out_lo, out_hi].
struct Scale {
  double lo, hi, out_lo, out_hi;
  double operator()(double v) const {
    if (hi == lo) return (out_lo + out_hi) / 2.0;
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

std::string safe_path_part(std::string_view text) {
  std::string out;
  for (char c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

// ---- spec ------------------------------------------------------------------

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::RankTable: return "rank_table";
    case ReportKind::ComparisonTable: return "comparison_table";
    case ReportKind::RecipientMap: return "recipient_map";
    case ReportKind::ViolinData: return "violin_data";
    case ReportKind::Progression: return "progression";
    case ReportKind::InterferenceScatter: return "interference_scatter";
    case ReportKind::SeenUnseenHeatmap: return "seen_unseen_heatmap";
    case ReportKind::CorrelationTable: return "correlation_table";
    case ReportKind::Coverage: break;
  }
  return "coverage";
}

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Markdown: return "md";
    case OutputFormat::Json: return "json";
    case OutputFormat::Svg: break;
  }
  return "svg";
}

ReportKind parse_report_kind(std::string_view text) {
  for (const auto kind :
       {ReportKind::RankTable, ReportKind::ComparisonTable, ReportKind::RecipientMap,
        ReportKind::ViolinData, ReportKind::Progression, ReportKind::InterferenceScatter,
        ReportKind::SeenUnseenHeatmap, ReportKind::CorrelationTable, ReportKind::Coverage})
    if (to_string(kind) == text) return kind;
  throw UsageError(fmt::format("unknown report kind '{}'", text));
}

OutputFormat parse_output_format(std::string_view text) {
  for (const auto format :
       {OutputFormat::Csv, OutputFormat::Markdown, OutputFormat::Json, OutputFormat::Svg})
    if (to_string(format) == text) return format;
  if (text == "markdown") return OutputFormat::Markdown;
  throw UsageError(fmt::format("unknown output format '{}'", text));
}

void validate(const ReportSpec& spec) {
  if (spec.format != OutputFormat::Svg) return;
  switch (spec.kind) {
    case ReportKind::InterferenceScatter:
    case ReportKind::Progression:
    case ReportKind::SeenUnseenHeatmap:
    case ReportKind::ViolinData:
      return;
    default:
      throw UsageError(fmt::format("report kind {} has no svg form", to_string(spec.kind)));
  }
}

// ---- generic tables ----------------------------------------------------------

std::string render_table(const Table& table, OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return render_csv(table);
    case OutputFormat::Markdown: return render_markdown(table);
    case OutputFormat::Json: return render_json(table);
    case OutputFormat::Svg: break;
  }
  throw UsageError("tables cannot be rendered as svg");
}

Table parse_table_csv(std::string_view text) {
  Table table;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!csv::read_line(in, line)) throw LedgerError("table csv: missing header");
  table.columns = csv::split_line(line);
  while (csv::read_line(in, line)) {
    if (line.empty()) continue;
    auto fields = csv::split_line(line);
    if (fields.size() != table.columns.size()) throw LedgerError("table csv: ragged row");
    table.rows.push_back(std::move(fields));
  }
  return table;
}

// ---- rank tables -------------------------------------------------------------

std::string render_rank_table(std::span<const RankEntry> ranking, const LanguageRegistry& registry,
                              OutputFormat format) {
  if (format == OutputFormat::Markdown) {
    Table t{{"rank", "lang", "ts", "+(%)"}, {}, {true, false, true, true}};
    for (const auto& e : ranking)
      t.rows.push_back({std::to_string(e.rank), e.lang + (is_unseen(registry, e.lang) ? "*" : ""),
                        fixed(100.0 * e.agg_ts, 2), fixed(e.positive_pct, 1)});
    return render_markdown(t);
  }
  Table t{{"rank", "lang", "unseen", "agg_ts", "positive_pct"}, {}, {true, false, false, true, true}};
  for (const auto& e : ranking)
    t.rows.push_back({std::to_string(e.rank), e.lang, is_unseen(registry, e.lang) ? "*" : "",
                      fixed(100.0 * e.agg_ts, 4), fixed(e.positive_pct, 1)});
  return render_tabular(t, format, "rank table");
}

// ---- comparison tables -------------------------------------------------------

void fill_improvement_flags(ComparisonRow& row) {
  const std::optional<double> first =
      row.step_scores.empty() ? std::nullopt : row.step_scores.front();
  const std::optional<double> last = row.step_scores.empty() ? std::nullopt : row.step_scores.back();
  row.flags = improvement_flags(row.base, first, last, row.interactions);
}

ComparisonTable comparison_table(const Ledger& ledger, std::string_view model,
                                 std::string_view task) {
  ComparisonTable table{ledger.step_grid(), {}};
  for (const auto& lang : ledger.transfers(model, task)) {
    const auto base = ledger.baseline(model, task, lang);
    if (!base) continue;
    ComparisonRow row;
    row.lang = lang;
    row.unseen = is_unseen(ledger.languages(), lang);
    row.base = *base;
    for (const int steps : table.steps) {
      const auto reps = ledger.runs(model, task, lang, lang, steps);
      if (!reps || reps->empty()) {
        row.step_scores.emplace_back();
        continue;
      }
      double sum = 0.0;
      for (double s : *reps) sum += s;
      row.step_scores.emplace_back(sum / static_cast<double>(reps->size()));
    }
    for (int arity = 1; arity <= 3; ++arity) {
      try {
        row.interactions[arity - 1] = averaged_interaction_score(ledger, model, task, lang, arity);
      } catch (const MetricError&) {
      }
    }
    fill_improvement_flags(row);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_comparison_table(const ComparisonTable& table, OutputFormat format) {
  Table t;
  t.columns = {"lang", "unseen", "base"};
  for (const int s : table.steps) t.columns.push_back(fmt::format("k{}", s));
  t.columns.insert(t.columns.end(), {"1A", "2A", "3A"});
  const std::string first = table.steps.empty() ? "first" : std::to_string(table.steps.front());
  const std::string last = table.steps.empty() ? "last" : std::to_string(table.steps.back());
  t.columns.insert(t.columns.end(), {"imp_c" + first, "imp_c" + last, "imp_i"});
  t.numeric.assign(t.columns.size(), true);
  t.numeric[0] = t.numeric[1] = false;
  for (std::size_t k = t.columns.size() - 3; k < t.columns.size(); ++k) t.numeric[k] = false;

  for (const auto& row : table.rows) {
    std::vector<std::string> cells{row.lang, row.unseen ? "*" : "", fixed(row.base, 2)};
    for (const auto& s : row.step_scores) cells.push_back(fixed(s, 2));
    for (const auto& a : row.interactions) cells.push_back(fixed(a, 2));
    cells.push_back(yes_no(row.flags.first_step));
    cells.push_back(yes_no(row.flags.last_step));
    cells.push_back(yes_no(row.flags.interaction));
    t.rows.push_back(std::move(cells));
  }
  return render_tabular(t, format, "comparison table");
}

// ---- recipients / variance -----------------------------------------------------

std::vector<RecipientRow> recipient_map(const TransferMatrix& matrix,
                                        const LanguageRegistry& registry) {
  std::vector<RecipientRow> rows;
  for (const auto& target : matrix.targets()) {
    if (matrix.values_for(target, Axis::Target).empty()) continue;
    rows.push_back(RecipientRow{target, is_unseen(registry, target),
                                aggregated_target(matrix, target),
                                recipient_summary(matrix, target)});
  }
  std::sort(rows.begin(), rows.end(), [](const RecipientRow& a, const RecipientRow& b) {
    if (a.summary.positive_pct != b.summary.positive_pct)
      return a.summary.positive_pct > b.summary.positive_pct;
    return a.target < b.target;
  });
  return rows;
}

std::string render_recipient_map(std::span<const RecipientRow> rows, OutputFormat format) {
  Table t{{"target", "unseen", "agg_ts", "positive_pct", "bucket"}, {}, {false, false, true, true, false}};
  for (const auto& r : rows)
    t.rows.push_back({r.target, r.unseen ? "*" : "", fixed(100.0 * r.agg_ts, 4),
                      fixed(r.summary.positive_pct, 1), std::string(to_string(r.summary.bucket))});
  return render_tabular(t, format, "recipient map");
}

std::vector<VarianceRow> variance_table(const TransferMatrix& matrix,
                                        const LanguageRegistry& registry, int threshold) {
  std::vector<VarianceRow> rows;
  for (const auto& transfer : matrix.transfers()) {
    if (matrix.values_for(transfer, Axis::Transfer).size() < 2) continue;
    VarianceRow row;
    row.transfer = transfer;
    row.unseen = is_unseen(registry, transfer);
    row.agg_ts = aggregated_transfer(matrix, transfer);
    row.stats = variance_stats(matrix, transfer);
    row.profile = variance_profile(row.stats, threshold);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const VarianceRow& a, const VarianceRow& b) {
    if (a.stats.variance != b.stats.variance) return a.stats.variance > b.stats.variance;
    return a.transfer < b.transfer;
  });
  return rows;
}

std::string render_variance_table(std::span<const VarianceRow> rows, OutputFormat format) {
  if (format == OutputFormat::Markdown) {
    Table t{{"rank", "lang", "ts (var.)", "(max, min)", "profile"}, {}, {true, false, false, false, false}};
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      t.rows.push_back({std::to_string(k + 1), r.transfer + (r.unseen ? "*" : ""),
                        fmt::format("{} ({})", fixed(100.0 * r.agg_ts, 2), fixed(r.stats.variance, 1)),
                        fmt::format("({}, {})", r.stats.max_count, r.stats.min_count),
                        std::string(to_string(r.profile))});
    }
    return render_markdown(t);
  }
  Table t{{"transfer", "unseen", "agg_ts", "variance", "max_count", "min_count", "profile"},
          {},
          {false, false, true, true, true, true, false}};
  for (const auto& r : rows)
    t.rows.push_back({r.transfer, r.unseen ? "*" : "", fixed(100.0 * r.agg_ts, 4), fixed(r.stats.variance, 4),
                      std::to_string(r.stats.max_count), std::to_string(r.stats.min_count),
                      std::string(to_string(r.profile))});
  return render_tabular(t, format, "variance table");
}

// ---- correlation / heatmap / coverage --------------------------------------------

std::string render_correlation_table(const CorrelationMatrix& matrix, OutputFormat format) {
  if (format == OutputFormat::Markdown) {
    Table t;
    t.columns.push_back("");
    for (const auto& task : matrix.tasks) t.columns.push_back(task);
    for (std::size_t a = 0; a < matrix.tasks.size(); ++a) {
      std::vector<std::string> row{matrix.tasks[a]};
      for (std::size_t b = 0; b < matrix.tasks.size(); ++b) {
        if (a == b) {
          row.push_back("-");
          continue;
        }
        const auto& cell = matrix.cells[a][b];
        auto text = cell.result.degenerate
                        ? std::string("(n/a)")
                        : fmt::format("({}, {})", fixed(cell.result.rho, 2),
                                      fixed(cell.result.p_value, 2));
        row.push_back(cell.significant ? "**" + text + "**" : text);
      }
      t.rows.push_back(std::move(row));
    }
    return render_markdown(t);
  }
  Table t{{"task_a", "task_b", "rho", "p_value", "significant", "common"},
          {},
          {false, false, true, true, false, true}};
  for (std::size_t a = 0; a < matrix.tasks.size(); ++a) {
    for (std::size_t b = a + 1; b < matrix.tasks.size(); ++b) {
      const auto& cell = matrix.cells[a][b];
      t.rows.push_back({matrix.tasks[a], matrix.tasks[b],
                        cell.result.degenerate ? "" : fixed(cell.result.rho, 4),
                        cell.result.degenerate ? "" : fixed(cell.result.p_value, 4),
                        cell.significant ? "yes" : "no", std::to_string(cell.common)});
    }
  }
  return render_tabular(t, format, "correlation table");
}

std::string render_heatmap(const SeenUnseenTable& table, OutputFormat format) {
  static constexpr const char* kGroups[] = {"seen", "unseen"};
  if (format != OutputFormat::Svg) {
    Table t{{"transfer_group", "target_group", "mean_ts", "count"}, {}, {false, false, true, true}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        t.rows.push_back({kGroups[a], kGroups[b], scaled(table.cells[a][b].mean_ts, 4),
                          std::to_string(table.cells[a][b].count)});
    return render_table(t, format);
  }
  double extent = 0.0;
  for (const auto& row : table.cells)
    for (const auto& c : row)
      if (c.mean_ts) extent = std::max(extent, std::abs(*c.mean_ts));
  svg::Canvas canvas(360, 320);
  canvas.text(180, 20, "mean transfer score (seen / unseen)", "middle");
  const double x0 = 100, y0 = 50, size = 110;
  for (int a = 0; a < 2; ++a) {
    canvas.text(x0 - 8, y0 + size * a + size / 2, kGroups[a], "end");
    canvas.text(x0 + size * a + size / 2, y0 + 2 * size + 18, kGroups[a], "middle");
    for (int b = 0; b < 2; ++b) {
      const auto& cell = table.cells[a][b];
      std::string fill = "#dddddd";
      if (cell.mean_ts) {
        const double t = extent > 0.0 ? std::abs(*cell.mean_ts) / extent : 0.0;
        const int fade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
        fill = *cell.mean_ts >= 0.0 ? fmt::format("#{:02x}ff{:02x}", fade, fade)
                                    : fmt::format("#ff{:02x}{:02x}", fade, fade);
      }
      const double x = x0 + size * b;
      const double y = y0 + size * a;
      canvas.rect(x, y, size, size, fill, "black");
      canvas.text(x + size / 2, y + size / 2,
                  cell.mean_ts ? fixed(100.0 * *cell.mean_ts, 2) : std::string("n/a"), "middle");
      canvas.text(x + size / 2, y + size / 2 + 14, fmt::format("n={}", cell.count), "middle");
    }
  }
  canvas.text(x0 + size, y0 + 2 * size + 36, "target", "middle");
  canvas.text(20, y0 + size, "transfer", "middle", -90);
  return canvas.finish();
}

std::string render_coverage(std::span<const Coverage> rows, OutputFormat format) {
  Table t{{"model", "task", "transfers", "targets", "populated", "absent"},
          {},
          {false, false, true, true, true, true}};
  for (const auto& c : rows)
    t.rows.push_back({c.model, c.task, std::to_string(c.transfers), std::to_string(c.targets),
                      std::to_string(c.populated), std::to_string(c.absent)});
  return render_tabular(t, format, "coverage");
}

std::string render_sustained(const SustainedImprovement& result, int steps, OutputFormat format) {
  Table t{{"steps", "task", "positive", "total", "percent"}, {}, {true, false, true, true, true}};
  for (const auto& s : result.per_task)
    t.rows.push_back({std::to_string(steps), s.task, std::to_string(s.positive),
                      std::to_string(s.total), fixed(s.percent, 1)});
  t.rows.push_back({std::to_string(steps), "macro", "", "", fixed(result.percent, 1)});
  return render_tabular(t, format, "sustained improvement");
}

// ---- figure data -------------------------------------------------------------

std::string render_violin(const TransferMatrix& matrix, std::span<const VarianceRow> order,
                          OutputFormat format) {
  if (order.empty()) throw MetricError("violin data: empty selection");
  if (format != OutputFormat::Svg) {
    Table t{{"transfer", "variance", "target", "ts"}, {}, {false, true, false, true}};
    for (const auto& row : order) {
      const auto i = *matrix.transfer_index(row.transfer);
      for (std::size_t j = 0; j < matrix.targets().size(); ++j)
        if (const auto& v = matrix.at(i, j))
          t.rows.push_back({row.transfer, fixed(row.stats.variance, 4), matrix.targets()[j],
                            fixed(100.0 * *v, 4)});
    }
    return render_table(t, format);
  }

  double lo = 0.0;
  double hi = 0.0;
  for (const auto& row : order)
    for (double v : matrix.values_for(row.transfer, Axis::Transfer)) {
      lo = std::min(lo, 100.0 * v);
      hi = std::max(hi, 100.0 * v);
    }
  const double slot = 28.0;
  svg::Canvas canvas(80 + slot * static_cast<double>(order.size()) + 20, 360);
  const Scale y{lo, hi, 300, 40};
  canvas.text(canvas.width() / 2, 20, "transfer score (%) by transfer language, by variance",
              "middle");
  canvas.line(70, 40, 70, 300);
  canvas.line(70, y(0.0), canvas.width() - 10, y(0.0), "#999999");
  canvas.text(64, y(hi) + 4, fixed(hi, 1), "end");
  canvas.text(64, y(lo) + 4, fixed(lo, 1), "end");
  constexpr int kBins = 12;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double cx = 80 + slot * (static_cast<double>(k) + 0.5);
    auto values = matrix.values_for(order[k].transfer, Axis::Transfer);
    for (auto& v : values) v *= 100.0;
    // Mirrored histogram outline as the violin body.
    std::array<int, kBins> bins{};
    for (double v : values) {
      const int b = hi == lo ? 0 : std::min(kBins - 1, static_cast<int>((v - lo) / (hi - lo) * kBins));
      ++bins[b];
    }
    const int peak = *std::max_element(bins.begin(), bins.end());
    std::string left;
    std::string right;
    for (int b = 0; b < kBins; ++b) {
      const double half = peak > 0 ? (slot / 2 - 2) * bins[b] / peak : 0.0;
      const double yc = y(lo + (hi - lo) * (b + 0.5) / kBins);
      left += fmt::format("{:.2f},{:.2f} ", cx - half, yc);
      right = fmt::format("{:.2f},{:.2f} ", cx + half, yc) + right;
    }
    canvas.polygon(left + right, order[k].unseen ? "#d95f02" : "#1b9e77", 0.5);
    for (double v : values) canvas.circle(cx, y(v), 1.5, "black");
    canvas.text(cx, 316, order[k].transfer, "end", -60);
  }
  return canvas.finish();
}

std::string render_progression(std::span<const ProgressionSeries> series, OutputFormat format) {
  if (series.empty()) throw MetricError("progression: empty selection");
  if (format != OutputFormat::Svg) {
    Table t{{"transfer", "target", "steps", "mean_ts", "sd_ts", "reps"},
            {},
            {false, false, true, true, true, true}};
    for (const auto& s : series)
      for (const auto& p : s.points)
        t.rows.push_back({s.transfer, s.target, std::to_string(p.steps), fixed(100.0 * p.mean_ts, 4),
                          fixed(100.0 * p.sd_ts, 4), std::to_string(p.reps)});
    return render_table(t, format);
  }

  std::set<int> steps;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      steps.insert(p.steps);
      lo = std::min(lo, p.mean_ts - p.sd_ts);
      hi = std::max(hi, p.mean_ts + p.sd_ts);
    }
  const std::vector<int> axis(steps.begin(), steps.end());
  svg::Canvas canvas(520, 360);
  const Scale x{0.0, static_cast<double>(std::max<std::size_t>(axis.size(), 2) - 1), 80, 440};
  const Scale y{lo, hi, 300, 40};
  auto x_of = [&](int s) {
    const auto k = std::lower_bound(axis.begin(), axis.end(), s) - axis.begin();
    return x(static_cast<double>(k));
  };
  canvas.text(260, 20, "transfer score progression (mean +/- sd)", "middle");
  canvas.line(80, 300, 440, 300);
  canvas.line(80, 40, 80, 300);
  canvas.line(80, y(0.0), 440, y(0.0), "#999999");
  for (const int s : axis) canvas.text(x_of(s), 316, std::to_string(s), "middle");
  canvas.text(74, y(hi) + 4, fixed(hi, 3), "end");
  canvas.text(74, y(lo) + 4, fixed(lo, 3), "end");
  static constexpr const char* kColors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto color = kColors[k % 6];
    std::string upper;
    std::string lower;
    std::string mid;
    for (const auto& p : series[k].points) {
      upper += fmt::format("{:.2f},{:.2f} ", x_of(p.steps), y(p.mean_ts + p.sd_ts));
      lower = fmt::format("{:.2f},{:.2f} ", x_of(p.steps), y(p.mean_ts - p.sd_ts)) + lower;
      mid += fmt::format("{:.2f},{:.2f} ", x_of(p.steps), y(p.mean_ts));
    }
    canvas.polygon(upper + lower, color, 0.2);
    canvas.polyline(mid, color);
    const auto& last = series[k].points.back();
    canvas.text(x_of(last.steps) + 6, y(last.mean_ts) + 4,
                series[k].transfer + "->" + series[k].target);
  }
  return canvas.finish();
}

std::string render_scatter(std::span<const ScatterPoint> points, OutputFormat format) {
  if (points.empty()) throw MetricError("scatter: empty selection");
  if (format == OutputFormat::Csv) {
    std::ostringstream out;
    write_scatter_csv(points, out);
    return out.str();
  }
  if (format != OutputFormat::Svg) {
    Table t{{"lang", "task", "arity", "x", "y", "annotation"}, {}, {false, false, true, true, true, false}};
    for (const auto& p : points)
      t.rows.push_back({p.lang, p.task, std::to_string(p.arity), fixed(p.x, 4), fixed(p.y, 4),
                        p.annotation});
    return render_table(t, format);
  }
  svg::Canvas canvas(440, 440);
  const Scale x{-1.0, 1.0, 40, 400};
  const Scale y{-1.0, 1.0, 400, 40};
  canvas.rect(40, 40, 360, 360, "none", "black");
  canvas.line(x(0), 40, x(0), 400, "#999999");
  canvas.line(40, y(0), 400, y(0), "#999999");
  canvas.text(x(-1), 416, "-1", "middle");
  canvas.text(x(1), 416, "1", "middle");
  canvas.text(32, y(-1) + 4, "-1", "end");
  canvas.text(32, y(1) + 4, "1", "end");
  canvas.text(220, 432, "interference received (x)", "middle");
  canvas.text(14, 220, "interference provided (y)", "middle", -90);
  canvas.text(220, 24, fmt::format("{}-lingual interference, task {}",
                                   points.front().arity == 2 ? "bi" : "tri", points.front().task),
              "middle");
  for (const auto& p : points) {
    std::string color = "#1f78b4";
    if (!p.annotation.empty()) color = p.annotation.back() == '+' ? "#33a02c" : "#e31a1c";
    canvas.circle(x(p.x), y(p.y), 3.5, color);
    canvas.text(x(p.x) + 5, y(p.y) - 5,
                p.annotation.empty() ? p.lang : p.lang + "/" + p.annotation.substr(0, p.annotation.find(':')));
  }
  return canvas.finish();
}

// ---- batch -------------------------------------------------------------------

namespace {

using Files = std::map<std::string, std::string>;

void add_or_skip(Files& files, std::vector<std::string>& skipped, const std::string& path,
                 auto&& produce) {
  try {
    files[path] = produce();
  } catch (const MetricError& e) {
    skipped.push_back(path + ": " + e.what());
  }
}

Files task_reports(const Ledger& ledger, const std::string& model, const std::string& task,
                   const ReportAllOptions& options) {
  Files files;
  std::vector<std::string> skipped;
  const auto dir = safe_path_part(model) + "/" + safe_path_part(task) + "/";
  const auto& registry = ledger.languages();

  std::optional<TransferMatrix> matrix;
  try {
    matrix = transfer_matrix(ledger, model, task, options.selector);
  } catch (const MetricError& e) {
    skipped.push_back(dir + "matrix: " + e.what());
  }

  if (matrix) {
    const auto by_transfer = rank_languages(*matrix, Axis::Transfer);
    files[dir + "rank_transfer.csv"] = render_rank_table(by_transfer, registry, OutputFormat::Csv);
    files[dir + "rank_transfer.md"] =
        render_rank_table(by_transfer, registry, OutputFormat::Markdown);
    files[dir + "rank_target.csv"] =
        render_rank_table(rank_languages(*matrix, Axis::Target), registry, OutputFormat::Csv);
    files[dir + "recipients.csv"] =
        render_recipient_map(recipient_map(*matrix, registry), OutputFormat::Csv);
    files[dir + "heatmap.csv"] =
        render_heatmap(seen_unseen_matrix(*matrix, registry), OutputFormat::Csv);
    files[dir + "heatmap.svg"] =
        render_heatmap(seen_unseen_matrix(*matrix, registry), OutputFormat::Svg);

    std::vector<VarianceRow> variance;
    add_or_skip(files, skipped, dir + "variance.csv", [&] {
      if (matrix->transfers().size() < 2)
        throw MetricError("variance profiles need at least two transfer languages");
      variance = variance_table(*matrix, registry, options.threshold);
      return render_variance_table(variance, OutputFormat::Csv);
    });
    if (files.count(dir + "variance.csv")) {
      files[dir + "variance.md"] = render_variance_table(variance, OutputFormat::Markdown);
      add_or_skip(files, skipped, dir + "violin.csv",
                  [&] { return render_violin(*matrix, variance, OutputFormat::Csv); });
      add_or_skip(files, skipped, dir + "violin.svg",
                  [&] { return render_violin(*matrix, variance, OutputFormat::Svg); });
    }

    std::vector<ProgressionSeries> series;
    for (const auto& transfer : matrix->transfers())
      for (const auto& target : matrix->targets()) {
        try {
          series.push_back({transfer, target, progression_series(ledger, model, task, transfer, target)});
        } catch (const MetricError&) {
        }
      }
    add_or_skip(files, skipped, dir + "progression.csv",
                [&] { return render_progression(series, OutputFormat::Csv); });

    const auto comparison = comparison_table(ledger, model, task);
    files[dir + "comparison.csv"] = render_comparison_table(comparison, OutputFormat::Csv);
    files[dir + "comparison.md"] = render_comparison_table(comparison, OutputFormat::Markdown);
  }

  for (const int arity : {2, 3}) {
    const auto points = interference_scatter(ledger, model, TaskScope{task}, arity, options.ties);
    const auto stem = dir + (arity == 2 ? "scatter_bilingual" : "scatter_trilingual");
    if (points.empty()) {
      skipped.push_back(stem + ": no languages with complete interaction scores");
      continue;
    }
    files[stem + ".csv"] = render_scatter(points, OutputFormat::Csv);
    files[stem + ".svg"] = render_scatter(points, OutputFormat::Svg);
  }

  if (!skipped.empty()) {
    std::string text;
    for (const auto& s : skipped) text += s + "\n";
    files[dir + "skipped.txt"] = text;
  }
  return files;
}

Files model_reports(const Ledger& ledger, const std::string& model, const ReportAllOptions& options) {
  Files files;
  std::vector<std::string> skipped;
  const auto dir = safe_path_part(model) + "/";
  const auto tasks = ledger.tasks(model);

  std::map<std::string, std::map<std::string, double>> agg_by_task;
  for (const auto& task : tasks) {
    try {
      const auto matrix = transfer_matrix(ledger, model, task, options.selector);
      for (const auto& e : rank_languages(matrix, Axis::Transfer)) agg_by_task[task][e.lang] = e.agg_ts;
    } catch (const MetricError&) {
    }
  }
  add_or_skip(files, skipped, dir + "correlation.csv", [&] {
    return render_correlation_table(task_correlation_matrix(agg_by_task), OutputFormat::Csv);
  });
  add_or_skip(files, skipped, dir + "correlation.md", [&] {
    return render_correlation_table(task_correlation_matrix(agg_by_task), OutputFormat::Markdown);
  });

  const auto& grid = ledger.step_grid();
  if (!grid.empty()) {
    std::string text;
    for (const int steps : std::set<int>{grid.front(), grid.back()}) {
      try {
        auto part = render_sustained(sustained_improvement_pct(ledger, model, tasks, steps), steps,
                                     OutputFormat::Csv);
        if (!text.empty()) part.erase(0, part.find('\n') + 1);
        text += part;
      } catch (const MetricError& e) {
        skipped.push_back(dir + "sustained.csv: " + e.what());
      }
    }
    if (!text.empty()) files[dir + "sustained.csv"] = text;
  }
  if (!skipped.empty()) {
    std::string text;
    for (const auto& s : skipped) text += s + "\n";
    files[dir + "skipped.txt"] = text;
  }
  return files;
}

}  // namespace

std::map<std::string, std::string> build_all_reports(const Ledger& ledger,
                                                     const ReportAllOptions& options) {
  struct Job {
    std::string model;
    std::optional<std::string> task;  // nullopt: model-level reports
  };
  std::vector<Job> jobs;
  for (const auto& model : ledger.models()) {
    jobs.push_back({model, std::nullopt});
    for (const auto& task : ledger.tasks(model)) jobs.push_back({model, task});
  }

  std::vector<Files> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const auto& job = jobs[k];
      results[k] = job.task ? task_reports(ledger, job.model, *job.task, options)
                            : model_reports(ledger, job.model, options);
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  Files all;
  std::vector<Coverage> cov;
  for (auto& r : results) all.merge(r);
  for (const auto& job : jobs) {
    if (!job.task) continue;
    try {
      cov.push_back(coverage(transfer_matrix(ledger, job.model, *job.task, options.selector)));
    } catch (const MetricError&) {
      cov.push_back(Coverage{job.model, *job.task, 0, 0, 0, 0});
    }
  }
  all["coverage.csv"] = render_coverage(cov, OutputFormat::Csv);
  return all;
}

std::size_t report_all(const Ledger& ledger, const std::filesystem::path& out_dir,
                       const ReportAllOptions& options) {
  const auto files = build_all_reports(ledger, options);
  for (const auto& [rel, content] : files) {
    const auto path = out_dir / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LedgerError("cannot write report file", path.string());
    out << content;
  }
  return files.size();
}

}  // namespace transferscope

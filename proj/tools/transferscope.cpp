#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "transferscope/error.hpp"
#include "transferscope/interference.hpp"
#include "transferscope/ledger.hpp"
#include "transferscope/report.hpp"
#include "transferscope/stats.hpp"
#include "transferscope/transfer_metrics.hpp"

namespace fs = std::filesystem;
using namespace transferscope;

namespace {

struct LedgerArgs {
  std::string dir;
  std::string languages;
  std::string baselines;
  std::string runs;
  std::string interactions;
  bool strict = false;

  void attach(CLI::App* app) {
    app->add_option("--ledger", dir, "Directory holding languages/baselines/runs/interactions");
    app->add_option("--languages", languages, "Language registry file");
    app->add_option("--baselines", baselines, "Baselines file (csv or jsonl)");
    app->add_option("--runs", runs, "Runs file (csv or jsonl)");
    app->add_option("--interactions", interactions, "Interactions file (csv or jsonl)");
    app->add_flag("--strict", strict, "Promote ledger warnings to errors");
  }

  Ledger load() const {
    LoadOptions options;
    const char* env = std::getenv("TRANSFERSCOPE_STRICT");
    options.strict = strict || (env != nullptr && std::string_view(env) == "1");
    if (!dir.empty()) {
      if (!languages.empty() || !baselines.empty() || !runs.empty() || !interactions.empty())
        throw UsageError("--ledger cannot be combined with individual file options");
      return load_ledger_dir(dir, options);
    }
    if (languages.empty() || baselines.empty() || runs.empty())
      throw UsageError("give --ledger DIR or --languages, --baselines and --runs");
    return load_ledger({baselines, runs, interactions}, load_language_registry(languages), options);
  }
};

StepSelector parse_selector(const std::string& text) {
  if (text.empty() || text == "minimal") return StepSelector::minimal();
  std::vector<int> steps;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      steps.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad step selector '{}'", text));
    }
  }
  if (steps.size() == 1) return StepSelector::single(steps.front());
  return StepSelector::mean_of(std::move(steps));
}

Axis parse_axis(const std::string& text) {
  if (text == "transfer") return Axis::Transfer;
  if (text == "target") return Axis::Target;
  throw UsageError(fmt::format("unknown axis '{}'", text));
}

TaskScope parse_scope(const std::string& task) {
  if (task == "all") return std::nullopt;
  return task;
}

void print_warnings(const Ledger& ledger) {
  for (const auto& w : ledger.warnings()) std::cerr << "warning: " << w << "\n";
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw LedgerError("cannot write output", out);
  file << text;
}

// Rows of the comparison fixture: lang,base,k...,1A,2A,3A[,flags...].
ComparisonTable read_comparison_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LedgerError("cannot open file", path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto table = parse_table_csv(buffer.str());
  const auto& cols = table.columns;
  auto col = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (cols[c] == name) return c;
    return std::nullopt;
  };
  const auto lang = col("lang");
  const auto base = col("base");
  if (!lang || !base) throw LedgerError("comparison csv needs lang and base columns", path);
  ComparisonTable out;
  std::vector<std::size_t> step_cols;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c].size() > 1 && cols[c][0] == 'k' &&
        cols[c].find_first_not_of("0123456789", 1) == std::string::npos) {
      out.steps.push_back(std::stoi(cols[c].substr(1)));
      step_cols.push_back(c);
    }
  }
  const std::array<std::optional<std::size_t>, 3> inter{col("1A"), col("2A"), col("3A")};
  auto number = [&](const std::string& cell, std::size_t line) -> std::optional<double> {
    if (cell.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used == cell.size()) return v;
    } catch (const std::exception&) {
    }
    throw LedgerError(fmt::format("bad number '{}'", cell), path, line);
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ComparisonRow cr;
    cr.lang = row[*lang];
    const auto b = number(row[*base], r + 2);
    if (!b) throw LedgerError("missing base", path, r + 2);
    cr.base = *b;
    for (const auto c : step_cols) cr.step_scores.push_back(number(row[c], r + 2));
    for (std::size_t k = 0; k < 3; ++k)
      if (inter[k]) cr.interactions[k] = number(row[*inter[k]], r + 2);
    fill_improvement_flags(cr);
    out.rows.push_back(std::move(cr));
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Cross-lingual transfer score analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "transferscope 0.1.0");

  // validate
  LedgerArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Check a ledger and print a summary");
  validate_args.attach(validate_cmd);

  // synth
  SynthConfig synth;
  std::string synth_out;
  std::string synth_steps;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic ledger");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_option("--transfers", synth.n_transfer)->check(CLI::Range(1, 17576));
  synth_cmd->add_option("--targets", synth.n_target)->check(CLI::Range(1, 17576));
  synth_cmd->add_option("--tasks", synth.tasks)->check(CLI::Range(1, 1000));
  synth_cmd->add_option("--reps", synth.rep_count)->check(CLI::Range(1, 1000));
  synth_cmd->add_option("--steps", synth_steps, "Comma separated step grid");
  synth_cmd->add_option("--noise-sd", synth.noise_sd);
  synth_cmd->add_option("--effect-sd", synth.effect_sd);
  synth_cmd->add_option("--trend", synth.trend);
  synth_cmd->add_option("--missing-rate", synth.missing_rate)->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--max-arity", synth.max_arity)->check(CLI::Range(0, 3));
  synth_cmd->add_option("--interaction-sd", synth.interaction_sd);
  synth_cmd->add_option("--model", synth.model);

  // shared selection options
  std::string model;
  std::string task;
  std::string transfer;
  std::string target;
  std::string lang;
  std::string format = "csv";
  std::string selector;
  std::string out;
  int steps = 0;
  int arity = 2;
  int threshold = kDefaultProfileThreshold;
  bool ties_positive = false;

  auto add_model_task = [&](CLI::App* cmd, bool task_required = true) {
    cmd->add_option("--model", model)->required();
    auto* opt = cmd->add_option("--task", task);
    if (task_required) opt->required();
  };
  auto add_format = [&](CLI::App* cmd, std::vector<std::string> allowed) {
    cmd->add_option("--format", format)->check(CLI::IsMember(std::move(allowed)));
    cmd->add_option("-o,--out", out, "Output file (default stdout)");
  };

  LedgerArgs ts_args;
  auto* ts_cmd = app.add_subcommand("ts", "Transfer score of one cell");
  ts_args.attach(ts_cmd);
  add_model_task(ts_cmd);
  ts_cmd->add_option("--transfer", transfer)->required();
  ts_cmd->add_option("--target", target)->required();
  ts_cmd->add_option("--steps", steps)->required();

  LedgerArgs rank_args;
  std::string axis = "transfer";
  int top = 0;
  auto* rank_cmd = app.add_subcommand("rank", "Rank languages by aggregated transfer score");
  rank_args.attach(rank_cmd);
  add_model_task(rank_cmd);
  rank_cmd->add_option("--axis", axis)->check(CLI::IsMember({"transfer", "target"}));
  rank_cmd->add_option("--selector", selector, "minimal, a step, or a comma list of steps");
  rank_cmd->add_option("--top", top)->check(CLI::NonNegativeNumber);
  add_format(rank_cmd, {"csv", "md", "json"});

  LedgerArgs variance_args;
  std::vector<int> counts;
  auto* variance_cmd = app.add_subcommand("variance", "Variance profiles of transfer languages");
  variance_args.attach(variance_cmd);
  variance_cmd->add_option("--model", model);
  variance_cmd->add_option("--task", task);
  variance_cmd->add_option("--selector", selector);
  variance_cmd->add_option("--threshold", threshold)->check(CLI::NonNegativeNumber);
  variance_cmd->add_option("--counts", counts, "max,min recipient counts to classify directly")
      ->delimiter(',')
      ->expected(2);
  add_format(variance_cmd, {"csv", "md", "json", "svg"});

  LedgerArgs flags_args;
  std::string flags_table;
  auto* flags_cmd = app.add_subcommand("flags", "Improvement flags per self-evaluation row");
  flags_args.attach(flags_cmd);
  flags_cmd->add_option("--model", model);
  flags_cmd->add_option("--task", task);
  flags_cmd->add_option("--table", flags_table, "Comparison csv (lang,base,k...,1A,2A,3A)");
  add_format(flags_cmd, {"csv", "md", "json"});

  LedgerArgs progression_args;
  auto* progression_cmd = app.add_subcommand("progression", "Transfer score across steps");
  progression_args.attach(progression_cmd);
  add_model_task(progression_cmd);
  progression_cmd->add_option("--transfer", transfer);
  progression_cmd->add_option("--target", target);
  add_format(progression_cmd, {"csv", "md", "json", "svg"});

  LedgerArgs recipients_args;
  auto* recipients_cmd = app.add_subcommand("recipients", "Positive-transfer share per target");
  recipients_args.attach(recipients_cmd);
  add_model_task(recipients_cmd);
  recipients_cmd->add_option("--selector", selector);
  add_format(recipients_cmd, {"csv", "md", "json"});

  LedgerArgs interference_args;
  auto* interference_cmd =
      app.add_subcommand("interference", "Sign-pattern counts or scatter of adapter interactions");
  interference_args.attach(interference_cmd);
  add_model_task(interference_cmd);
  interference_cmd->add_option("--lang", lang, "Print pattern counts for one language");
  interference_cmd->add_option("--arity", arity)->check(CLI::IsMember({2, 3}));
  interference_cmd->add_flag("--ties-positive", ties_positive, "Count a zero delta as positive");
  add_format(interference_cmd, {"csv", "md", "json", "svg"});

  auto* project_cmd = app.add_subcommand("project", "Project sign-pattern counts onto the plane");
  project_cmd->add_option("--arity", arity)->check(CLI::IsMember({2, 3}));
  project_cmd->add_option("--counts", counts, "4 (arity 2) or 8 (arity 3) counts")
      ->delimiter(',')
      ->required();

  LedgerArgs correlate_args;
  double alpha = 0.05;
  auto* correlate_cmd = app.add_subcommand("correlate", "Spearman correlation of task rankings");
  correlate_args.attach(correlate_cmd);
  correlate_cmd->add_option("--model", model)->required();
  correlate_cmd->add_option("--selector", selector);
  correlate_cmd->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));
  add_format(correlate_cmd, {"csv", "md", "json"});

  LedgerArgs heatmap_args;
  auto* heatmap_cmd = app.add_subcommand("heatmap", "Seen/unseen mean transfer scores");
  heatmap_args.attach(heatmap_cmd);
  add_model_task(heatmap_cmd);
  heatmap_cmd->add_option("--selector", selector);
  add_format(heatmap_cmd, {"csv", "md", "json", "svg"});

  LedgerArgs report_args;
  std::string report_out;
  int threads = 1;
  auto* report_cmd = app.add_subcommand("report-all", "Write every report for every model and task");
  report_args.attach(report_cmd);
  report_cmd->add_option("--out", report_out)->required();
  report_cmd->add_option("--selector", selector);
  report_cmd->add_option("--threshold", threshold)->check(CLI::NonNegativeNumber);
  report_cmd->add_option("--threads", threads)->check(CLI::Range(1, 256));
  report_cmd->add_flag("--ties-positive", ties_positive);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto ties = ties_positive ? TieRule::Positive : TieRule::Negative;
  const auto fmt_kind = parse_output_format(format);

  if (*validate_cmd) {
    const auto ledger = validate_args.load();
    print_warnings(ledger);
    std::cout << fmt::format("ok: {} languages, {} baselines, {} runs, {} interactions\n",
                             ledger.languages().size(), ledger.baselines().size(),
                             ledger.runs().size(), ledger.interactions().size());
    for (const auto& m : ledger.models())
      for (const auto& t : ledger.tasks(m)) {
        const auto n = ledger.rep_count(m, t);
        std::cout << fmt::format("{}/{}: {} transfers, {} targets, reps {}\n", m, t,
                                 ledger.transfers(m, t).size(), ledger.targets(m, t).size(),
                                 n ? std::to_string(*n) : std::string("-"));
      }
    return 0;
  }

  if (*synth_cmd) {
    if (!synth_steps.empty()) {
      synth.step_grid.clear();
      std::stringstream in(synth_steps);
      std::string part;
      while (std::getline(in, part, ',')) {
        try {
          synth.step_grid.push_back(std::stoi(part));
        } catch (const std::exception&) {
          throw UsageError(fmt::format("bad step grid '{}'", synth_steps));
        }
      }
    }
    SynthResult result;
    try {
      result = synth_ledger(synth);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    save_ledger(result.ledger, synth_out);
    std::ofstream truth(fs::path(synth_out) / "truth.csv", std::ios::binary);
    if (!truth) throw LedgerError("cannot write truth.csv", synth_out);
    write_truth_csv(result.truth, truth);
    return 0;
  }

  if (*ts_cmd) {
    const auto ledger = ts_args.load();
    print_warnings(ledger);
    const auto score = transfer_score(ledger, model, task, transfer, target, steps, ts_args.strict);
    std::cout << fmt::format("{:.4f}\n", score.value);
    return 0;
  }

  if (*rank_cmd) {
    const auto ledger = rank_args.load();
    const auto matrix = transfer_matrix(ledger, model, task, parse_selector(selector));
    auto ranking = rank_languages(matrix, parse_axis(axis));
    if (top > 0 && ranking.size() > static_cast<std::size_t>(top)) ranking.resize(top);
    emit(render_rank_table(ranking, ledger.languages(), fmt_kind), out);
    return 0;
  }

  if (*variance_cmd) {
    if (!counts.empty()) {
      VarianceStats stats;
      stats.max_count = counts[0];
      stats.min_count = counts[1];
      std::cout << to_string(variance_profile(stats, threshold)) << "\n";
      return 0;
    }
    if (model.empty() || task.empty()) throw UsageError("variance needs --model and --task or --counts");
    const auto ledger = variance_args.load();
    const auto matrix = transfer_matrix(ledger, model, task, parse_selector(selector));
    const auto rows = variance_table(matrix, ledger.languages(), threshold);
    emit(fmt_kind == OutputFormat::Svg ? render_violin(matrix, rows, fmt_kind)
                                       : render_variance_table(rows, fmt_kind),
         out);
    return 0;
  }

  if (*flags_cmd) {
    ComparisonTable table;
    if (!flags_table.empty()) {
      table = read_comparison_csv(flags_table);
    } else {
      if (model.empty() || task.empty()) throw UsageError("flags needs --table or --model and --task");
      table = comparison_table(flags_args.load(), model, task);
    }
    emit(render_comparison_table(table, fmt_kind), out);
    return 0;
  }

  if (*progression_cmd) {
    const auto ledger = progression_args.load();
    std::vector<ProgressionSeries> series;
    const auto transfers = transfer.empty() ? ledger.transfers(model, task)
                                            : std::vector<std::string>{transfer};
    const auto targets = target.empty() ? ledger.targets(model, task)
                                        : std::vector<std::string>{target};
    for (const auto& s : transfers)
      for (const auto& t : targets) {
        try {
          series.push_back({s, t, progression_series(ledger, model, task, s, t)});
        } catch (const MetricError&) {
          if (!transfer.empty() && !target.empty()) throw;
        }
      }
    emit(render_progression(series, fmt_kind), out);
    return 0;
  }

  if (*recipients_cmd) {
    const auto ledger = recipients_args.load();
    const auto matrix = transfer_matrix(ledger, model, task, parse_selector(selector));
    emit(render_recipient_map(recipient_map(matrix, ledger.languages()), fmt_kind), out);
    return 0;
  }

  if (*interference_cmd) {
    const auto ledger = interference_args.load();
    const auto scope = parse_scope(task);
    if (!lang.empty()) {
      const auto c = pattern_counts(ledger, model, scope, lang, arity, ties);
      Table t{{"pattern", "count"}, {}, {false, true}};
      for (std::size_t k = 0; k < c.counts.size(); ++k)
        t.rows.push_back({InterferenceCounts::pattern_label(k, arity), std::to_string(c.counts[k])});
      if (fmt_kind == OutputFormat::Svg) throw UsageError("pattern counts have no svg form");
      emit(render_table(t, fmt_kind), out);
      return 0;
    }
    const auto points = interference_scatter(ledger, model, scope, arity, ties);
    emit(render_scatter(points, fmt_kind), out);
    return 0;
  }

  if (*project_cmd) {
    const std::size_t want = arity == 2 ? 4 : 8;
    if (counts.size() != want)
      throw UsageError(fmt::format("arity {} needs {} counts, got {}", arity, want, counts.size()));
    for (const int c : counts)
      if (c < 0) throw UsageError("counts must be non-negative");
    if (arity == 2) {
      const auto p = project_bilingual(counts);
      std::cout << fmt::format("{:.4f},{:.4f}\n", p.x, p.y);
    } else {
      const auto p = project_trilingual(counts);
      std::cout << fmt::format("{:.4f},{:.4f},{}\n", p.point.x, p.point.y, sign_char(p.third_sign()));
    }
    return 0;
  }

  if (*correlate_cmd) {
    const auto ledger = correlate_args.load();
    std::map<std::string, std::map<std::string, double>> by_task;
    for (const auto& t : ledger.tasks(model)) {
      const auto matrix = transfer_matrix(ledger, model, t, parse_selector(selector));
      for (const auto& e : rank_languages(matrix, Axis::Transfer)) by_task[t][e.lang] = e.agg_ts;
    }
    emit(render_correlation_table(task_correlation_matrix(by_task, alpha), fmt_kind), out);
    return 0;
  }

  if (*heatmap_cmd) {
    const auto ledger = heatmap_args.load();
    const auto matrix = transfer_matrix(ledger, model, task, parse_selector(selector));
    emit(render_heatmap(seen_unseen_matrix(matrix, ledger.languages()), fmt_kind), out);
    return 0;
  }

  if (*report_cmd) {
    const auto ledger = report_args.load();
    print_warnings(ledger);
    ReportAllOptions options;
    options.selector = parse_selector(selector);
    options.threshold = threshold;
    options.ties = ties;
    options.threads = threads;
    const auto n = report_all(ledger, report_out, options);
    std::cout << fmt::format("wrote {} files to {}\n", n, report_out);
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const LedgerError& e) {
    std::cerr << "invalid ledger: " << e.what() << "\n";
    return 1;
  } catch (const MetricError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

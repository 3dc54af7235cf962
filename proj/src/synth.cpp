#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "csv.hpp"
#include "transferscope/ledger.hpp"

namespace transferscope {

namespace {

std::string synthetic_iso(int index) {
  std::string code(3, 'a');
  code[0] = static_cast<char>('a' + (index / 676) % 26);
  code[1] = static_cast<char>('a' + (index / 26) % 26);
  code[2] = static_cast<char>('a' + index % 26);
  return code;
}

std::string synthetic_task(int index) {
  static const char* kKnown[] = {"dep", "pos", "ner", "xnli", "anli", "tydiqa"};
  if (index < 6) return kKnown[index];
  return "task" + std::to_string(index);
}

// Scores are kept at two decimals like published evaluation tables.
double round2(double v) { return std::round(v * 100.0) / 100.0; }
double clamp_score(double v) { return std::clamp(round2(v), 0.0, 100.0); }

void combos_of(int n, int size, std::vector<std::vector<int>>& out) {
  std::vector<int> current;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(current.size()) == size) {
      out.push_back(current);
      return;
    }
    for (int i = start; i < n; ++i) {
      current.push_back(i);
      self(self, i + 1);
      current.pop_back();
    }
  };
  rec(rec, 0);
}

}  // namespace

SynthResult synth_ledger(const SynthConfig& config) {
  if (config.n_transfer < 1 || config.n_target < 1 || config.tasks < 1 || config.rep_count < 1)
    throw std::invalid_argument("synth_ledger: all dimensions must be >= 1");
  if (config.step_grid.empty()) throw std::invalid_argument("synth_ledger: empty step grid");
  if (config.noise_sd < 0.0 || config.effect_sd < 0.0 || config.interaction_sd < 0.0)
    throw std::invalid_argument("synth_ledger: standard deviations must be >= 0");
  if (config.missing_rate < 0.0 || config.missing_rate >= 1.0)
    throw std::invalid_argument("synth_ledger: missing_rate must lie in [0,1)");
  if (config.max_arity < 0 || config.max_arity > 3)
    throw std::invalid_argument("synth_ledger: max_arity must lie in [0,3]");
  std::vector<int> grid = config.step_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() <= 0) throw std::invalid_argument("synth_ledger: steps must be positive");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Transfer languages are the first n_transfer codes; targets the first
  // n_target codes, so every transfer language that is also a target can be
  // evaluated on itself.
  const int pool = std::max(config.n_transfer, config.n_target);
  std::vector<LanguageInfo> languages;
  for (int i = 0; i < pool; ++i) {
    languages.push_back(LanguageInfo{synthetic_iso(i), "Synthetic", "Genus" + std::to_string(i % 3),
                                     i % 2 == 0 ? "Latn" : "Cyrl", unit(rng) < 0.7});
  }

  std::map<std::tuple<std::string, std::string, std::string>, double> planted;
  for (const auto& p : config.planted) planted[{p.task, p.transfer, p.target}] = p.effect;

  std::vector<BaselineRecord> baselines;
  std::vector<RunRecord> runs;
  std::vector<InteractionRecord> interactions;
  std::vector<TruthRow> truth;

  for (int t = 0; t < config.tasks; ++t) {
    const auto task = synthetic_task(t);
    std::vector<double> base(config.n_target);
    for (int j = 0; j < config.n_target; ++j) {
      base[j] = round2(20.0 + 75.0 * unit(rng));
      baselines.push_back({config.model, task, synthetic_iso(j), base[j]});
    }
    for (int i = 0; i < config.n_transfer; ++i) {
      for (int j = 0; j < config.n_target; ++j) {
        // Draw every random quantity even for dropped cells so that the
        // remaining cells do not depend on missing_rate.
        const bool dropped = i != j && unit(rng) < config.missing_rate;
        double effect = config.effect_sd * normal(rng);
        const auto transfer = synthetic_iso(i);
        const auto target = synthetic_iso(j);
        if (const auto it = planted.find({task, transfer, target}); it != planted.end())
          effect = it->second;
        for (const int steps : grid) {
          const double at_step = effect * (1.0 + config.trend * std::log10(steps));
          std::vector<double> noise(config.rep_count);
          for (auto& n : noise) n = config.noise_sd * normal(rng);
          if (dropped) continue;
          truth.push_back({task, transfer, target, steps, at_step});
          for (int r = 0; r < config.rep_count; ++r)
            runs.push_back({config.model, task, transfer, target, steps, r,
                            clamp_score(base[j] + at_step + noise[r])});
        }
      }
    }

    if (config.max_arity == 0) continue;
    std::vector<double> mono(config.n_transfer);
    for (int i = 0; i < config.n_transfer; ++i) {
      mono[i] = round2(30.0 + 60.0 * unit(rng));
      interactions.push_back({config.model, task, {synthetic_iso(i)}, synthetic_iso(i), mono[i]});
    }
    for (int size = 2; size <= std::min(config.max_arity, config.n_transfer); ++size) {
      std::vector<std::vector<int>> combos;
      combos_of(config.n_transfer, size, combos);
      for (const auto& members : combos) {
        Combo combo;
        for (int m : members) combo.push_back(synthetic_iso(m));
        for (int m : members) {
          const double score = clamp_score(mono[m] + config.interaction_sd * normal(rng));
          interactions.push_back({config.model, task, combo, synthetic_iso(m), score});
        }
      }
    }
  }

  return SynthResult{Ledger::build(LanguageRegistry(std::move(languages)), std::move(baselines),
                                   std::move(runs), std::move(interactions)),
                     std::move(truth)};
}

void write_truth_csv(const std::vector<TruthRow>& truth, std::ostream& out) {
  out << "task,transfer,target,steps,effect\n";
  for (const auto& row : truth)
    out << csv::escape(row.task) << ',' << row.transfer << ',' << row.target << ',' << row.steps
        << ',' << format_score(row.effect) << '\n';
}

}  // namespace transferscope

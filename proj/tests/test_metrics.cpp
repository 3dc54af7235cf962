#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "transferscope/error.hpp"
#include "transferscope/transfer_metrics.hpp"

using namespace transferscope;
using doctest::Approx;
using testing::registry;

namespace {

std::vector<RunRecord> cell(const std::string& transfer, const std::string& target, int steps,
                            std::vector<double> reps, const std::string& task = "dep") {
  std::vector<RunRecord> out;
  for (std::size_t r = 0; r < reps.size(); ++r)
    out.push_back({"m", task, transfer, target, steps, static_cast<int>(r), reps[r]});
  return out;
}

template <typename... Vs>
std::vector<RunRecord> concat(Vs... parts) {
  std::vector<RunRecord> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

TransferMatrix values(const std::vector<TransferMatrix::Cell>& cells) {
  return TransferMatrix::from_cells("m", "t", cells);
}

}  // namespace

TEST_CASE("transfer_score examples") {
  const auto reg = registry({"aaa", "bbb", "ccc", "ddd"});
  const auto l = Ledger::build(
      reg, {{"m", "dep", "aaa", 75.0}, {"m", "dep", "bbb", 80.0}, {"m", "dep", "ccc", 50.0},
            {"m", "dep", "ddd", 0.0}},
      concat(cell("bbb", "aaa", 1, std::vector<double>(10, 75.0)),
             cell("aaa", "bbb", 1, {82, 78, 84, 80, 81, 79, 83, 77, 85, 81}),
             cell("aaa", "ccc", 1, std::vector<double>(10, 40.0)),
             cell("aaa", "ddd", 1, std::vector<double>(10, 1.0))),
      {});
  CHECK(transfer_score(l, "m", "dep", "bbb", "aaa", 1).value == 0.0);
  CHECK(transfer_score(l, "m", "dep", "aaa", "bbb", 1).value == Approx(0.0125).epsilon(1e-12));
  CHECK(transfer_score(l, "m", "dep", "aaa", "ccc", 1).value == Approx(-0.2).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(transfer_score(l, "m", "dep", "aaa", "ddd", 1),
                       doctest::Contains("baseline is zero"), MetricError);
  CHECK_THROWS_WITH_AS(transfer_score(l, "m", "dep", "bbb", "ccc", 1),
                       doctest::Contains("missing cell"), MetricError);
  CHECK_THROWS_WITH_AS(transfer_score(l, "m", "pos", "aaa", "bbb", 1),
                       doctest::Contains("missing baseline"), MetricError);
}

TEST_CASE("strict transfer_score demands the full repetition count") {
  const auto reg = registry({"aaa", "bbb"});
  const auto l = Ledger::build(reg, {{"m", "dep", "bbb", 50.0}},
                               concat(cell("aaa", "bbb", 1, {50, 51, 52}), cell("aaa", "bbb", 10, {50})),
                               {});
  CHECK_NOTHROW(transfer_score(l, "m", "dep", "aaa", "bbb", 10));
  CHECK_NOTHROW(transfer_score(l, "m", "dep", "aaa", "bbb", 1, true));
  CHECK_THROWS_AS(transfer_score(l, "m", "dep", "aaa", "bbb", 10, true), MetricError);
}

TEST_CASE("step selectors") {
  const std::vector<int> grid{1, 10, 100, 1000};
  CHECK(StepSelector::minimal().resolve(grid) == std::vector<int>{1, 10, 100});
  CHECK(StepSelector::single(1000).resolve(grid) == std::vector<int>{1000});
  CHECK(StepSelector::mean_of({10, 1000}).resolve(grid) == std::vector<int>{10, 1000});
  CHECK_THROWS_AS(StepSelector::single(5).resolve(grid), MetricError);
  CHECK_THROWS_AS(StepSelector::minimal().resolve({1000}), MetricError);

  // per-step ts {0.3, 0.0, -0.3} average to 0
  const auto reg = registry({"aaa", "bbb"});
  const auto l = Ledger::build(reg, {{"m", "dep", "bbb", 50.0}},
                               concat(cell("aaa", "bbb", 1, {65}), cell("aaa", "bbb", 10, {50}),
                                      cell("aaa", "bbb", 100, {35}), cell("aaa", "bbb", 1000, {60})),
                               {});
  const auto m = transfer_matrix(l, "m", "dep");
  REQUIRE(m.at("aaa", "bbb").has_value());
  CHECK(*m.at("aaa", "bbb") == Approx(0.0).epsilon(1e-12));
  const auto single = transfer_matrix(l, "m", "dep", StepSelector::single(1000));
  CHECK(*single.at("aaa", "bbb") == transfer_score(l, "m", "dep", "aaa", "bbb", 1000).value);
}

TEST_CASE("matrix records absent cells") {
  const auto reg = registry({"aaa", "bbb", "ccc"});
  const auto l = Ledger::build(reg, {{"m", "dep", "bbb", 50.0}, {"m", "dep", "ccc", 0.0}},
                               concat(cell("aaa", "bbb", 1, {55}), cell("aaa", "aaa", 1, {55}),
                                      cell("bbb", "ccc", 1, {5}), cell("bbb", "bbb", 1000, {55})),
                               {});
  const auto m = transfer_matrix(l, "m", "dep");
  CHECK(m.populated() == 1);
  std::map<std::string, std::string> reasons;
  for (const auto& a : m.absent()) reasons[a.transfer + ">" + a.target] = a.reason;
  CHECK(reasons["aaa>aaa"] == "missing baseline");
  CHECK(reasons["bbb>ccc"] == "zero baseline");
  CHECK(reasons["bbb>bbb"] == "no runs at selected steps");
  const auto c = coverage(m);
  CHECK(c.transfers == 2);
  CHECK(c.targets == 3);
  CHECK(c.populated + c.absent == 6);
  CHECK_THROWS_AS(transfer_matrix(l, "m", "pos"), MetricError);
}

TEST_CASE("aggregation examples") {
  const auto m = values({{"aaa", "xxx", 0.33}});
  CHECK(aggregated_transfer(m, "aaa") == 0.33);
  const auto two = values({{"aaa", "xxx", 0.2}, {"aaa", "yyy", -0.4}});
  CHECK(aggregated_transfer(two, "aaa") == Approx(-0.1).epsilon(1e-12));
  for (double x : {0.01, 0.5, 3.0}) {
    const auto sym = values({{"aaa", "xxx", x}, {"aaa", "yyy", -x}});
    CHECK(aggregated_transfer(sym, "aaa") == 0.0);
  }
  const auto t = values({{"aaa", "xxx", 0.1}, {"bbb", "xxx", 0.1}, {"ccc", "xxx", 0.1}});
  CHECK(aggregated_target(t, "xxx") == Approx(0.1).epsilon(1e-12));
  const auto t2 = values({{"aaa", "xxx", 0.5}, {"bbb", "xxx", -0.1}});
  CHECK(aggregated_target(t2, "xxx") == Approx(0.2).epsilon(1e-12));

  TransferMatrix empty("m", "t", {"aaa"}, {"xxx"});
  CHECK_THROWS_AS(aggregated_target(empty, "xxx"), MetricError);
  CHECK_THROWS_AS(aggregated_transfer(empty, "aaa"), MetricError);
  CHECK_THROWS_AS(aggregated_transfer(m, "zzz"), MetricError);
}

TEST_CASE("positive_pct examples") {
  const auto all = values({{"a", "p", 1}, {"a", "q", 1}, {"a", "r", 1}, {"a", "s", 1}, {"a", "t", 1}});
  CHECK(positive_pct(all, "a", Axis::Transfer) == 100.0);
  const auto some =
      values({{"a", "p", 1}, {"a", "q", 2}, {"a", "r", 0}, {"a", "s", -1}, {"a", "t", -2}});
  CHECK(positive_pct(some, "a", Axis::Transfer) == 40.0);
  const auto none = values({{"a", "p", -1}, {"b", "p", -0.5}});
  CHECK(positive_pct(none, "p", Axis::Target) == 0.0);
}

TEST_CASE("ranking") {
  const auto m = values({{"pcm", "xxx", 0.13}, {"mya", "xxx", 0.33}, {"ell", "xxx", 0.15}});
  const auto r = rank_languages(m, Axis::Transfer);
  REQUIRE(r.size() == 3);
  CHECK(r[0].lang == "mya");
  CHECK(r[1].lang == "ell");
  CHECK(r[2].lang == "pcm");
  CHECK(r[2].rank == 3);

  const auto tie = rank_languages(values({{"bbb", "x", 0.1}, {"aaa", "x", 0.1}}), Axis::Transfer);
  CHECK(tie[0].lang == "aaa");
  CHECK(tie[1].lang == "bbb");
  const auto one = rank_languages(values({{"aaa", "x", -1}}), Axis::Transfer);
  CHECK(one.size() == 1);
  CHECK(one[0].rank == 1);
}

TEST_CASE("max/min recipient counts") {
  const auto m = values({{"aaa", "x", 0.2}, {"bbb", "x", -0.1}});
  const auto c = max_min_recipient_counts(m);
  CHECK(c.at("aaa") == RecipientCounts{1, 0});
  CHECK(c.at("bbb") == RecipientCounts{0, 1});

  const auto tie = max_min_recipient_counts(values({{"aaa", "x", 0.2}, {"bbb", "x", 0.2}, {"ccc", "x", 0.0}}));
  CHECK(tie.at("aaa").max_count == 1);
  CHECK(tie.at("bbb").max_count == 1);
  CHECK(tie.at("ccc").min_count == 1);
  CHECK_THROWS_AS(max_min_recipient_counts(values({{"aaa", "x", 1.0}})), MetricError);
}

TEST_CASE("variance stats") {
  const auto constant = values({{"a", "x", 0.05}, {"a", "y", 0.05}, {"a", "z", 0.05}});
  CHECK(variance_stats(constant, "a").variance == Approx(0.0).epsilon(1e-12));
  const auto pm = values({{"a", "x", 0.10}, {"a", "y", -0.10}});
  CHECK(variance_stats(pm, "a").variance == Approx(100.0).epsilon(1e-12));
  const auto three = values({{"a", "x", 0.01}, {"a", "y", 0.02}, {"a", "z", 0.03}});
  CHECK(variance_stats(three, "a").variance == Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(variance_stats(values({{"a", "x", 0.1}}), "a"), MetricError);
}

TEST_CASE("variance profiles with the default threshold") {
  auto profile = [](int mx, int mn) { return variance_profile(VarianceStats{0.0, mx, mn}); };
  CHECK(profile(10, 10) == VarianceProfile::PlusAndMinus);
  CHECK(profile(11, 15) == VarianceProfile::PlusAndMinus);
  CHECK(profile(13, 2) == VarianceProfile::MostlyPlus);
  CHECK(profile(1, 11) == VarianceProfile::MostlyMinus);
  CHECK(profile(0, 0) == VarianceProfile::Neutral);
  CHECK(profile(3, 3) == VarianceProfile::PlusAndMinus);
  CHECK(profile(2, 2) == VarianceProfile::Neutral);
  CHECK(variance_profile(VarianceStats{0.0, 2, 0}, 2) == VarianceProfile::MostlyPlus);
  CHECK(to_string(VarianceProfile::MostlyMinus) == "MostlyMinus");
}

TEST_CASE("improvement flags") {
  const std::array<std::optional<double>, 3> ell{91.97, 91.91, 91.98};
  const auto f = improvement_flags(92.82, 92.73, 91.46, ell);
  CHECK(f.first_step == false);
  CHECK(f.last_step == false);
  CHECK(f.interaction == false);

  const std::array<std::optional<double>, 3> kmr{32.54, 32.10, 32.03};
  const auto k = improvement_flags(31.94, 32.44, 45.30, kmr);
  CHECK(k.first_step == true);
  CHECK(k.last_step == true);
  CHECK(k.interaction == true);

  const std::array<std::optional<double>, 3> same{50.0, 50.0, 50.0};
  const auto eq = improvement_flags(50.0, 50.0, 50.0, same);
  CHECK(eq.first_step == false);
  CHECK(eq.last_step == false);
  CHECK(eq.interaction == false);

  const std::array<std::optional<double>, 3> missing{};
  const auto none = improvement_flags(50.0, std::nullopt, 51.0, missing);
  CHECK_FALSE(none.first_step.has_value());
  CHECK(none.last_step == true);
  CHECK_FALSE(none.interaction.has_value());
}

TEST_CASE("progression series") {
  const auto reg = registry({"aaa", "bbb"});
  const auto l = Ledger::build(reg, {{"m", "dep", "bbb", 80.0}},
                               concat(cell("aaa", "bbb", 1, {80, 80}), cell("aaa", "bbb", 10, {81, 79}),
                                      cell("aaa", "aaa", 1, {80, 80})),
                               {});
  const auto p = progression_series(l, "m", "dep", "aaa", "bbb");
  REQUIRE(p.size() == 2);
  CHECK(p[0].steps == 1);
  CHECK(p[0].sd_ts == 0.0);
  CHECK(p[1].steps == 10);
  CHECK(p[1].mean_ts == Approx(0.0).epsilon(1e-12));
  CHECK(p[1].sd_ts == Approx(0.0125).epsilon(1e-12));
  CHECK(p[1].reps == 2);
  CHECK_THROWS_AS(progression_series(l, "m", "dep", "aaa", "aaa"), MetricError);

  SUBCASE("planted trend is monotone and matches the truth") {
    SynthConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.effect_sd = 0.0;
    cfg.trend = 1.0;
    cfg.planted = {{"dep", "aaa", "aab", 2.0}};
    const auto r = synth_ledger(cfg);
    const auto series = progression_series(r.ledger, "synth", "dep", "aaa", "aab");
    const double base = *r.ledger.baseline("synth", "dep", "aab");
    REQUIRE(series.size() == 4);
    for (std::size_t k = 1; k < series.size(); ++k) CHECK(series[k].mean_ts > series[k - 1].mean_ts);
    for (const auto& t : r.truth)
      if (t.transfer == "aaa" && t.target == "aab")
        for (const auto& pt : series)
          if (pt.steps == t.steps) CHECK(pt.mean_ts == Approx(t.effect / base).epsilon(0.01 / base));
  }
}

TEST_CASE("sustained improvement") {
  const auto reg = registry({"aaa", "bbb", "ccc"});
  const auto l = Ledger::build(
      reg, {{"m", "dep", "aaa", 50.0}, {"m", "dep", "bbb", 50.0}, {"m", "pos", "aaa", 50.0}},
      concat(cell("aaa", "aaa", 1000, {51}), cell("bbb", "bbb", 1000, {49}), cell("aaa", "aaa", 1, {49}),
             cell("bbb", "bbb", 1, {49}), cell("aaa", "aaa", 1000, {52}, "pos")),
      {});
  const std::vector<std::string> both{"dep", "pos"};
  const auto s = sustained_improvement_pct(l, "m", both, 1000);
  REQUIRE(s.per_task.size() == 2);
  CHECK(s.per_task[0].percent == 50.0);
  CHECK(s.per_task[1].percent == 100.0);
  CHECK(s.percent == 75.0);
  const std::vector<std::string> dep{"dep"};
  CHECK(sustained_improvement_pct(l, "m", dep, 1).percent == 0.0);
  const std::vector<std::string> none{"ner"};
  CHECK_THROWS_AS(sustained_improvement_pct(l, "m", none, 1000), MetricError);
}

TEST_CASE("seen / unseen heatmap") {
  const auto reg = registry({"aaa", "bbb", "ccc", "ddd"}, {"ccc", "ddd"});
  const auto seen_only = seen_unseen_matrix(values({{"aaa", "bbb", 0.1}, {"bbb", "aaa", 0.3}}), reg);
  CHECK(*seen_only.cells[0][0].mean_ts == Approx(0.2).epsilon(1e-12));
  CHECK(seen_only.cells[0][0].count == 2);
  CHECK_FALSE(seen_only.cells[1][1].mean_ts.has_value());
  CHECK_FALSE(seen_only.cells[0][1].mean_ts.has_value());

  const auto m = values({{"ccc", "ddd", 0.1}, {"ddd", "ccc", 0.1}, {"aaa", "ccc", 0.2}, {"aaa", "ddd", -0.2}});
  const auto h = seen_unseen_matrix(m, reg);
  CHECK(*h.cells[1][1].mean_ts == Approx(0.1).epsilon(1e-12));
  CHECK(*h.cells[0][1].mean_ts == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("recipient buckets") {
  CHECK(recipient_bucket(0.0) == RecipientBucket::Never);
  CHECK(recipient_bucket(50.0) == RecipientBucket::Low);
  CHECK(recipient_bucket(90.0) == RecipientBucket::Low);
  CHECK(recipient_bucket(100.0 * 35 / 38) == RecipientBucket::High);
  CHECK(recipient_bucket(100.0) == RecipientBucket::Universal);

  std::vector<TransferMatrix::Cell> cells;
  for (int i = 0; i < 38; ++i) {
    std::string iso = {'a', static_cast<char>('a' + i / 26), static_cast<char>('a' + i % 26)};
    cells.push_back({iso, "zzz", i < 35 ? 0.1 : -0.1});
  }
  const auto s = recipient_summary(values(cells), "zzz");
  CHECK(s.positive_pct == Approx(92.1).epsilon(0.001));
  CHECK(s.bucket == RecipientBucket::High);
  CHECK(to_string(s.bucket) == "high");
}

TEST_CASE("metric properties") {
  SUBCASE("scale invariance") {
    const auto reg = registry({"aaa", "bbb"});
    for (double c : {0.5, 1.1, 0.37}) {
      const std::vector<double> reps{40.0, 41.5, 39.25};
      std::vector<double> scaled;
      for (double r : reps) scaled.push_back(r * c);
      const auto a = Ledger::build(reg, {{"m", "dep", "bbb", 42.0}}, cell("aaa", "bbb", 1, reps), {});
      const auto b = Ledger::build(reg, {{"m", "dep", "bbb", 42.0 * c}}, cell("aaa", "bbb", 1, scaled), {});
      CHECK(std::abs(transfer_score(a, "m", "dep", "aaa", "bbb", 1).value -
                     transfer_score(b, "m", "dep", "aaa", "bbb", 1).value) <= 1e-12);
    }
  }
  SUBCASE("identity ledger scores zero everywhere") {
    SynthConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.effect_sd = 0.0;
    const auto l = synth_ledger(cfg).ledger;
    const auto m = transfer_matrix(l, "synth", "dep");
    for (std::size_t i = 0; i < m.transfers().size(); ++i)
      for (std::size_t j = 0; j < m.targets().size(); ++j) CHECK(*m.at(i, j) == 0.0);
  }
  SUBCASE("max and min credits cover every populated target") {
    SynthConfig cfg;
    cfg.n_transfer = 6;
    cfg.n_target = 9;
    cfg.missing_rate = 0.3;
    const auto l = synth_ledger(cfg).ledger;
    const auto m = transfer_matrix(l, "synth", "dep");
    const auto counts = max_min_recipient_counts(m);
    int max_total = 0;
    int min_total = 0;
    for (const auto& [lang, c] : counts) {
      max_total += c.max_count;
      min_total += c.min_count;
    }
    int populated_targets = 0;
    for (const auto& t : m.targets()) populated_targets += m.values_for(t, Axis::Target).empty() ? 0 : 1;
    CHECK(max_total == populated_targets);
    CHECK(min_total == populated_targets);
  }
  SUBCASE("ranking ignores record order") {
    SynthConfig cfg;
    cfg.n_transfer = 5;
    const auto l = synth_ledger(cfg).ledger;
    auto runs = l.runs();
    std::reverse(runs.begin(), runs.end());
    auto baselines = l.baselines();
    std::reverse(baselines.begin(), baselines.end());
    const auto shuffled = Ledger::build(l.languages(), baselines, runs, l.interactions());
    const auto a = rank_languages(transfer_matrix(l, "synth", "dep"), Axis::Transfer);
    const auto b = rank_languages(transfer_matrix(shuffled, "synth", "dep"), Axis::Transfer);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].lang == b[k].lang);
      CHECK(a[k].agg_ts == b[k].agg_ts);
    }
  }
}

TEST_CASE("matrix agrees with the brute-force oracle") {
  SynthConfig cfg;
  cfg.n_transfer = 4;
  cfg.n_target = 6;
  cfg.tasks = 2;
  cfg.missing_rate = 0.25;
  const auto l = synth_ledger(cfg).ledger;
  for (const auto& task : l.tasks("synth")) {
    const auto m = transfer_matrix(l, "synth", task);
    const auto o = oracle::matrix(l, "synth", task);
    CHECK(m.transfers() == o.transfers);
    CHECK(m.targets() == o.targets);
    for (std::size_t i = 0; i < m.transfers().size(); ++i)
      for (std::size_t j = 0; j < m.targets().size(); ++j) {
        const auto it = o.values.find({m.transfers()[i], m.targets()[j]});
        CHECK(m.at(i, j).has_value() == (it != o.values.end()));
        if (m.at(i, j) && it != o.values.end()) CHECK(*m.at(i, j) == it->second);
      }
  }
}

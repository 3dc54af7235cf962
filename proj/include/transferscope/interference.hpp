#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transferscope/ledger.hpp"

namespace transferscope {

enum class Sign { Minus, Plus };

// How a zero delta is classified. The default follows the strict "> 0" rule.
enum class TieRule { Negative, Positive };

inline Sign classify(double delta, TieRule ties = TieRule::Negative) {
  if (delta > 0.0) return Sign::Plus;
  if (delta < 0.0) return Sign::Minus;
  return ties == TieRule::Positive ? Sign::Plus : Sign::Minus;
}

inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }

// score(combo, lang) - score([lang], lang). Throws MetricError naming the
// missing record.
double interaction_delta(const Ledger& ledger, std::string_view model, std::string_view task,
                         const Combo& combo, std::string_view lang);

struct InterferenceSign {
  std::string lang;
  Combo combo;
  double delta = 0.0;
  Sign sign = Sign::Minus;
};

InterferenceSign interference_sign(const Ledger& ledger, std::string_view model,
                                   std::string_view task, const Combo& combo, std::string_view lang,
                                   TieRule ties = TieRule::Negative);

// Signs of one combo seen from language A: signs[0] belongs to A, then one
// sign per partner in canonical (iso) order.
struct ComboObservation {
  std::string task;
  std::vector<std::string> partners;
  std::vector<Sign> signs;
};

// Sign-pattern counts |+-A,+-B(,+-C)| for one language.
//
// Pattern index: bit (arity-1-k) holds the sign of member k (A is member 0,
// partners follow in canonical order), Plus = 1. For arity 2 this gives
// 0:|-A,-B| 1:|-A,+B| 2:|+A,-B| 3:|+A,+B|.
struct InterferenceCounts {
  std::string lang;
  int arity = 2;
  std::vector<int> counts;
  std::vector<ComboObservation> observations;

  int total() const;

  static InterferenceCounts from_counts(std::string lang, int arity, std::span<const int> counts);
  static std::size_t pattern_index(std::span<const Sign> signs);
  static std::string pattern_label(std::size_t index, int arity);
};

// Scope of tasks pooled into one count; nullopt pools every task of the model.
using TaskScope = std::optional<std::string>;

// Counts every combo of `arity` containing `lang` for which all members have
// both their combo score and their monolingual score. Throws MetricError when
// no combo qualifies.
InterferenceCounts pattern_counts(const Ledger& ledger, std::string_view model,
                                  const TaskScope& scope, std::string_view lang, int arity,
                                  TieRule ties = TieRule::Negative);

// x: interference the language receives; y: interference it provides.
struct ProjectionPoint {
  double x = 0.0;
  double y = 0.0;
};

// (1/C) * sum_p count(p) * q(p), q being the (+-1, +-1) quadrant of pattern p.
ProjectionPoint project_bilingual(std::span<const int> counts);
ProjectionPoint project_bilingual(const InterferenceCounts& counts);

struct TrilingualProjection {
  ProjectionPoint point;
  std::string partner;  // language plotted as B (empty when projected from raw counts)
  int third_plus = 0;
  int third_minus = 0;
  // Majority sign of the third language; a tie counts as negative.
  Sign third_sign() const { return third_plus > third_minus ? Sign::Plus : Sign::Minus; }
};

// x from A's sign, y from B's sign over the 8 patterns; C only annotates.
TrilingualProjection project_trilingual(std::span<const int> counts);
// Re-keys the observations that include `partner` so that it plays B.
TrilingualProjection project_trilingual(const InterferenceCounts& counts, std::string_view partner);

// Mean of score(combo, lang) over the combos of `arity` containing `lang`
// evaluated on `lang` (the [2A]/[3A] comparison columns; arity 1 is [1A]).
double averaged_interaction_score(const Ledger& ledger, std::string_view model,
                                  std::string_view task, std::string_view lang, int arity);

struct ScatterPoint {
  std::string lang;
  std::string task;  // "all" when pooled
  int arity = 2;
  double x = 0.0;
  double y = 0.0;
  // Empty for bilingual points; "<partner>:<third sign>" for trilingual ones.
  std::string annotation;
};

// One point per language (bilingual) or per (language, partner) pair
// (trilingual), in iso order. Languages without qualifying combos are skipped.
std::vector<ScatterPoint> interference_scatter(const Ledger& ledger, std::string_view model,
                                               const TaskScope& scope, int arity,
                                               TieRule ties = TieRule::Negative);

void write_scatter_csv(std::span<const ScatterPoint> points, std::ostream& out);
std::vector<ScatterPoint> read_scatter_csv(std::istream& in);

}  // namespace transferscope

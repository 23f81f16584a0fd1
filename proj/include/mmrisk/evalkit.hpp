#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmrisk/cohort.hpp"

namespace mmrisk {

// Input-ablation modes. `full` is the identity; the others drop exams
// before tokenization. The index exam is never dropped.
struct AblationMode {
  enum class Kind { Full, MammoOnly, NoPrior, PriorWindow };
  Kind kind = Kind::Full;
  int window_years = 0;  // 1..3, PriorWindow only

  static AblationMode full() { return {Kind::Full, 0}; }
  static AblationMode mammo_only() { return {Kind::MammoOnly, 0}; }
  static AblationMode no_prior() { return {Kind::NoPrior, 0}; }
  static AblationMode prior_window(int years);

  std::string name() const;
  static AblationMode from_name(const std::string& s);
};

// mammo_only: drops every ultrasound exam (same-day included), keeps all
//   mammography (FFDM and DBT) priors.
// no_prior: keeps only exams on the index day.
// prior_window(K): keeps priors within K*365 days of the index exam.
SequenceInput filter_sequence(const SequenceInput& seq, const AblationMode& mode);

// Evaluation tasks. Diagnosis scores the 120-day horizon over every visit
// observed at that horizon. Five-year risk scores horizon 5, excluding
// index-positive visits and negatives with less than five years follow-up.
struct EvalTask {
  enum class Kind { Diagnosis, Risk5y };
  Kind kind = Kind::Diagnosis;

  int horizon_index() const { return kind == Kind::Diagnosis ? 0 : 5; }
  std::string name() const { return kind == Kind::Diagnosis ? "diagnosis" : "risk5y"; }
  static EvalTask diagnosis() { return {Kind::Diagnosis}; }
  static EvalTask risk5y() { return {Kind::Risk5y}; }
  static EvalTask from_name(const std::string& s);

  // Whether a labeled example enters the task population, and its label.
  bool includes(const OutcomeLabel& o) const;
  int label(const OutcomeLabel& o) const { return o.targets[horizon_index()]; }
};

enum class StrataKey { None, Age, Density };
StrataKey strata_from_name(const std::string& s);

// Anything that maps a sequence to six cumulative risks: a single model,
// an ensemble, or a test oracle.
using Scorer = std::function<std::array<double, 6>(const SequenceInput&)>;

struct MetricsRow {
  std::string task;
  std::string mode;
  std::string stratum;  // "overall" or the stratum value
  int n = 0;
  int n_pos = 0;
  std::optional<double> auroc;  // absent when the stratum is single-class
  std::optional<double> auprc;
};

std::vector<MetricsRow> evaluate(const Scorer& scorer, const Dataset& data,
                                 const EvalTask& task, const AblationMode& mode,
                                 StrataKey strata = StrataKey::None);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
std::string metrics_to_json(const std::vector<MetricsRow>& rows);

}  // namespace mmrisk

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmrisk {

enum class Modality { FFDM, DBT, US };
enum class Laterality { L, R, BOTH };
enum class View { CC, MLO, US_VIEW, OTHER };
enum class AgeBucket { Under40, Age40to49, Age50to59, Age60to69, Age70Plus, Unknown };
enum class Density { A, B, C, D, Unknown };

std::string to_string(Modality m);
std::string to_string(Laterality l);
std::string to_string(View v);
std::string to_string(AgeBucket a);
std::string to_string(Density d);
Modality modality_from_string(const std::string& s);
Laterality laterality_from_string(const std::string& s);
View view_from_string(const std::string& s);
AgeBucket age_bucket_from_string(const std::string& s);
Density density_from_string(const std::string& s);

constexpr int kNumHorizons = 6;
// Horizon cut points in days from the index exam: 120 days, then whole
// years at 365 days each.
constexpr std::array<int, kNumHorizons> kHorizonCutDays = {120, 365, 730, 1095, 1460, 1825};

struct RoiFeature {
  std::vector<double> features;  // length d_m for the exam's modality
  double score = 0.0;            // detector belief, in [0,1]
  int image_index = 0;
};

struct ExamRecord {
  std::string exam_id;
  std::string patient_id;
  Modality modality = Modality::FFDM;
  int64_t exam_time_days = 0;  // days since 2000-01-01
  Laterality laterality = Laterality::BOTH;
  View view = View::CC;
  AgeBucket age_bucket = AgeBucket::Unknown;
  Density density = Density::Unknown;
  std::vector<RoiFeature> rois;
};

// The index exam plus all earlier (or same-day) exams of the same patient.
struct SequenceInput {
  ExamRecord index_exam;
  std::vector<ExamRecord> priors;  // sorted ascending by exam_time_days
};

struct OutcomeLabel {
  std::optional<int64_t> event_days;  // days from index exam to confirmed cancer
  int64_t followup_days = 0;
  std::array<int, kNumHorizons> targets{};  // cumulative: 1 iff event by cut point
  std::array<int, kNumHorizons> mask{};     // 0 iff unobserved (censored before cut)
};

struct LabeledSequence {
  SequenceInput sequence;
  OutcomeLabel outcome;
};

using Dataset = std::vector<LabeledSequence>;

// Converts raw event/follow-up times into the six cumulative targets and
// the censoring mask. A horizon with no observed event and follow-up short
// of its cut point is masked out. Rejects event_days > followup_days.
std::pair<std::array<int, kNumHorizons>, std::array<int, kNumHorizons>> build_targets(
    std::optional<int64_t> event_days, int64_t followup_days);

// Validates a sequence against the structural invariants (same patient,
// priors not after the index exam, non-empty ROI lists, expected feature
// widths per modality, scores in [0,1], sorted priors). Throws
// std::runtime_error naming the violation.
void validate_sequence(const SequenceInput& seq, const std::map<Modality, int>& feature_widths);

// One JSON object per line; see README for the schema. Load validates
// every record and reports the first failure with its line number.
Dataset load_jsonl(const std::string& path, const std::map<Modality, int>& feature_widths);
void save_jsonl(const std::string& path, const Dataset& data);

}  // namespace mmrisk

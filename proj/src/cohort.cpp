#include "mmrisk/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace mmrisk {

using nlohmann::json;

std::string to_string(Modality m) {
  switch (m) {
    case Modality::FFDM: return "FFDM";
    case Modality::DBT: return "DBT";
    case Modality::US: return "US";
  }
  return "?";
}

std::string to_string(Laterality l) {
  switch (l) {
    case Laterality::L: return "L";
    case Laterality::R: return "R";
    case Laterality::BOTH: return "BOTH";
  }
  return "?";
}

std::string to_string(View v) {
  switch (v) {
    case View::CC: return "CC";
    case View::MLO: return "MLO";
    case View::US_VIEW: return "US_VIEW";
    case View::OTHER: return "OTHER";
  }
  return "?";
}

std::string to_string(AgeBucket a) {
  switch (a) {
    case AgeBucket::Under40: return "<40";
    case AgeBucket::Age40to49: return "40-49";
    case AgeBucket::Age50to59: return "50-59";
    case AgeBucket::Age60to69: return "60-69";
    case AgeBucket::Age70Plus: return ">=70";
    case AgeBucket::Unknown: return "unknown";
  }
  return "?";
}

std::string to_string(Density d) {
  switch (d) {
    case Density::A: return "A";
    case Density::B: return "B";
    case Density::C: return "C";
    case Density::D: return "D";
    case Density::Unknown: return "unknown";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_enum(const std::string& kind, const std::string& s) {
  throw std::runtime_error("unknown " + kind + " value '" + s + "'");
}

}  // namespace

Modality modality_from_string(const std::string& s) {
  if (s == "FFDM") return Modality::FFDM;
  if (s == "DBT") return Modality::DBT;
  if (s == "US") return Modality::US;
  bad_enum("modality", s);
}

Laterality laterality_from_string(const std::string& s) {
  if (s == "L") return Laterality::L;
  if (s == "R") return Laterality::R;
  if (s == "BOTH") return Laterality::BOTH;
  bad_enum("laterality", s);
}

View view_from_string(const std::string& s) {
  if (s == "CC") return View::CC;
  if (s == "MLO") return View::MLO;
  if (s == "US_VIEW") return View::US_VIEW;
  if (s == "OTHER") return View::OTHER;
  bad_enum("view", s);
}

AgeBucket age_bucket_from_string(const std::string& s) {
  if (s == "<40") return AgeBucket::Under40;
  if (s == "40-49") return AgeBucket::Age40to49;
  if (s == "50-59") return AgeBucket::Age50to59;
  if (s == "60-69") return AgeBucket::Age60to69;
  if (s == ">=70") return AgeBucket::Age70Plus;
  if (s == "unknown") return AgeBucket::Unknown;
  bad_enum("age_bucket", s);
}

Density density_from_string(const std::string& s) {
  if (s == "A") return Density::A;
  if (s == "B") return Density::B;
  if (s == "C") return Density::C;
  if (s == "D") return Density::D;
  if (s == "unknown") return Density::Unknown;
  bad_enum("density", s);
}

std::pair<std::array<int, kNumHorizons>, std::array<int, kNumHorizons>> build_targets(
    std::optional<int64_t> event_days, int64_t followup_days) {
  if (followup_days < 0) throw std::runtime_error("build_targets: negative followup_days");
  if (event_days) {
    if (*event_days < 0) throw std::runtime_error("build_targets: negative event_days");
    if (*event_days > followup_days) {
      throw std::runtime_error("build_targets: event_days " + std::to_string(*event_days) +
                               " exceeds followup_days " + std::to_string(followup_days));
    }
  }
  std::array<int, kNumHorizons> targets{};
  std::array<int, kNumHorizons> mask{};
  for (int j = 0; j < kNumHorizons; ++j) {
    const int cut = kHorizonCutDays[j];
    if (event_days) {
      targets[j] = *event_days <= cut ? 1 : 0;
      mask[j] = 1;
    } else {
      targets[j] = 0;
      mask[j] = followup_days >= cut ? 1 : 0;
    }
  }
  return {targets, mask};
}

void validate_sequence(const SequenceInput& seq, const std::map<Modality, int>& feature_widths) {
  auto check_exam = [&](const ExamRecord& e) {
    if (e.exam_time_days < 0) {
      throw std::runtime_error("exam " + e.exam_id + ": negative exam_time_days");
    }
    if (e.rois.empty()) {
      throw std::runtime_error("exam " + e.exam_id + ": empty roi list");
    }
    const auto it = feature_widths.find(e.modality);
    if (it == feature_widths.end()) {
      throw std::runtime_error("exam " + e.exam_id + ": no configured feature width for " +
                               to_string(e.modality));
    }
    for (const auto& roi : e.rois) {
      if (static_cast<int>(roi.features.size()) != it->second) {
        throw std::runtime_error("exam " + e.exam_id + ": roi feature width " +
                                 std::to_string(roi.features.size()) + " != configured " +
                                 std::to_string(it->second) + " for " + to_string(e.modality));
      }
      if (!(roi.score >= 0.0 && roi.score <= 1.0)) {
        throw std::runtime_error("exam " + e.exam_id + ": roi score outside [0,1]");
      }
      for (double f : roi.features) {
        if (!std::isfinite(f)) {
          throw std::runtime_error("exam " + e.exam_id + ": non-finite roi feature");
        }
      }
    }
  };
  check_exam(seq.index_exam);
  int64_t prev_time = -1;
  for (const auto& p : seq.priors) {
    check_exam(p);
    if (p.patient_id != seq.index_exam.patient_id) {
      throw std::runtime_error("exam " + p.exam_id + ": patient_id differs from index exam");
    }
    if (p.exam_time_days > seq.index_exam.exam_time_days) {
      throw std::runtime_error("exam " + p.exam_id + ": prior exam_time_days " +
                               std::to_string(p.exam_time_days) + " after index exam " +
                               std::to_string(seq.index_exam.exam_time_days));
    }
    if (p.exam_time_days < prev_time) {
      throw std::runtime_error("exam " + p.exam_id + ": priors not sorted by exam_time_days");
    }
    prev_time = p.exam_time_days;
  }
}

namespace {

json roi_to_json(const RoiFeature& r) {
  return json{{"features", r.features}, {"score", r.score}, {"image_index", r.image_index}};
}

RoiFeature roi_from_json(const json& j) {
  RoiFeature r;
  r.features = j.at("features").get<std::vector<double>>();
  r.score = j.at("score").get<double>();
  r.image_index = j.at("image_index").get<int>();
  return r;
}

json exam_to_json(const ExamRecord& e) {
  json j{{"exam_id", e.exam_id},
         {"modality", to_string(e.modality)},
         {"exam_time_days", e.exam_time_days},
         {"laterality", to_string(e.laterality)},
         {"view", to_string(e.view)},
         {"age_bucket", to_string(e.age_bucket)},
         {"density", to_string(e.density)}};
  json rois = json::array();
  for (const auto& r : e.rois) rois.push_back(roi_to_json(r));
  j["rois"] = std::move(rois);
  return j;
}

ExamRecord exam_from_json(const json& j, const std::string& patient_id) {
  ExamRecord e;
  e.exam_id = j.at("exam_id").get<std::string>();
  e.patient_id = patient_id;
  e.modality = modality_from_string(j.at("modality").get<std::string>());
  e.exam_time_days = j.at("exam_time_days").get<int64_t>();
  e.laterality = laterality_from_string(j.at("laterality").get<std::string>());
  e.view = view_from_string(j.at("view").get<std::string>());
  e.age_bucket = age_bucket_from_string(j.at("age_bucket").get<std::string>());
  e.density = j.contains("density") ? density_from_string(j.at("density").get<std::string>())
                                    : Density::Unknown;
  for (const auto& rj : j.at("rois")) e.rois.push_back(roi_from_json(rj));
  return e;
}

}  // namespace

Dataset load_jsonl(const std::string& path, const std::map<Modality, int>& feature_widths) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_jsonl: cannot open " + path);
  Dataset out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      LabeledSequence rec;
      const std::string patient_id = j.at("patient_id").get<std::string>();
      rec.sequence.index_exam = exam_from_json(j.at("index_exam"), patient_id);
      if (j.contains("priors")) {
        for (const auto& pj : j.at("priors")) {
          rec.sequence.priors.push_back(exam_from_json(pj, patient_id));
        }
      }
      std::stable_sort(rec.sequence.priors.begin(), rec.sequence.priors.end(),
                       [](const ExamRecord& a, const ExamRecord& b) {
                         return a.exam_time_days < b.exam_time_days;
                       });
      const json& oj = j.at("outcome");
      rec.outcome.followup_days = oj.at("followup_days").get<int64_t>();
      if (oj.contains("event_days") && !oj.at("event_days").is_null()) {
        rec.outcome.event_days = oj.at("event_days").get<int64_t>();
      }
      auto [targets, mask] = build_targets(rec.outcome.event_days, rec.outcome.followup_days);
      rec.outcome.targets = targets;
      rec.outcome.mask = mask;
      validate_sequence(rec.sequence, feature_widths);
      out.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_jsonl(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_jsonl: cannot open " + path + " for writing");
  for (const auto& rec : data) {
    json j;
    j["patient_id"] = rec.sequence.index_exam.patient_id;
    j["index_exam"] = exam_to_json(rec.sequence.index_exam);
    json priors = json::array();
    for (const auto& p : rec.sequence.priors) priors.push_back(exam_to_json(p));
    j["priors"] = std::move(priors);
    j["outcome"] = json{{"event_days", rec.outcome.event_days
                                           ? json(*rec.outcome.event_days)
                                           : json(nullptr)},
                        {"followup_days", rec.outcome.followup_days}};
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("save_jsonl: write failure on " + path);
}

}  // namespace mmrisk

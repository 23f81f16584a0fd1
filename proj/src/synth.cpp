#include "mmrisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mmrisk/rng.hpp"
#include "mmrisk/tensor.hpp"

namespace mmrisk {

namespace {

// Hazard model: per-interval hazard sigma(alpha_j + beta * s * z).
constexpr double kHazardBeta = 1.2;
constexpr std::array<double, kNumHorizons> kHazardAlpha = {-2.20, -3.00, -2.75,
                                                           -2.75, -2.75, -2.75};

// Feature planting magnitudes (per ROI, against unit gaussian noise).
constexpr double kBaseSignal = 0.8;
constexpr double kUltrasoundSignal = 1.0;
constexpr double kTemporalSignal = 1.0;
constexpr double kTemporalNuisanceStd = 2.5;

constexpr double kSameDayDbtProb = 0.25;

struct ModalityDirections {
  std::vector<double> base;      // shared risk component
  std::vector<double> extra;     // ultrasound-only component
  std::vector<double> temporal;  // mammography change component
};

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.gaussian();
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

void orthogonalize(std::vector<double>& v, const std::vector<double>& against) {
  double dot = 0.0;
  for (size_t i = 0; i < v.size(); ++i) dot += v[i] * against[i];
  for (size_t i = 0; i < v.size(); ++i) v[i] -= dot * against[i];
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
}

std::map<Modality, ModalityDirections> draw_directions(const SynthConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, "synth.directions"));
  std::map<Modality, ModalityDirections> out;
  for (const auto& [modality, width] : cfg.feature_widths) {
    ModalityDirections d;
    d.base = random_unit(rng, width);
    d.extra = random_unit(rng, width);
    orthogonalize(d.extra, d.base);
    d.temporal = random_unit(rng, width);
    orthogonalize(d.temporal, d.base);
    orthogonalize(d.temporal, d.extra);
    out.emplace(modality, std::move(d));
  }
  return out;
}

AgeBucket draw_age(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.05) return AgeBucket::Under40;
  if (u < 0.28) return AgeBucket::Age40to49;
  if (u < 0.55) return AgeBucket::Age50to59;
  if (u < 0.80) return AgeBucket::Age60to69;
  if (u < 0.98) return AgeBucket::Age70Plus;
  return AgeBucket::Unknown;
}

Density draw_density(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.08) return Density::A;
  if (u < 0.48) return Density::B;
  if (u < 0.92) return Density::C;
  return Density::D;
}

struct PatientLatents {
  double z = 0.0;         // latent risk
  double nuisance = 0.0;  // stable tissue appearance along the temporal direction
};

ExamRecord make_exam(Rng& rng, const SynthConfig& cfg,
                     const std::map<Modality, ModalityDirections>& dirs,
                     const PatientLatents& lat, const std::string& patient_id, int exam_no,
                     Modality modality, int64_t time_days, bool index_day, View view,
                     Laterality laterality, AgeBucket age, Density density, bool add_global) {
  ExamRecord e;
  e.exam_id = patient_id + "-E" + std::to_string(exam_no);
  e.patient_id = patient_id;
  e.modality = modality;
  e.exam_time_days = time_days;
  e.laterality = laterality;
  e.view = view;
  e.age_bucket = age;
  e.density = density;

  const int width = cfg.feature_widths.at(modality);
  const auto& d = dirs.at(modality);
  const double s = cfg.signal_strength;
  const double base_amt = s * kBaseSignal * lat.z;
  const double extra_amt = modality == Modality::US ? s * kUltrasoundSignal * lat.z : 0.0;
  double temporal_amt = 0.0;
  if (modality != Modality::US) {
    temporal_amt = kTemporalNuisanceStd * lat.nuisance;
    if (index_day) temporal_amt += s * kTemporalSignal * lat.z;
  }

  auto make_roi = [&](int image_index, double score) {
    RoiFeature roi;
    roi.image_index = image_index;
    roi.score = score;
    roi.features.resize(width);
    for (int i = 0; i < width; ++i) {
      roi.features[i] = rng.gaussian() + base_amt * d.base[i] + extra_amt * d.extra[i] +
                        temporal_amt * d.temporal[i];
    }
    return roi;
  };

  const int n_images = 2;
  for (int img = 0; img < n_images; ++img) {
    const int n_rois = static_cast<int>(rng.uniform_int(8, 13));
    for (int r = 0; r < n_rois; ++r) e.rois.push_back(make_roi(img, rng.uniform()));
  }
  if (add_global) e.rois.push_back(make_roi(-1, 1.0));
  return e;
}

}  // namespace

double oracle_cumulative_risk(const SynthConfig& cfg, double z, int horizon) {
  if (horizon < 0 || horizon >= kNumHorizons) {
    throw std::invalid_argument("oracle_cumulative_risk: horizon out of range");
  }
  double survive = 1.0;
  for (int j = 0; j <= horizon; ++j) {
    survive *= 1.0 - sigmoid_scalar(kHazardAlpha[j] + kHazardBeta * cfg.signal_strength * z);
  }
  return 1.0 - survive;
}

SynthCohort generate_cohort(const SynthConfig& cfg) {
  if (cfg.n_patients <= 0) throw std::invalid_argument("generate_cohort: n_patients must be > 0");
  if (cfg.signal_strength < 0.0) {
    throw std::invalid_argument("generate_cohort: signal_strength must be >= 0");
  }
  if (cfg.ultrasound_fraction < 0.0 || cfg.ultrasound_fraction > 1.0 ||
      cfg.prior_exam_rate < 0.0 || cfg.prior_exam_rate > 1.0) {
    throw std::invalid_argument("generate_cohort: fractions must lie in [0,1]");
  }
  for (const auto& [m, w] : cfg.feature_widths) {
    if (w <= 0) throw std::invalid_argument("generate_cohort: non-positive width for " + to_string(m));
  }

  const auto dirs = draw_directions(cfg);
  SynthCohort out;
  out.data.reserve(cfg.n_patients);
  out.oracle_scores.reserve(cfg.n_patients);

  for (int pi = 0; pi < cfg.n_patients; ++pi) {
    Rng rng(mix_seed(cfg.seed, "synth.patient", static_cast<uint64_t>(pi)));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "P%06d", pi);
    const std::string patient_id = buf;

    PatientLatents lat;
    lat.z = rng.gaussian();
    lat.nuisance = rng.gaussian();

    const AgeBucket age = draw_age(rng);
    const Density density = draw_density(rng);
    // Dense breasts get supplemental ultrasound more often.
    const bool dense = density == Density::C || density == Density::D;
    const double us_prob =
        std::clamp(cfg.ultrasound_fraction + (dense ? 0.25 : -0.25), 0.02, 0.98);

    const int64_t index_time = 7300 + rng.uniform_int(0, 364);
    int exam_no = 0;

    SequenceInput seq;
    seq.index_exam = make_exam(rng, cfg, dirs, lat, patient_id, exam_no++, Modality::FFDM,
                               index_time, true, View::CC, Laterality::BOTH, age, density,
                               false);

    const bool has_us = rng.bernoulli(us_prob);
    const bool has_dbt = rng.bernoulli(kSameDayDbtProb);
    const bool has_priors = rng.bernoulli(cfg.prior_exam_rate);
    const int n_hist = has_priors ? static_cast<int>(1 + rng.uniform_int(0, 2)) : 0;

    if (has_us) {
      seq.priors.push_back(make_exam(rng, cfg, dirs, lat, patient_id, exam_no++, Modality::US,
                                     index_time, true, View::US_VIEW,
                                     rng.bernoulli(0.5) ? Laterality::L : Laterality::R, age,
                                     density, true));
    }
    if (has_dbt) {
      seq.priors.push_back(make_exam(rng, cfg, dirs, lat, patient_id, exam_no++, Modality::DBT,
                                     index_time, true, View::MLO, Laterality::BOTH, age,
                                     density, false));
    }
    for (int h = 1; h <= n_hist; ++h) {
      const int64_t t = index_time - (365 * h + rng.uniform_int(-45, 45));
      seq.priors.push_back(make_exam(rng, cfg, dirs, lat, patient_id, exam_no++, Modality::FFDM,
                                     t, false, h % 2 == 0 ? View::MLO : View::CC,
                                     Laterality::BOTH, age, density, false));
    }
    std::stable_sort(seq.priors.begin(), seq.priors.end(),
                     [](const ExamRecord& a, const ExamRecord& b) {
                       return a.exam_time_days < b.exam_time_days;
                     });

    // Event draw from the same hazards the oracle integrates.
    std::optional<int64_t> event_days;
    for (int j = 0; j < kNumHorizons; ++j) {
      const double h = sigmoid_scalar(kHazardAlpha[j] + kHazardBeta * cfg.signal_strength * lat.z);
      if (rng.uniform() < h) {
        const int64_t lo = j == 0 ? 1 : kHorizonCutDays[j - 1] + 1;
        event_days = rng.uniform_int(lo, kHorizonCutDays[j]);
        break;
      }
    }
    // Administrative censoring independent of risk; never below 150 days,
    // so the first horizon is always observed.
    const int64_t censor_days = rng.bernoulli(0.65) ? 1900 + rng.uniform_int(0, 500)
                                                    : 150 + rng.uniform_int(0, 1650);
    OutcomeLabel outcome;
    if (event_days && *event_days <= censor_days) {
      outcome.event_days = event_days;
      outcome.followup_days = *event_days;
    } else {
      outcome.event_days.reset();
      outcome.followup_days = censor_days;
    }
    auto [targets, mask] = build_targets(outcome.event_days, outcome.followup_days);
    outcome.targets = targets;
    outcome.mask = mask;

    out.data.push_back(LabeledSequence{std::move(seq), outcome});
    out.oracle_scores.push_back(oracle_cumulative_risk(cfg, lat.z, 0));
  }
  return out;
}

SplitCohort split_by_patient(const SynthCohort& cohort, double train_frac, double val_frac,
                             double test_frac, uint64_t seed) {
  const double sum = train_frac + val_frac + test_frac;
  if (std::abs(sum - 1.0) > 0.005) {
    throw std::invalid_argument("split_by_patient: fractions sum to " + std::to_string(sum) +
                                ", expected 1 within 0.005");
  }
  if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0) {
    throw std::invalid_argument("split_by_patient: negative fraction");
  }
  const size_t n = cohort.data.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, "split"));
  rng.shuffle(order);

  const size_t n_train = static_cast<size_t>(std::llround(train_frac * static_cast<double>(n)));
  const size_t n_val = static_cast<size_t>(std::llround(val_frac * static_cast<double>(n)));
  SplitCohort out;
  for (size_t i = 0; i < n; ++i) {
    SynthCohort* dst = i < n_train ? &out.train : (i < n_train + n_val ? &out.val : &out.test);
    dst->data.push_back(cohort.data[order[i]]);
    dst->oracle_scores.push_back(cohort.oracle_scores[order[i]]);
  }
  return out;
}

}  // namespace mmrisk

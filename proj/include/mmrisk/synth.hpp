#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "mmrisk/cohort.hpp"

namespace mmrisk {

// Synthetic cohort generator. It stands in for the upstream image
// detectors: every exam gets ROI feature vectors directly, with a known
// latent risk planted so the Bayes-optimal score is available in closed
// form as a recovery ceiling.
//
// Per patient, a latent risk z ~ N(0,1) drives a discrete-time hazard over
// the six horizons (coupling scaled by signal_strength, so zero signal
// means labels carry no learnable structure). The same z is planted into
// the features three ways:
//   - a base component along one fixed direction per modality, in every exam;
//   - an ultrasound-only component, visible only when ultrasound is present;
//   - a temporal component along a mammography direction, offset by a
//     patient-level nuisance so it is readable only as the change between
//     index-day and historical exams.
struct SynthConfig {
  int n_patients = 2000;
  uint64_t seed = 1234;
  std::map<Modality, int> feature_widths = {
      {Modality::FFDM, 256}, {Modality::DBT, 256}, {Modality::US, 512}};
  double signal_strength = 1.0;
  double ultrasound_fraction = 0.5;
  double prior_exam_rate = 0.7;
};

struct SynthCohort {
  Dataset data;
  // Per-sequence 120-day posterior event probability given the latent
  // risk. All horizons share this ranking, so it serves every task.
  std::vector<double> oracle_scores;
};

SynthCohort generate_cohort(const SynthConfig& cfg);

// Exact posterior P(event <= cut[horizon] | z) under the generating process.
double oracle_cumulative_risk(const SynthConfig& cfg, double z, int horizon);

// Patient-level split with disjoint patient sets, shuffled by a seed
// sub-stream. Fractions must sum to 1 within 0.005 (the reference split
// 0.871/0.039/0.089 sums to 0.999); any remainder goes to test.
struct SplitCohort {
  SynthCohort train, val, test;
};
SplitCohort split_by_patient(const SynthCohort& cohort, double train_frac, double val_frac,
                             double test_frac, uint64_t seed);

}  // namespace mmrisk

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mmrisk/cohort.hpp"
#include "mmrisk/evalkit.hpp"
#include "mmrisk/rng.hpp"
#include "mmrisk/tensor.hpp"

namespace mmrisk {

// A small MLP: ReLU between layers, none after the last. Layer count is
// configurable; the production configuration is two layers with hidden
// width equal to the output width.
struct Mlp {
  std::vector<Tensor> weights;  // (in x out) each
  std::vector<Tensor> biases;   // (1 x out) each

  static Mlp make(const std::vector<int>& widths, Rng& rng, bool requires_grad = true);
  Tensor forward(const Tensor& x) const;  // x: (n x widths.front())
  int input_width() const { return weights.front().shape()[0]; }
  int output_width() const { return weights.back().shape()[1]; }
};

constexpr int kEmbedWidth = 100;  // width of each categorical embedding row
constexpr int kNumCategoricals = 5;
constexpr int kDateBuckets = 6;  // whole years before the index exam, clamped

struct TokenizerParams {
  int d = 128;                        // shared token width
  std::map<Modality, int> d_m;        // per-modality detector feature widths
  std::map<Modality, Mlp> projection; // G: d_m -> d
  Tensor embed_date;        // (6 x 100) years-before-index, clamped to [0,5]
  Tensor embed_laterality;  // (3 x 100)
  Tensor embed_modality;    // (3 x 100)
  Tensor embed_view;        // (4 x 100)
  Tensor embed_age;         // (6 x 100)
  Mlp fusion;               // (d + 500) -> d

  static TokenizerParams init(int d, const std::map<Modality, int>& d_m, Rng& rng);
};

struct TokenMeta {
  std::string exam_id;
  Modality modality = Modality::FFDM;
  int64_t exam_time_days = 0;
};

struct TokenMatrix {
  Tensor tokens;  // (n_tokens x d)
  std::vector<TokenMeta> meta;
  int n_tokens() const { return static_cast<int>(meta.size()); }
};

// Highest-scoring ROIs, at most k. Ties break toward lower image_index,
// then input order; result sorted by descending score.
std::vector<RoiFeature> select_topk(const std::vector<RoiFeature>& rois, int k);

// Modality-specific projection into the shared width. Differentiable.
Tensor project(const Tensor& features, Modality modality, const TokenizerParams& params);

struct CategoricalTags {
  int date_bucket = 0;  // whole years before index, clamped to [0, 5]
  Laterality laterality = Laterality::BOTH;
  View view = View::CC;
  Modality modality = Modality::FFDM;
  AgeBucket age = AgeBucket::Unknown;
};

// Eq-style fusion: concat the projected row with the five embedding rows
// (width d+500) and reduce back to d through the fusion MLP.
Tensor fuse_embeddings(const Tensor& projected_row, const CategoricalTags& tags,
                       const TokenizerParams& params);

int date_bucket_for(int64_t index_time_days, int64_t exam_time_days);

// Full tokenization: ablation filter, per-image top-k, projection, fusion.
// Exams ordered by ascending time with the index exam last; within an exam
// ROIs ordered by descending score. Pure function of its arguments.
TokenMatrix tokenize(const SequenceInput& seq, const TokenizerParams& params, int k,
                     const AblationMode& ablation);

// Same, with a per-modality ROI budget.
using RoiBudget = std::function<int(Modality)>;
TokenMatrix tokenize(const SequenceInput& seq, const TokenizerParams& params,
                     const RoiBudget& budget, const AblationMode& ablation);

}  // namespace mmrisk

#include "mmrisk/tokenizer.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmrisk {

Mlp Mlp::make(const std::vector<int>& widths, Rng& rng, bool requires_grad) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
  Mlp mlp;
  for (size_t i = 0; i + 1 < widths.size(); ++i) {
    Tensor w = Tensor::zeros({widths[i], widths[i + 1]}, requires_grad);
    for (auto& v : w.raw_values()) v = rng.truncated_normal(0.02);
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Tensor::zeros({1, widths[i + 1]}, requires_grad));
  }
  return mlp;
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (size_t i = 0; i < weights.size(); ++i) {
    h = add(matmul(h, weights[i]), biases[i]);
    if (i + 1 < weights.size()) h = relu(h);
  }
  return h;
}

TokenizerParams TokenizerParams::init(int d, const std::map<Modality, int>& d_m, Rng& rng) {
  TokenizerParams p;
  p.d = d;
  p.d_m = d_m;
  for (const auto& [modality, width] : d_m) {
    p.projection.emplace(modality, Mlp::make({width, d, d}, rng));
  }
  auto table = [&](int rows) {
    Tensor t = Tensor::zeros({rows, kEmbedWidth}, true);
    for (auto& v : t.raw_values()) v = rng.truncated_normal(0.02);
    return t;
  };
  p.embed_date = table(kDateBuckets);
  p.embed_laterality = table(3);
  p.embed_modality = table(3);
  p.embed_view = table(4);
  p.embed_age = table(6);
  p.fusion = Mlp::make({d + kEmbedWidth * kNumCategoricals, d, d}, rng);
  return p;
}

std::vector<RoiFeature> select_topk(const std::vector<RoiFeature>& rois, int k) {
  if (k < 1) throw std::invalid_argument("select_topk: k must be >= 1");
  std::vector<size_t> idx(rois.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (rois[a].score != rois[b].score) return rois[a].score > rois[b].score;
    return rois[a].image_index < rois[b].image_index;
  });
  const size_t take = std::min(static_cast<size_t>(k), rois.size());
  std::vector<RoiFeature> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back(rois[idx[i]]);
  return out;
}

Tensor project(const Tensor& features, Modality modality, const TokenizerParams& params) {
  const auto it = params.projection.find(modality);
  if (it == params.projection.end()) {
    throw std::invalid_argument("project: no projection configured for " + to_string(modality));
  }
  if (features.cols() != it->second.input_width()) {
    throw std::invalid_argument("project: feature width " + std::to_string(features.cols()) +
                                " does not match configured width " +
                                std::to_string(it->second.input_width()) + " for " +
                                to_string(modality));
  }
  return it->second.forward(features);
}

int date_bucket_for(int64_t index_time_days, int64_t exam_time_days) {
  const int64_t delta = index_time_days - exam_time_days;
  const int64_t years = delta / 365;
  return static_cast<int>(std::clamp<int64_t>(years, 0, kDateBuckets - 1));
}

namespace {

Tensor embed_rows(const TokenizerParams& params, const CategoricalTags& tags, int n_rows) {
  const std::vector<int> date_idx{tags.date_bucket};
  const std::vector<int> lat_idx{static_cast<int>(tags.laterality)};
  const std::vector<int> mod_idx{static_cast<int>(tags.modality)};
  const std::vector<int> view_idx{static_cast<int>(tags.view)};
  const std::vector<int> age_idx{static_cast<int>(tags.age)};
  Tensor row = concat_cols({embedding_lookup(params.embed_date, date_idx),
                            embedding_lookup(params.embed_laterality, lat_idx),
                            embedding_lookup(params.embed_modality, mod_idx),
                            embedding_lookup(params.embed_view, view_idx),
                            embedding_lookup(params.embed_age, age_idx)});
  return n_rows == 1 ? row : repeat_rows(row, n_rows);
}

}  // namespace

Tensor fuse_embeddings(const Tensor& projected_row, const CategoricalTags& tags,
                       const TokenizerParams& params) {
  if (tags.date_bucket < 0 || tags.date_bucket >= kDateBuckets) {
    throw std::invalid_argument("fuse_embeddings: date bucket " +
                                std::to_string(tags.date_bucket) + " out of range");
  }
  if (projected_row.cols() != params.d) {
    throw std::invalid_argument("fuse_embeddings: row width " +
                                std::to_string(projected_row.cols()) + " != d = " +
                                std::to_string(params.d));
  }
  const Tensor fused_in = concat_cols({projected_row, embed_rows(params, tags, projected_row.rows())});
  return params.fusion.forward(fused_in);
}

TokenMatrix tokenize(const SequenceInput& seq, const TokenizerParams& params, int k,
                     const AblationMode& ablation) {
  return tokenize(seq, params, [k](Modality) { return k; }, ablation);
}

TokenMatrix tokenize(const SequenceInput& seq, const TokenizerParams& params,
                     const RoiBudget& budget, const AblationMode& ablation) {
  const SequenceInput filtered = filter_sequence(seq, ablation);

  // Priors are already ascending by time; the index exam goes last.
  std::vector<const ExamRecord*> exams;
  for (const auto& p : filtered.priors) exams.push_back(&p);
  exams.push_back(&filtered.index_exam);
  if (exams.empty()) throw std::runtime_error("tokenize: no retained exams");

  TokenMatrix out;
  std::vector<Tensor> exam_tokens;
  for (const ExamRecord* exam : exams) {
    // Per-image budget: group ROIs by image, keep the top k of each, then
    // order the exam's kept ROIs by descending score.
    std::map<int, std::vector<RoiFeature>> by_image;
    for (const auto& roi : exam->rois) by_image[roi.image_index].push_back(roi);
    std::vector<RoiFeature> kept;
    for (auto& [img, rois] : by_image) {
      auto top = select_topk(rois, k);
      kept.insert(kept.end(), top.begin(), top.end());
    }
    std::stable_sort(kept.begin(), kept.end(), [](const RoiFeature& a, const RoiFeature& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.image_index < b.image_index;
    });
    if (kept.empty()) continue;

    const int n = static_cast<int>(kept.size());
    const int width = static_cast<int>(kept.front().features.size());
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(n) * width);
    for (const auto& roi : kept) flat.insert(flat.end(), roi.features.begin(), roi.features.end());
    const Tensor features = Tensor::from({n, width}, std::move(flat));

    CategoricalTags tags;
    tags.date_bucket = date_bucket_for(filtered.index_exam.exam_time_days, exam->exam_time_days);
    tags.laterality = exam->laterality;
    tags.view = exam->view;
    tags.modality = exam->modality;
    tags.age = exam->age_bucket;

    const Tensor projected = project(features, exam->modality, params);
    exam_tokens.push_back(fuse_embeddings(projected, tags, params));
    for (int i = 0; i < n; ++i) {
      out.meta.push_back(TokenMeta{exam->exam_id, exam->modality, exam->exam_time_days});
    }
  }
  if (exam_tokens.empty()) throw std::runtime_error("tokenize: sequence produced no tokens");
  out.tokens = exam_tokens.size() == 1 ? exam_tokens.front() : concat_rows(exam_tokens);
  return out;
}

}  // namespace mmrisk

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mmrisk/cohort.hpp"
#include "mmrisk/encoder.hpp"
#include "mmrisk/evalkit.hpp"
#include "mmrisk/hazard.hpp"
#include "mmrisk/tokenizer.hpp"

namespace mmrisk {

struct ModelConfig {
  int d = 128;
  int n_layers = 4;
  int n_heads = 4;
  int k = 10;                        // ROI budget per image
  std::map<Modality, int> k_per_modality;  // optional overrides of k
  std::map<Modality, int> d_m = {
      {Modality::FFDM, 256}, {Modality::DBT, 256}, {Modality::US, 512}};
  double dropout = 0.1;
};

// The full risk model: projections and embeddings, the CLS transformer,
// and the additive-hazard head.
class Model {
 public:
  static Model init(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  TokenizerParams& tokenizer() { return tok_; }
  const TokenizerParams& tokenizer() const { return tok_; }
  EncoderParams& encoder() { return enc_; }
  const EncoderParams& encoder() const { return enc_; }
  HeadParams& head() { return head_; }
  const HeadParams& head() const { return head_; }

  // Canonical-path parameter registry; order and names are the checkpoint
  // contract.
  std::vector<std::pair<std::string, Tensor>> named_params() const;
  std::vector<Tensor> params() const;

  // Cumulative pre-sigmoid logits (1 x 6), graph-connected to all params.
  Tensor forward_logits(const SequenceInput& seq, const AblationMode& mode,
                        Rng* dropout_rng = nullptr) const;

  // Inference: interval scores and cumulative risks as plain values.
  HazardOutput predict(const SequenceInput& seq, const AblationMode& mode) const;
  std::array<double, 6> predict_cumulative(const SequenceInput& seq,
                                           const AblationMode& mode) const;

  int roi_budget(Modality m) const;

 private:
  ModelConfig cfg_;
  TokenizerParams tok_;
  EncoderParams enc_;
  HeadParams head_;
};

}  // namespace mmrisk

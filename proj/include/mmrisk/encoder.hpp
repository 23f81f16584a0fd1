#pragma once

#include <vector>

#include "mmrisk/rng.hpp"
#include "mmrisk/tensor.hpp"
#include "mmrisk/tokenizer.hpp"

namespace mmrisk {

// Pre-norm transformer encoder over an unordered token set plus one
// learned CLS vector. There are deliberately no positional encodings:
// token order carries no meaning (temporal structure rides in on the date
// embedding), which makes CLS output permutation invariance a real,
// testable property.
struct EncoderLayerParams {
  Tensor wq, wk, wv, wo;      // (d x d)
  Tensor bq, bk, bv, bo;      // (1 x d)
  Tensor ffn_w1, ffn_w2;      // (d x 4d), (4d x d)
  Tensor ffn_b1, ffn_b2;      // (1 x 4d), (1 x d)
  Tensor ln1_gain, ln1_bias;  // (1 x d)
  Tensor ln2_gain, ln2_bias;  // (1 x d)
};

struct EncoderParams {
  int d = 32;
  int n_layers = 2;
  int n_heads = 4;
  double dropout = 0.1;  // training only; inference paths never apply it
  std::vector<EncoderLayerParams> layers;
  Tensor cls_vector;  // (1 x d)

  static EncoderParams init(int d, int n_layers, int n_heads, double dropout, Rng& rng);
};

// Returns the CLS position of the final layer output, shape (1 x d).
// CLS is appended after the tokens; attention is full and unmasked.
// `dropout_rng` enables dropout on the residual branches; pass nullptr
// for inference.
Tensor encode(const TokenMatrix& tokens, const EncoderParams& params,
              Rng* dropout_rng = nullptr);

// The CLS-row attention distribution of one head in one layer, evaluated
// with dropout off. Length n_tokens + 1 (the trailing entry is CLS
// attending to itself); sums to 1.
std::vector<double> attention_probe(const TokenMatrix& tokens, const EncoderParams& params,
                                    int layer, int head);

}  // namespace mmrisk

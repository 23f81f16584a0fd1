#include "mmrisk/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace mmrisk {

namespace {

Tensor init_weight(int rows, int cols, Rng& rng) {
  Tensor t = Tensor::zeros({rows, cols}, true);
  for (auto& v : t.raw_values()) v = rng.truncated_normal(0.02);
  return t;
}

Tensor ones_row(int d) {
  return Tensor::from({1, d}, std::vector<double>(d, 1.0), true);
}

// Inverted dropout as a multiply by a constant mask; grads flow to x only.
Tensor apply_dropout(const Tensor& x, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return x;
  std::vector<double> mask(x.size());
  const double keep = 1.0 - rate;
  for (auto& m : mask) m = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return mul(x, Tensor::from(x.shape(), std::move(mask)));
}

struct AttentionResult {
  Tensor output;                    // (n x d) after the output projection
  std::vector<Tensor> head_probs;   // per-head (n x n) attention rows
};

AttentionResult self_attention(const Tensor& x, const EncoderLayerParams& lp, int n_heads) {
  const int d = x.cols();
  const int head_dim = d / n_heads;
  const Tensor q = add(matmul(x, lp.wq), lp.bq);
  const Tensor k = add(matmul(x, lp.wk), lp.bk);
  const Tensor v = add(matmul(x, lp.wv), lp.bv);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

  AttentionResult res;
  std::vector<Tensor> contexts;
  for (int h = 0; h < n_heads; ++h) {
    const Tensor qh = slice_cols(q, h * head_dim, head_dim);
    const Tensor kh = slice_cols(k, h * head_dim, head_dim);
    const Tensor vh = slice_cols(v, h * head_dim, head_dim);
    const Tensor probs = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt));
    contexts.push_back(matmul(probs, vh));
    res.head_probs.push_back(probs);
  }
  res.output = add(matmul(concat_cols(contexts), lp.wo), lp.bo);
  return res;
}

Tensor layer_norm_affine(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  return add(mul(layer_norm_rows(x), gain), bias);
}

}  // namespace

EncoderParams EncoderParams::init(int d, int n_layers, int n_heads, double dropout, Rng& rng) {
  if (d <= 0 || n_heads <= 0 || n_layers < 0) {
    throw std::invalid_argument("encoder: invalid dimensions");
  }
  if (d % n_heads != 0) {
    throw std::invalid_argument("encoder: d = " + std::to_string(d) +
                                " not divisible by n_heads = " + std::to_string(n_heads));
  }
  EncoderParams p;
  p.d = d;
  p.n_layers = n_layers;
  p.n_heads = n_heads;
  p.dropout = dropout;
  for (int l = 0; l < n_layers; ++l) {
    EncoderLayerParams lp;
    lp.wq = init_weight(d, d, rng);
    lp.wk = init_weight(d, d, rng);
    lp.wv = init_weight(d, d, rng);
    lp.wo = init_weight(d, d, rng);
    lp.bq = Tensor::zeros({1, d}, true);
    lp.bk = Tensor::zeros({1, d}, true);
    lp.bv = Tensor::zeros({1, d}, true);
    lp.bo = Tensor::zeros({1, d}, true);
    lp.ffn_w1 = init_weight(d, 4 * d, rng);
    lp.ffn_b1 = Tensor::zeros({1, 4 * d}, true);
    lp.ffn_w2 = init_weight(4 * d, d, rng);
    lp.ffn_b2 = Tensor::zeros({1, d}, true);
    lp.ln1_gain = ones_row(d);
    lp.ln1_bias = Tensor::zeros({1, d}, true);
    lp.ln2_gain = ones_row(d);
    lp.ln2_bias = Tensor::zeros({1, d}, true);
    p.layers.push_back(std::move(lp));
  }
  p.cls_vector = init_weight(1, d, rng);
  return p;
}

Tensor encode(const TokenMatrix& tokens, const EncoderParams& params, Rng* dropout_rng) {
  if (tokens.n_tokens() < 1) throw std::invalid_argument("encode: need at least one token");
  if (tokens.tokens.cols() != params.d) {
    throw std::invalid_argument("encode: token width " + std::to_string(tokens.tokens.cols()) +
                                " != encoder width " + std::to_string(params.d));
  }
  Tensor x = concat_rows({tokens.tokens, params.cls_vector});
  for (const auto& lp : params.layers) {
    const Tensor h1 = layer_norm_affine(x, lp.ln1_gain, lp.ln1_bias);
    Tensor attn = self_attention(h1, lp, params.n_heads).output;
    attn = apply_dropout(attn, params.dropout, dropout_rng);
    x = add(x, attn);
    const Tensor h2 = layer_norm_affine(x, lp.ln2_gain, lp.ln2_bias);
    Tensor ffn = add(matmul(relu(add(matmul(h2, lp.ffn_w1), lp.ffn_b1)), lp.ffn_w2), lp.ffn_b2);
    ffn = apply_dropout(ffn, params.dropout, dropout_rng);
    x = add(x, ffn);
  }
  return slice_rows(x, tokens.n_tokens(), 1);
}

std::vector<double> attention_probe(const TokenMatrix& tokens, const EncoderParams& params,
                                    int layer, int head) {
  if (layer < 0 || layer >= params.n_layers) {
    throw std::invalid_argument("attention_probe: layer " + std::to_string(layer) +
                                " out of range [0, " + std::to_string(params.n_layers) + ")");
  }
  if (head < 0 || head >= params.n_heads) {
    throw std::invalid_argument("attention_probe: head " + std::to_string(head) +
                                " out of range [0, " + std::to_string(params.n_heads) + ")");
  }
  Tensor x = concat_rows({tokens.tokens, params.cls_vector});
  for (int l = 0; l <= layer; ++l) {
    const auto& lp = params.layers[l];
    const Tensor h1 = layer_norm_affine(x, lp.ln1_gain, lp.ln1_bias);
    AttentionResult res = self_attention(h1, lp, params.n_heads);
    if (l == layer) {
      const Tensor& probs = res.head_probs[head];
      const int n = probs.rows();
      std::vector<double> cls_row(probs.values().end() - n, probs.values().end());
      return cls_row;
    }
    x = add(x, res.output);
    const Tensor h2 = layer_norm_affine(x, lp.ln2_gain, lp.ln2_bias);
    const Tensor ffn =
        add(matmul(relu(add(matmul(h2, lp.ffn_w1), lp.ffn_b1)), lp.ffn_w2), lp.ffn_b2);
    x = add(x, ffn);
  }
  throw std::logic_error("attention_probe: unreachable");
}

}  // namespace mmrisk

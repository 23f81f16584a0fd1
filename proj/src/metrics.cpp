#include "mmrisk/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mmrisk {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("metric: scores and labels differ in length");
  }
  if (scores.empty()) throw std::invalid_argument("metric: empty input");
}

std::pair<int64_t, int64_t> count_classes(const std::vector<int>& labels) {
  int64_t pos = 0;
  for (int l : labels) pos += l != 0;
  return {pos, static_cast<int64_t>(labels.size()) - pos};
}

std::vector<size_t> order_by_score(const std::vector<double>& scores, bool descending) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return idx;
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_inputs(scores, labels);
  const auto [npos, nneg] = count_classes(labels);
  if (npos == 0 || nneg == 0) throw std::invalid_argument("auroc: degenerate label set");

  const auto idx = order_by_score(scores, false);
  const size_t n = idx.size();
  // Averaged tie ranks are multiples of 1/2, so the rank sum is exact in
  // double and the result is a single correctly rounded division.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]] != 0) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double u = pos_rank_sum -
                   static_cast<double>(npos) * (static_cast<double>(npos) + 1.0) / 2.0;
  return u / (static_cast<double>(npos) * static_cast<double>(nneg));
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_inputs(scores, labels);
  const auto [npos, nneg] = count_classes(labels);
  (void)nneg;
  if (npos == 0) throw std::invalid_argument("auprc: no positive labels");

  const auto idx = order_by_score(scores, true);
  const size_t n = idx.size();
  double ap = 0.0;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    int64_t tp_g = 0, fp_g = 0;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      labels[idx[j]] != 0 ? ++tp_g : ++fp_g;
      ++j;
    }
    if (tp_g > 0) {
      const double precision = static_cast<double>(tp + tp_g) /
                               static_cast<double>(tp + tp_g + fp + fp_g);
      const double recall_step = static_cast<double>(tp_g) / static_cast<double>(npos);
      ap += precision * recall_step;
    }
    tp += tp_g;
    fp += fp_g;
    i = j;
  }
  return ap;
}

std::vector<CurvePoint> roc_curve(const std::vector<double>& scores,
                                  const std::vector<int>& labels) {
  check_inputs(scores, labels);
  const auto [npos, nneg] = count_classes(labels);
  if (npos == 0 || nneg == 0) throw std::invalid_argument("roc_curve: degenerate label set");
  const auto idx = order_by_score(scores, true);
  std::vector<CurvePoint> pts{{0.0, 0.0}};
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      labels[idx[j]] != 0 ? ++tp : ++fp;
      ++j;
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(nneg),
                   static_cast<double>(tp) / static_cast<double>(npos)});
    i = j;
  }
  return pts;
}

std::vector<CurvePoint> pr_curve(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  check_inputs(scores, labels);
  const auto [npos, nneg] = count_classes(labels);
  (void)nneg;
  if (npos == 0) throw std::invalid_argument("pr_curve: no positive labels");
  const auto idx = order_by_score(scores, true);
  std::vector<CurvePoint> pts;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      labels[idx[j]] != 0 ? ++tp : ++fp;
      ++j;
    }
    pts.push_back({static_cast<double>(tp) / static_cast<double>(npos),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
    i = j;
  }
  return pts;
}

}  // namespace mmrisk

#pragma once

#include <vector>

namespace mmrisk {

// AUROC as the normalized Mann-Whitney statistic:
//   P(score+ > score-) + 0.5 * P(score+ == score-),
// computed by sort-and-rank with averaged tie ranks. Requires at least one
// positive and one negative; otherwise throws ("degenerate label set").
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Average precision: sum over descending-score threshold groups of
// (recall step) x (precision at that threshold), ties grouped. Requires at
// least one positive.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

struct CurvePoint {
  double x = 0.0;  // FPR for ROC, recall for PR
  double y = 0.0;  // TPR for ROC, precision for PR
};
std::vector<CurvePoint> roc_curve(const std::vector<double>& scores,
                                  const std::vector<int>& labels);
std::vector<CurvePoint> pr_curve(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

}  // namespace mmrisk

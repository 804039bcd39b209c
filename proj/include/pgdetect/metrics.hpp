#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pgd {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Predicts positive iff score >= threshold.
Confusion confusion_at(std::span<const double> scores, std::span<const int> labels,
                       double threshold = 0.5);

struct AccuracyF1 {
  double accuracy = 0.0;
  double f1 = 0.0;
};

/// f1 is 1 when tp = fp = fn = 0 and 0 when tp = 0 otherwise.
AccuracyF1 accuracy_f1(const Confusion& c);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

struct Curve {
  double auc = 0.0;
  std::vector<CurvePoint> points;
};

/// (fpr, tpr) at every distinct threshold, from (0,0) to (1,1). Tied scores
/// move as one group, so the trapezoid area equals P(s+ > s-) + P(s+ = s-)/2.
/// Throws when either class is absent.
Curve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// (recall, precision) at every distinct threshold, listed from the lowest
/// threshold (recall 1) down to the highest, then the anchor (0, 1).
/// Area is the trapezoid rule over recall. Throws when no label is positive.
Curve pr_curve(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  double threshold = 0.5;
  Confusion confusion;
  std::vector<CurvePoint> roc_points;
  std::vector<CurvePoint> pr_points;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold = 0.5);

/// "fpr,tpr" or "recall,precision" CSV body with the given header line.
std::string curve_csv(const std::vector<CurvePoint>& points, const std::string& header);

}  // namespace pgd

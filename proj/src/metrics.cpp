#include "pgdetect/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pgdetect/dataset.hpp"

namespace pgd {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels, const char* who) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(scores.size()) +
                                " scores for " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
}

struct Group {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

// Distinct scores in descending order with per-score class counts.
std::vector<Group> tie_groups(std::span<const double> scores, std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Group> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (k == 0 || scores[i] != scores[order[k - 1]]) groups.emplace_back();
    (labels[i] == 1 ? groups.back().pos : groups.back().neg) += 1;
  }
  return groups;
}

double trapezoid(const std::vector<CurvePoint>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].x - pts[i - 1].x) * (pts[i].y + pts[i - 1].y) / 2.0;
  }
  return area;
}

}  // namespace

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels,
                       double threshold) {
  check_lengths(scores, labels, "confusion_at");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

AccuracyF1 accuracy_f1(const Confusion& c) {
  if (c.total() == 0) throw std::invalid_argument("accuracy_f1: empty confusion matrix");
  AccuracyF1 out;
  out.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp == 0) {
    out.f1 = (c.fp == 0 && c.fn == 0) ? 1.0 : 0.0;
  } else {
    // Harmonic mean of precision and recall, written without the intermediate ratios.
    out.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
  }
  return out;
}

Curve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels, "roc_curve");
  const auto groups = tie_groups(scores, labels);
  std::size_t total_pos = 0, total_neg = 0;
  for (const auto& g : groups) {
    total_pos += g.pos;
    total_neg += g.neg;
  }
  if (total_pos == 0) throw std::invalid_argument("roc_curve: no positive labels");
  if (total_neg == 0) throw std::invalid_argument("roc_curve: no negative labels");
  Curve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(total_neg),
                            static_cast<double>(tp) / static_cast<double>(total_pos)});
  }
  curve.auc = trapezoid(curve.points);
  return curve;
}

Curve pr_curve(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels, "pr_curve");
  const auto groups = tie_groups(scores, labels);
  std::size_t total_pos = 0;
  for (const auto& g : groups) total_pos += g.pos;
  if (total_pos == 0) throw std::invalid_argument("pr_curve: no positive labels");
  // Built from the highest threshold down, then reversed.
  std::vector<CurvePoint> pts{{0.0, 1.0}};
  std::size_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    pts.push_back({static_cast<double>(tp) / static_cast<double>(total_pos),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  Curve curve;
  curve.auc = trapezoid(pts);
  curve.points.assign(pts.rbegin(), pts.rend());
  return curve;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.confusion = confusion_at(scores, labels, threshold);
  const auto af = accuracy_f1(r.confusion);
  r.accuracy = af.accuracy;
  r.f1 = af.f1;
  auto roc = roc_curve(scores, labels);
  auto pr = pr_curve(scores, labels);
  r.roc_auc = roc.auc;
  r.pr_auc = pr.auc;
  r.roc_points = std::move(roc.points);
  r.pr_points = std::move(pr.points);
  return r;
}

std::string curve_csv(const std::vector<CurvePoint>& points, const std::string& header) {
  std::string out = header + "\n";
  for (const auto& p : points) out += format_double(p.x) + "," + format_double(p.y) + "\n";
  return out;
}

}  // namespace pgd

// sdl/metrics.hpp

#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdl/dense_matrix.hpp"

namespace sdl {

struct EvalSummary {
  double accuracy = 0.0;
  double f_score = 0.0;  // binary F w.r.t. the declared positive class
  double f_macro = 0.0;  // one-vs-rest macro average over all classes
  double recon_rel = 0.0;
  DenseMatrix confusion;  // rows: truth, cols: predicted
};

// Normalized reconstruction error |X - W H|_F^2 / |X|_F^2.
inline double relative_recon(const DenseMatrix &x, const DenseMatrix &w,
                             const DenseMatrix &h) {
  if (w.rows() != x.rows() || h.cols() != x.cols() || w.cols() != h.rows())
    throw std::invalid_argument("relative_recon: shape mismatch");
  const double denom = frobenius_norm(x);
  if (denom == 0.0)
    throw std::invalid_argument("relative_recon: zero data matrix");
  const double num = frobenius_norm(x - matmul(w, h));
  return (num * num) / (denom * denom);
}

namespace detail {

inline double f_for_class(const DenseMatrix &confusion, std::size_t cls) {
  double tp = confusion(cls, cls);
  double fp = 0.0, fn = 0.0;
  for (std::size_t t = 0; t < confusion.rows(); ++t)
    if (t != cls) fp += confusion(t, cls);
  for (std::size_t c = 0; c < confusion.cols(); ++c)
    if (c != cls) fn += confusion(cls, c);
  if (tp + fp == 0.0 || tp + fn == 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

// Accuracy, F-scores and the confusion matrix for integer labels in
// {0, ..., kappa}. Undefined precision or recall (zero denominator) yields
// F = 0.
inline EvalSummary classification_metrics(const std::vector<int> &pred,
                                          const std::vector<int> &truth,
                                          int positive) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("classification_metrics: length mismatch");
  if (pred.empty())
    throw std::invalid_argument("classification_metrics: empty label lists");
  int max_label = positive;
  for (int v : pred) max_label = std::max(max_label, v);
  for (int v : truth) max_label = std::max(max_label, v);
  for (int v : pred)
    if (v < 0) throw std::invalid_argument("classification_metrics: negative label");
  for (int v : truth)
    if (v < 0) throw std::invalid_argument("classification_metrics: negative label");
  if (positive < 0)
    throw std::invalid_argument("classification_metrics: negative positive class");
  const std::size_t classes = static_cast<std::size_t>(max_label) + 1;
  EvalSummary out;
  out.confusion = DenseMatrix(classes, classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.confusion(static_cast<std::size_t>(truth[i]),
                  static_cast<std::size_t>(pred[i])) += 1.0;
    if (pred[i] == truth[i]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
  out.f_score =
      detail::f_for_class(out.confusion, static_cast<std::size_t>(positive));
  double acc = 0.0;
  for (std::size_t c = 0; c < classes; ++c)
    acc += detail::f_for_class(out.confusion, c);
  out.f_macro = acc / static_cast<double>(classes);
  return out;
}

}  // namespace sdl

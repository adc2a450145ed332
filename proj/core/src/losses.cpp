#include "seld3d/losses.hpp"

#include <algorithm>
#include <cmath>

#include "seld3d/errors.hpp"

namespace seld3d {

LossValueGrad sed_bce(const TensorD& pred, const TensorD& truth) {
  if (!pred.same_shape(truth) || pred.rank() != 2) {
    throw ShapeMismatchError("sed_bce: pred and truth must share a {T, C} shape");
  }
  const double scale = 1.0 / static_cast<double>(pred.size());
  LossValueGrad out;
  out.grad = TensorD(pred.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = truth[i];
    const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    const bool saturated = pred[i] < kBceClamp || pred[i] > 1.0 - kBceClamp;
    out.grad[i] = saturated ? 0.0 : scale * ((1.0 - y) / (1.0 - p) - y / p);
  }
  out.value = scale * sum;
  return out;
}

LossValueGrad sce_masked_mse(const TensorD& pred, const TensorD& truth,
                             const TensorD& activity) {
  if (!pred.same_shape(truth) || pred.rank() != 3 || pred.dim(2) != 3) {
    throw ShapeMismatchError("sce_masked_mse: pred and truth must share a {T, C, 3} shape");
  }
  if (activity.rank() != 2 || activity.dim(0) != pred.dim(0) ||
      activity.dim(1) != pred.dim(1)) {
    throw ShapeMismatchError("sce_masked_mse: activity must be {T, C}");
  }
  const std::size_t t_frames = pred.dim(0);
  const std::size_t classes = pred.dim(1);
  const double scale = 1.0 / static_cast<double>(t_frames * classes);

  LossValueGrad out;
  out.grad = TensorD(pred.shape());
  double sum = 0.0;
  for (std::size_t t = 0; t < t_frames; ++t) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double m = activity(t, c);
      if (m == 0.0) continue;
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = (pred(t, c, k) - truth(t, c, k)) * m;
        sum += d * d;
        out.grad(t, c, k) = scale * 2.0 * d * m;
      }
    }
  }
  out.value = scale * sum;
  return out;
}

LossBreakdown total_loss(double sed_loss, double sce_loss, double sed_weight,
                         double sce_weight) {
  LossBreakdown b;
  b.sed_loss = sed_loss;
  b.sce_loss = sce_loss;
  b.sed_weight = sed_weight;
  b.sce_weight = sce_weight;
  b.total = sed_weight * sed_loss + sce_weight * sce_loss;
  return b;
}

SeldLoss seld_loss(const TensorD& pred_sed, const TensorD& pred_sce,
                   const TensorD& activity, const TensorD& targets,
                   double sed_weight, double sce_weight) {
  LossValueGrad bce = sed_bce(pred_sed, activity);
  LossValueGrad mse = sce_masked_mse(pred_sce, targets, activity);
  SeldLoss out;
  out.breakdown = total_loss(bce.value, mse.value, sed_weight, sce_weight);
  out.sed_grad = std::move(bce.grad);
  out.sce_grad = std::move(mse.grad);
  for (double& g : out.sed_grad.values()) g *= sed_weight;
  for (double& g : out.sce_grad.values()) g *= sce_weight;
  return out;
}

}  // namespace seld3d

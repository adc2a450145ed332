#pragma once

#include "seld3d/tensor.hpp"

namespace seld3d {

inline constexpr double kBceClamp = 1e-7;
inline constexpr double kSedWeight = 1.0;
inline constexpr double kSceWeight = 2.0;

struct LossBreakdown {
  double total = 0.0;
  double sed_loss = 0.0;
  double sce_loss = 0.0;
  double sed_weight = kSedWeight;
  double sce_weight = kSceWeight;
};

struct LossValueGrad {
  double value = 0.0;
  TensorD grad;  // same shape as the prediction
};

/// Binary cross-entropy over a {T, C} activity grid, averaged by 1/(T*C).
/// Predictions are clamped to [1e-7, 1 - 1e-7]; saturated entries get zero
/// gradient. Throws ShapeMismatchError when shapes disagree.
LossValueGrad sed_bce(const TensorD& pred, const TensorD& truth);

/// Activity-masked squared error over {T, C, 3} coordinate grids:
/// (1/(T*C)) * sum_{t,c} ||(pred - truth) * activity[t,c]||^2. Inactive
/// classes contribute exactly zero value and gradient.
LossValueGrad sce_masked_mse(const TensorD& pred, const TensorD& truth,
                             const TensorD& activity);

/// total = sed_weight * sed_loss + sce_weight * sce_loss.
LossBreakdown total_loss(double sed_loss, double sce_loss,
                         double sed_weight = kSedWeight,
                         double sce_weight = kSceWeight);

struct SeldLoss {
  LossBreakdown breakdown;
  TensorD sed_grad;  // d total / d pred_sed, weights folded in
  TensorD sce_grad;  // d total / d pred_sce
};

/// Combined objective plus gradients of the weighted total.
SeldLoss seld_loss(const TensorD& pred_sed, const TensorD& pred_sce,
                   const TensorD& activity, const TensorD& targets,
                   double sed_weight = kSedWeight, double sce_weight = kSceWeight);

}  // namespace seld3d

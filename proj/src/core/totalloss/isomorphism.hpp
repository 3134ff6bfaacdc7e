#pragma once

#include <numbers>
#include <span>
#include <utility>

#include "totalloss/aggregators.hpp"
#include "totalloss/loss_core.hpp"
#include "totalloss/verdict.hpp"

namespace totalloss {

// Natural base unless stated otherwise; the base is carried on the vector.
inline constexpr double kNaturalBase = std::numbers::e;

// Element-wise log_b. Any loss <= 0 raises NonPositiveLoss listing every
// offending index; for APE losses that is exactly the GMAPE degeneracy.
LossVector to_log_domain(const LossVector& losses, double base = kNaturalBase);

// Inverse of to_log_domain. `base` must match the recorded base.
LossVector to_exp_domain(const LossVector& log_losses, double base = kNaturalBase);

struct ShiftResult {
  LossVector losses;
  double k = 0.0;
};

// Adds k = margin - min when min <= 0 so every loss ends up >= margin.
ShiftResult shift_positive(const LossVector& losses, double margin = 1.0);

// Compares every pair of sets two ways: by multiplicative total and by the
// additive total of their log-domain images. Pass iff the orders agree.
AxiomVerdict check_rank_preservation(std::span<const LossVector> loss_sets, double base = kNaturalBase);

}  // namespace totalloss

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "totalloss/verdict.hpp"

namespace totalloss {

enum class LossKind {
  AbsoluteError,
  SquaredError,
  AbsolutePercentageError,
  SquaredPercentageError,
};

enum class ZeroActualPolicy { Skip, Error };

struct IndividualLossSpec {
  LossKind kind = LossKind::AbsolutePercentageError;
  ZeroActualPolicy zero_actual_policy = ZeroActualPolicy::Skip;

  bool is_percentage() const noexcept {
    return kind == LossKind::AbsolutePercentageError || kind == LossKind::SquaredPercentageError;
  }
};

// "ae", "se", "ape", "spe".
std::string_view to_string(LossKind kind) noexcept;
LossKind parse_loss_kind(std::string_view text);
ZeroActualPolicy parse_zero_actual_policy(std::string_view text);

// A point of the nonnegative quadrant. Construction validates.
class PredictionPair {
 public:
  PredictionPair(double prediction, double actual);

  double prediction() const noexcept { return prediction_; }
  double actual() const noexcept { return actual_; }

 private:
  double prediction_;
  double actual_;
};

struct PredictionRecord {
  std::string unit_id;
  double actual = 0.0;
  double prediction = 0.0;
};

enum class DomainTag { RawLoss, LogLoss };

struct LossVector {
  std::vector<double> losses;
  std::vector<std::string> skipped_units;
  IndividualLossSpec source_spec;
  DomainTag tag = DomainTag::RawLoss;
  double log_base = 0.0;  // set when tag == LogLoss
  double shift_k = 0.0;   // constant added before logging, if any

  std::size_t size() const noexcept { return losses.size(); }
  std::span<const double> view() const noexcept { return losses; }
};

double eval_loss(const IndividualLossSpec& spec, const PredictionPair& pair);

// Losses in input order. Units with actual = 0 under a percentage loss are
// moved to skipped_units when the policy is Skip.
LossVector eval_loss_vector(const IndividualLossSpec& spec,
                            std::span<const PredictionRecord> records);

using LossFunction = std::function<double(double prediction, double actual)>;

// Strict increase of the loss moving away from `actual` along adjacent grid
// points on the same side. The grid is sorted and deduplicated first.
AxiomVerdict check_pointwise_monotonicity(const LossFunction& loss, double actual,
                                          std::span<const double> grid);
AxiomVerdict check_pointwise_monotonicity(const IndividualLossSpec& spec, double actual,
                                          std::span<const double> grid);

}  // namespace totalloss

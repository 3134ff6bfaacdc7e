#include "totalloss/loss_core.hpp"

#include <algorithm>
#include <cmath>

#include "totalloss/error.hpp"

namespace totalloss {

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::AbsoluteError: return "ae";
    case LossKind::SquaredError: return "se";
    case LossKind::AbsolutePercentageError: return "ape";
    case LossKind::SquaredPercentageError: return "spe";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "ae") return LossKind::AbsoluteError;
  if (text == "se") return LossKind::SquaredError;
  if (text == "ape") return LossKind::AbsolutePercentageError;
  if (text == "spe") return LossKind::SquaredPercentageError;
  throw Error(ErrorCode::SpecSyntax, "unknown loss kind '" + std::string(text) + "' (expected ae|se|ape|spe)");
}

ZeroActualPolicy parse_zero_actual_policy(std::string_view text) {
  if (text == "skip") return ZeroActualPolicy::Skip;
  if (text == "error") return ZeroActualPolicy::Error;
  throw Error(ErrorCode::SpecSyntax, "unknown zero-actual policy '" + std::string(text) + "' (expected skip|error)");
}

PredictionPair::PredictionPair(double prediction, double actual)
    : prediction_(prediction), actual_(actual) {
  if (!std::isfinite(prediction) || !std::isfinite(actual)) {
    throw Error(ErrorCode::NonFiniteInput, "prediction and actual must be finite");
  }
  if (prediction < 0.0 || actual < 0.0) {
    throw Error(ErrorCode::NegativeInput, "prediction and actual must be nonnegative");
  }
}

double eval_loss(const IndividualLossSpec& spec, const PredictionPair& pair) {
  const double p = pair.prediction();
  const double a = pair.actual();
  // A single pair cannot be skipped; Skip only has meaning over a vector.
  if (spec.is_percentage() && a == 0.0) {
    throw Error(ErrorCode::ZeroActual, "percentage loss is undefined for actual = 0");
  }
  double loss = 0.0;
  switch (spec.kind) {
    case LossKind::AbsoluteError:
      loss = std::abs(p - a);
      break;
    case LossKind::SquaredError: {
      const double d = p - a;
      loss = d * d;
      break;
    }
    case LossKind::AbsolutePercentageError:
      loss = 100.0 * std::abs(p - a) / a;
      break;
    case LossKind::SquaredPercentageError: {
      const double r = 100.0 * (p - a) / a;
      loss = r * r;
      break;
    }
  }
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::NonFiniteInput, "loss overflows a double");
  }
  return loss;
}

LossVector eval_loss_vector(const IndividualLossSpec& spec,
                            std::span<const PredictionRecord> records) {
  LossVector out;
  out.source_spec = spec;
  out.losses.reserve(records.size());
  for (const auto& record : records) {
    const PredictionPair pair(record.prediction, record.actual);
    if (spec.is_percentage() && pair.actual() == 0.0 &&
        spec.zero_actual_policy == ZeroActualPolicy::Skip) {
      out.skipped_units.push_back(record.unit_id);
      continue;
    }
    out.losses.push_back(eval_loss(spec, pair));
  }
  if (out.losses.empty()) {
    throw Error(ErrorCode::EmptyAfterFiltering, "no units left to evaluate");
  }
  return out;
}

namespace {

std::vector<double> sorted_unique_grid(std::span<const double> grid) {
  std::vector<double> points(grid.begin(), grid.end());
  for (double x : points) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "grid point is not finite");
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) {
    throw Error(ErrorCode::DegenerateGrid, "grid needs at least 3 distinct points");
  }
  return points;
}

}  // namespace

AxiomVerdict check_pointwise_monotonicity(const LossFunction& loss, double actual,
                                          std::span<const double> grid) {
  const auto points = sorted_unique_grid(grid);
  AxiomVerdict verdict;
  verdict.axiom = Axiom::PointwiseMonotonicity;
  verdict.subject = "custom";

  auto fail = [&](double nearer, double farther, double l_near, double l_far) {
    Counterexample ce;
    ce.actual = actual;
    ce.input = {nearer};
    ce.perturbed = {farther};
    ce.input_total.value = ExtendedValue::of(l_near);
    ce.perturbed_total.value = ExtendedValue::of(l_far);
    ce.note = "loss did not increase moving away from the actual value";
    verdict.status = VerdictStatus::Fail;
    verdict.counterexample = std::move(ce);
  };

  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const double lo = points[j];
    const double hi = points[j + 1];
    if (hi <= actual) {
      // lo < hi <= actual: lo is farther away.
      ++verdict.trials;
      const double l_far = loss(lo, actual);
      const double l_near = loss(hi, actual);
      if (!(l_far > l_near)) {
        fail(hi, lo, l_near, l_far);
        return verdict;
      }
    } else if (lo >= actual) {
      ++verdict.trials;
      const double l_near = loss(lo, actual);
      const double l_far = loss(hi, actual);
      if (!(l_far > l_near)) {
        fail(lo, hi, l_near, l_far);
        return verdict;
      }
    }
  }
  return verdict;
}

AxiomVerdict check_pointwise_monotonicity(const IndividualLossSpec& spec, double actual,
                                          std::span<const double> grid) {
  const LossFunction fn = [&spec](double p, double a) {
    return eval_loss(spec, PredictionPair(p, a));
  };
  auto verdict = check_pointwise_monotonicity(fn, actual, grid);
  verdict.subject = std::string(to_string(spec.kind));
  if (verdict.counterexample) verdict.counterexample->loss_spec = verdict.subject;
  return verdict;
}

}  // namespace totalloss

#include "totalloss/axiom_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "totalloss/error.hpp"
#include "totalloss/isomorphism.hpp"
#include "totalloss/numeric_text.hpp"
#include "totalloss/random.hpp"

namespace totalloss {

Perturbation Perturbation::delta(std::size_t index, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
  return {index, delta, Kind::Delta};
}

Perturbation Perturbation::epsilon_below_max(std::span<const double> losses, std::size_t index, double fraction) {
  if (index >= losses.size()) throw Error(ErrorCode::InvalidArgument, "perturbation index out of range");
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidArgument, "fraction must lie in (0, 1)");
  const double top = *std::max_element(losses.begin(), losses.end());
  const double gap = top - losses[index];
  if (!(gap > 0.0)) throw Error(ErrorCode::NoNonMaximalLoss, "loss at index is already the maximum");
  return {index, fraction * gap, Kind::Epsilon};
}

std::vector<double> Perturbation::apply(std::span<const double> losses) const {
  if (index >= losses.size()) throw Error(ErrorCode::InvalidArgument, "perturbation index out of range");
  if (!(amount > 0.0)) throw Error(ErrorCode::InvalidArgument, "perturbation amount must be > 0");
  std::vector<double> out(losses.begin(), losses.end());
  out[index] += amount;
  if (kind == Kind::Epsilon) {
    const double top = *std::max_element(losses.begin(), losses.end());
    if (!(out[index] < top)) {
      throw Error(ErrorCode::InvalidArgument, "epsilon perturbation must stay below the maximum");
    }
  }
  return out;
}

namespace {

AggregateFn bind(const AggregatorSpec& spec) {
  return [spec](std::span<const double> losses) { return aggregate(spec, losses); };
}

std::size_t factorial_capped(std::size_t n, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    f *= i;
    if (f > cap) return cap + 1;
  }
  return f;
}

Counterexample make_pair_ce(const std::string& subject, std::span<const double> input,
                            std::vector<double> perturbed, const TotalLossResult& before,
                            const TotalLossResult& after) {
  Counterexample ce;
  ce.aggregator_spec = subject;
  ce.input.assign(input.begin(), input.end());
  ce.perturbed = std::move(perturbed);
  ce.input_total = before.snapshot();
  ce.perturbed_total = after.snapshot();
  return ce;
}

}  // namespace

AxiomVerdict verify_anonymity(const AggregateFn& aggregator, const std::string& subject,
                              std::span<const double> losses, std::size_t n_permutations, std::uint64_t seed) {
  if (n_permutations == 0) throw Error(ErrorCode::InvalidArgument, "need at least one permutation");
  AxiomVerdict verdict;
  verdict.axiom = Axiom::Anonymity;
  verdict.subject = subject;
  verdict.seed = seed;

  const auto baseline = aggregator(losses);
  auto check = [&](std::vector<double> permuted) {
    ++verdict.trials;
    const auto total = aggregator(permuted);
    if (total.identical(baseline)) return true;
    auto ce = make_pair_ce(subject, losses, std::move(permuted), baseline, total);
    ce.note = "permuting the losses changed the total";
    verdict.status = VerdictStatus::Fail;
    verdict.counterexample = std::move(ce);
    return false;
  };

  if (factorial_capped(losses.size(), n_permutations) <= n_permutations) {
    std::vector<std::size_t> order(losses.size());
    std::iota(order.begin(), order.end(), 0);
    do {
      std::vector<double> permuted;
      permuted.reserve(order.size());
      for (auto i : order) permuted.push_back(losses[i]);
      if (!check(std::move(permuted))) return verdict;
    } while (std::next_permutation(order.begin(), order.end()));
    return verdict;
  }

  Rng rng(seed);
  for (std::size_t t = 0; t < n_permutations; ++t) {
    std::vector<double> permuted(losses.begin(), losses.end());
    rng.shuffle(permuted);
    if (!check(std::move(permuted))) return verdict;
  }
  return verdict;
}

AxiomVerdict verify_anonymity(const AggregatorSpec& spec, std::span<const double> losses,
                              std::size_t n_permutations, std::uint64_t seed) {
  return verify_anonymity(bind(spec), to_string(spec), losses, n_permutations, seed);
}

AxiomVerdict verify_total_monotonicity(const AggregateFn& aggregator, const std::string& subject,
                                       std::span<const double> losses,
                                       std::span<const Perturbation> perturbations) {
  AxiomVerdict verdict;
  verdict.axiom = Axiom::TotalMonotonicity;
  verdict.subject = subject;
  const auto before = aggregator(losses);
  for (const auto& p : perturbations) {
    ++verdict.trials;
    auto raised = p.apply(losses);
    const auto after = aggregator(raised);
    if (!strictly_increased(before, after, kStrictIncreaseTolerance)) {
      auto ce = make_pair_ce(subject, losses, std::move(raised), before, after);
      ce.index = p.index;
      ce.note = "raising loss " + std::to_string(p.index) + " by " + format_double(p.amount) +
                " did not strictly increase the total";
      verdict.status = VerdictStatus::Fail;
      verdict.counterexample = std::move(ce);
      return verdict;
    }
  }
  return verdict;
}

AxiomVerdict verify_total_monotonicity(const AggregatorSpec& spec, std::span<const double> losses,
                                       std::span<const Perturbation> perturbations) {
  if (spec.is_multiplicative()) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < losses.size(); ++i) {
      if (!(losses[i] > 0.0)) bad.push_back(i);
    }
    if (!bad.empty()) {
      throw Error(ErrorCode::NonPositiveLoss, "multiplicative monotonicity needs strictly positive losses",
                  std::move(bad));
    }
  }
  return verify_total_monotonicity(bind(spec), to_string(spec), losses, perturbations);
}

Counterexample lemma1_counterexample(double q, std::span<const double> losses) {
  const auto spec = AggregatorSpec::quantile(q);
  if (losses.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two losses");
  const std::size_t n = losses.size();
  const std::size_t rank = quantile_rank(q, n);
  const double top = *std::max_element(losses.begin(), losses.end());

  std::vector<double> perturbed(losses.begin(), losses.end());
  std::size_t index = 0;
  std::string note;
  if (q < 1.0 && rank < n) {
    // The selected order statistic sits below the maximum: raise the maximum.
    for (std::size_t i = 0; i < n; ++i) {
      if (losses[i] == top) index = i;
    }
    perturbed[index] += 1.0;
    note = "raised the maximum loss by delta = 1";
  } else {
    double runner_up = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (losses[i] < top && losses[i] > runner_up) {
        runner_up = losses[i];
        index = i;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::NoNonMaximalLoss, "all losses equal the maximum");
    const double eps = (top - runner_up) / 2.0;
    perturbed[index] += eps;
    note = "raised a non-maximal loss by epsilon = " + format_double(eps) + " (selected order statistic is the maximum)";
  }

  const auto before = aggregate(spec, losses);
  const auto after = aggregate(spec, perturbed);
  auto ce = make_pair_ce(to_string(spec), losses, std::move(perturbed), before, after);
  ce.index = index;
  ce.note = std::move(note);
  return ce;
}

Counterexample corollary1_counterexample(std::span<const double> coefficients, SortOrder order,
                                         std::span<const double> losses) {
  const auto spec = AggregatorSpec::ltype(std::vector<double>(coefficients.begin(), coefficients.end()), order);
  if (coefficients.size() != losses.size()) {
    throw Error(ErrorCode::LengthMismatch, "coefficient count must equal loss count");
  }
  std::vector<double> sorted(losses.begin(), losses.end());
  if (order == SortOrder::Ascending) {
    std::sort(sorted.begin(), sorted.end());
  } else {
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
  }
  const std::size_t n = sorted.size();

  for (std::size_t pos = 0; pos < n; ++pos) {
    if (coefficients[pos] != 0.0) continue;
    // Raising one copy of a tied value moves it to the end of its tie block
    // nearest the larger values; that slot must carry the zero weight.
    const bool is_top = order == SortOrder::Ascending ? pos + 1 == n : pos == 0;
    const std::size_t neighbour = order == SortOrder::Ascending ? pos + 1 : pos - 1;
    if (!is_top && sorted[neighbour] == sorted[pos]) continue;

    const double amount = is_top ? 1.0 : (sorted[neighbour] - sorted[pos]) / 2.0;
    const double raised = sorted[pos] + amount;
    if (!(raised > sorted[pos]) || (!is_top && !(raised < sorted[neighbour]))) continue;

    const auto it = std::find(losses.begin(), losses.end(), sorted[pos]);
    const auto index = static_cast<std::size_t>(it - losses.begin());
    std::vector<double> perturbed(losses.begin(), losses.end());
    perturbed[index] = raised;

    const auto before = aggregate(spec, losses);
    const auto after = aggregate(spec, perturbed);
    auto ce = make_pair_ce(to_string(spec), losses, std::move(perturbed), before, after);
    ce.index = index;
    ce.note = "raised the loss at zero-weighted sorted position " + std::to_string(pos) + " by " +
              format_double(amount);
    return ce;
  }
  throw Error(ErrorCode::NoConstruction, "no zero coefficient admits a total-preserving raise");
}

namespace {

// Aggregators whose minimum at P = A must be strict.
bool requires_strict_minimum(const AggregatorSpec& spec) {
  if (const auto* lt = std::get_if<LType>(&spec.kind)) return lt->all_positive();
  return true;
}

std::vector<PredictionRecord> make_records(std::span<const double> actuals, std::span<const double> predictions) {
  std::vector<PredictionRecord> records;
  records.reserve(actuals.size());
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    records.push_back({"u" + std::to_string(i), actuals[i], predictions[i]});
  }
  return records;
}

TotalLossResult total_for(const IndividualLossSpec& loss, const AggregatorSpec& agg,
                          std::span<const double> actuals, std::span<const double> predictions) {
  const auto records = make_records(actuals, predictions);
  return aggregate(agg, eval_loss_vector(loss, records));
}

}  // namespace

AxiomVerdict verify_fisher_consistency(const IndividualLossSpec& loss_spec, const AggregatorSpec& agg_spec,
                                       std::span<const double> actuals, std::size_t n_trials,
                                       double perturbation_scale, std::uint64_t seed) {
  constexpr double kMinRelativeShift = 1e-6;
  if (!(perturbation_scale > kMinRelativeShift) || !std::isfinite(perturbation_scale)) {
    throw Error(ErrorCode::InvalidArgument, "perturbation scale must exceed 1e-6");
  }
  if (actuals.empty()) throw Error(ErrorCode::EmptyVector, "no actual values");
  IndividualLossSpec loss = loss_spec;
  loss.zero_actual_policy = ZeroActualPolicy::Error;

  AxiomVerdict verdict;
  verdict.axiom = Axiom::FisherConsistency;
  verdict.subject = std::string(to_string(loss.kind)) + " + " + to_string(agg_spec);
  verdict.seed = seed;
  const bool strict = requires_strict_minimum(agg_spec);

  const auto at_actuals = total_for(loss, agg_spec, actuals, actuals);
  Rng rng(seed);
  std::vector<double> predictions(actuals.size());
  for (std::size_t t = 0; t < n_trials; ++t) {
    for (std::size_t i = 0; i < actuals.size(); ++i) {
      const double m = rng.uniform(kMinRelativeShift, perturbation_scale);
      const double factor = rng.coin() ? 1.0 + m : 1.0 / (1.0 + m);
      predictions[i] = actuals[i] == 0.0 ? m : actuals[i] * factor;
    }
    ++verdict.trials;
    const auto perturbed = total_for(loss, agg_spec, actuals, predictions);
    const bool ok = strict ? strictly_increased(at_actuals, perturbed, 0.0)
                           : compare_totals(perturbed, at_actuals, 0.0) >= 0;
    if (!ok) {
      Counterexample ce;
      ce.aggregator_spec = to_string(agg_spec);
      ce.loss_spec = std::string(to_string(loss.kind));
      ce.input.assign(actuals.begin(), actuals.end());
      ce.perturbed = predictions;
      ce.input_total = at_actuals.snapshot();
      ce.perturbed_total = perturbed.snapshot();
      ce.note = "perturbed predictions did not exceed the total at P = A";
      verdict.status = VerdictStatus::Fail;
      verdict.counterexample = std::move(ce);
      return verdict;
    }
  }
  return verdict;
}

bool replay_counterexample(const Counterexample& ce) {
  TotalSnapshot input_total;
  TotalSnapshot perturbed_total;
  if (!ce.loss_spec.empty() && ce.actual) {
    const IndividualLossSpec spec{parse_loss_kind(ce.loss_spec), ZeroActualPolicy::Error};
    if (ce.input.size() != 1 || ce.perturbed.size() != 1) return false;
    input_total.value = ExtendedValue::of(eval_loss(spec, PredictionPair(ce.input[0], *ce.actual)));
    perturbed_total.value = ExtendedValue::of(eval_loss(spec, PredictionPair(ce.perturbed[0], *ce.actual)));
  } else if (!ce.loss_spec.empty()) {
    const IndividualLossSpec spec{parse_loss_kind(ce.loss_spec), ZeroActualPolicy::Error};
    const auto agg = parse_aggregator_spec(ce.aggregator_spec);
    input_total = total_for(spec, agg, ce.input, ce.input).snapshot();
    perturbed_total = total_for(spec, agg, ce.input, ce.perturbed).snapshot();
  } else {
    const auto agg = parse_aggregator_spec(ce.aggregator_spec);
    input_total = aggregate(agg, ce.input).snapshot();
    perturbed_total = aggregate(agg, ce.perturbed).snapshot();
  }
  return input_total.identical(ce.input_total) && perturbed_total.identical(ce.perturbed_total);
}

}  // namespace totalloss

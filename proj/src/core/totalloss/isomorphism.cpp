#include "totalloss/isomorphism.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "totalloss/error.hpp"
#include "totalloss/numeric_text.hpp"

namespace totalloss {

namespace {

void require_base(double base) {
  if (!(base > 1.0) || !std::isfinite(base)) throw Error(ErrorCode::InvalidArgument, "log base must be > 1");
}

double log_b(double x, double base) {
  if (base == kNaturalBase) return std::log(x);
  if (base == 2.0) return std::log2(x);
  if (base == 10.0) return std::log10(x);
  return std::log(x) / std::log(base);
}

double exp_b(double x, double base) {
  if (base == kNaturalBase) return std::exp(x);
  if (base == 2.0) return std::exp2(x);
  return std::pow(base, x);
}

// Multiplicative ordering on the reconstructed product when both products
// are representable, otherwise on the logs.
int compare_products(const TotalLossResult& a, const TotalLossResult& b, double rel_tol) {
  if (a.value.is_finite() && b.value.is_finite() && a.value.finite() > 0.0 && b.value.finite() > 0.0) {
    TotalLossResult pa = a;
    TotalLossResult pb = b;
    pa.log_value.reset();
    pb.log_value.reset();
    return compare_totals(pa, pb, rel_tol);
  }
  return compare_totals(a, b, rel_tol);
}

}  // namespace

LossVector to_log_domain(const LossVector& losses, double base) {
  require_base(base);
  if (losses.tag != DomainTag::RawLoss) throw Error(ErrorCode::TagMismatch, "vector is already in the log domain");
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < losses.losses.size(); ++i) {
    if (!(losses.losses[i] > 0.0)) bad.push_back(i);
  }
  if (!bad.empty()) {
    std::string where;
    for (auto i : bad) where += (where.empty() ? "" : ",") + std::to_string(i);
    throw Error(ErrorCode::NonPositiveLoss, "non-positive loss at index " + where, std::move(bad));
  }
  LossVector out = losses;
  for (auto& x : out.losses) x = log_b(x, base);
  out.tag = DomainTag::LogLoss;
  out.log_base = base;
  return out;
}

LossVector to_exp_domain(const LossVector& log_losses, double base) {
  require_base(base);
  if (log_losses.tag != DomainTag::LogLoss) throw Error(ErrorCode::TagMismatch, "vector is not in the log domain");
  if (log_losses.log_base != base) {
    throw Error(ErrorCode::TagMismatch, "vector was logged in base " + format_double(log_losses.log_base) +
                                            ", not " + format_double(base));
  }
  LossVector out = log_losses;
  for (auto& x : out.losses) x = exp_b(x, base);
  out.tag = DomainTag::RawLoss;
  out.log_base = 0.0;
  return out;
}

ShiftResult shift_positive(const LossVector& losses, double margin) {
  if (!(margin > 0.0) || !std::isfinite(margin)) throw Error(ErrorCode::InvalidArgument, "margin must be > 0");
  if (losses.losses.empty()) throw Error(ErrorCode::EmptyVector, "loss vector is empty");
  for (double x : losses.losses) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "loss is not finite");
  }
  ShiftResult out{losses, 0.0};
  const double lowest = *std::min_element(losses.losses.begin(), losses.losses.end());
  if (lowest <= 0.0) {
    out.k = margin - lowest;
    for (auto& x : out.losses.losses) x += out.k;
    out.losses.shift_k += out.k;
  }
  return out;
}

AxiomVerdict check_rank_preservation(std::span<const LossVector> loss_sets, double base) {
  if (loss_sets.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two loss sets to rank");
  constexpr double kTieTolerance = 1e-9;

  std::vector<TotalLossResult> products;
  std::vector<TotalLossResult> log_sums;
  for (const auto& set : loss_sets) {
    const auto logged = to_log_domain(set, base);
    products.push_back(aggregate_multiplicative(set.view()));
    log_sums.push_back(aggregate_additive(logged.view()));
  }

  AxiomVerdict verdict;
  verdict.axiom = Axiom::RankIsomorphism;
  verdict.subject = "multiplicative vs additive-of-log base " + format_double(base);
  for (std::size_t i = 0; i < loss_sets.size(); ++i) {
    for (std::size_t j = i + 1; j < loss_sets.size(); ++j) {
      ++verdict.trials;
      const int by_product = compare_products(products[i], products[j], kTieTolerance);
      const int by_log_sum = compare_totals(log_sums[i], log_sums[j], kTieTolerance);
      if (by_product != by_log_sum) {
        Counterexample ce;
        ce.aggregator_spec = "multiplicative";
        ce.input = loss_sets[i].losses;
        ce.perturbed = loss_sets[j].losses;
        ce.input_total = products[i].snapshot();
        ce.perturbed_total = products[j].snapshot();
        ce.note = "product order " + std::to_string(by_product) + " but log-sum order " + std::to_string(by_log_sum);
        verdict.status = VerdictStatus::Fail;
        verdict.counterexample = std::move(ce);
        return verdict;
      }
    }
  }
  return verdict;
}

}  // namespace totalloss

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "totalloss/aggregators.hpp"
#include "totalloss/loss_core.hpp"
#include "totalloss/verdict.hpp"

namespace totalloss {

// "Strictly increases" threshold for total monotonicity checks.
inline constexpr double kStrictIncreaseTolerance = 1e-12;

using AggregateFn = std::function<TotalLossResult(std::span<const double>)>;

// Raise exactly one loss, holding the rest fixed.
struct Perturbation {
  enum class Kind { Delta, Epsilon };

  std::size_t index = 0;
  double amount = 0.0;
  Kind kind = Kind::Delta;

  static Perturbation delta(std::size_t index, double delta);
  // amount = fraction * (max - losses[index]), so the raised loss stays
  // strictly below the maximum. Needs losses[index] < max, 0 < fraction < 1.
  static Perturbation epsilon_below_max(std::span<const double> losses, std::size_t index,
                                        double fraction = 0.5);

  std::vector<double> apply(std::span<const double> losses) const;
};

// Bit-identical totals across permutations. When n! <= n_permutations every
// permutation is enumerated, otherwise n_permutations random shuffles.
AxiomVerdict verify_anonymity(const AggregatorSpec& spec, std::span<const double> losses,
                              std::size_t n_permutations, std::uint64_t seed);
AxiomVerdict verify_anonymity(const AggregateFn& aggregator, const std::string& subject,
                              std::span<const double> losses, std::size_t n_permutations,
                              std::uint64_t seed);

AxiomVerdict verify_total_monotonicity(const AggregatorSpec& spec, std::span<const double> losses,
                                       std::span<const Perturbation> perturbations);
AxiomVerdict verify_total_monotonicity(const AggregateFn& aggregator, const std::string& subject,
                                       std::span<const double> losses,
                                       std::span<const Perturbation> perturbations);

// Constructive violation of total monotonicity by a quantile total. With
// rank ceil(q*n) < n the maximum is raised by 1; when the selected order
// statistic is the maximum itself (q = 1, or small n) the largest
// non-maximal loss is raised by half its gap to the maximum.
Counterexample lemma1_counterexample(double q, std::span<const double> losses);

// Same idea for an L-type total with a zero coefficient: raise the loss that
// sits at a zero-weighted sorted position without moving it past a neighbour.
Counterexample corollary1_counterexample(std::span<const double> coefficients, SortOrder order,
                                         std::span<const double> losses);

// Samples n_trials prediction vectors with every coordinate scaled by a
// factor in [1/(1+s), 1+s] (never closer than 1e-6 relative to the actual)
// and checks the total at P = A is below each of them.
AxiomVerdict verify_fisher_consistency(const IndividualLossSpec& loss_spec, const AggregatorSpec& agg_spec,
                                       std::span<const double> actuals, std::size_t n_trials,
                                       double perturbation_scale, std::uint64_t seed);

// Recomputes both totals of a serialized counterexample and reports whether
// they reproduce bit for bit.
bool replay_counterexample(const Counterexample& ce);

// Driver for the whole verification catalogue.
struct SuiteEntry {
  std::string suite;
  VerdictStatus expected = VerdictStatus::Pass;
  AxiomVerdict verdict;
  bool met = false;
};

struct SuiteReport {
  std::vector<SuiteEntry> entries;

  bool expectations_met() const;
  // One JSON object per entry plus a trailing summary object, '\n'-terminated.
  std::string to_json_lines() const;
};

const std::vector<std::string>& suite_names();

// `selection` holds suite names; empty or {"all"} runs everything.
SuiteReport run_suites(const std::vector<std::string>& selection, std::uint64_t seed, std::size_t trials);

}  // namespace totalloss

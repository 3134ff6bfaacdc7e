#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "totalloss/axiom_lab.hpp"
#include "totalloss/error.hpp"
#include "totalloss/isomorphism.hpp"
#include "totalloss/random.hpp"

namespace totalloss {

namespace {

class ReportBuilder {
 public:
  ReportBuilder(std::uint64_t seed, std::size_t trials) : seed_(seed), trials_(trials) {}

  std::uint64_t next_seed() { return derive_seed(seed_, stream_++); }

  // Seeds depend only on (seed, suite, position), not on which other
  // suites were selected.
  void start_suite(std::size_t suite_index) { stream_ = (suite_index + 1) << 16; }
  std::size_t trials() const { return trials_; }

  void add(const std::string& suite, VerdictStatus expected, AxiomVerdict verdict) {
    SuiteEntry entry{suite, expected, std::move(verdict), false};
    const auto& v = entry.verdict;
    if (v.status == expected) {
      if (v.status == VerdictStatus::Pass) {
        entry.met = v.trials > 0;
      } else if (v.counterexample) {
        // Stub subjects have no textual spec to replay from.
        entry.met = v.subject.rfind("custom", 0) == 0 || replay_counterexample(*v.counterexample);
      }
    }
    report_.entries.push_back(std::move(entry));
  }

  SuiteReport take() { return std::move(report_); }

 private:
  std::uint64_t seed_;
  std::size_t trials_;
  std::uint64_t stream_ = 0;
  SuiteReport report_;
};

// Folds a run of per-instance verdicts into one, keeping the first failure.
void absorb(AxiomVerdict& acc, AxiomVerdict next) {
  acc.trials += next.trials;
  if (acc.status == VerdictStatus::Pass && next.status == VerdictStatus::Fail) {
    acc.status = VerdictStatus::Fail;
    acc.counterexample = std::move(next.counterexample);
  }
}

std::vector<double> positive_coefficients(Rng& rng, std::size_t n) { return rng.uniform_vector(n, 0.1, 1.0); }

std::vector<double> log_uniform_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
  return v;
}

// Fail verdict built straight from a constructive counterexample.
AxiomVerdict verdict_from(const Counterexample& ce, std::uint64_t seed) {
  const auto spec = parse_aggregator_spec(ce.aggregator_spec);
  const auto before = aggregate(spec, ce.input);
  const auto after = aggregate(spec, ce.perturbed);
  AxiomVerdict v;
  v.axiom = Axiom::TotalMonotonicity;
  v.subject = ce.aggregator_spec;
  v.trials = 1;
  v.seed = seed;
  if (!strictly_increased(before, after, kStrictIncreaseTolerance)) {
    v.status = VerdictStatus::Fail;
    v.counterexample = ce;
  }
  return v;
}

void suite_pointwise(ReportBuilder& b) {
  for (auto kind : {LossKind::AbsoluteError, LossKind::SquaredError, LossKind::AbsolutePercentageError,
                    LossKind::SquaredPercentageError}) {
    const IndividualLossSpec spec{kind, ZeroActualPolicy::Error};
    AxiomVerdict acc;
    acc.axiom = Axiom::PointwiseMonotonicity;
    acc.subject = std::string(to_string(kind));
    acc.seed = b.next_seed();
    Rng rng(acc.seed);
    for (std::size_t t = 0; t < b.trials() && acc.passed(); ++t) {
      const double actual = spec.is_percentage() || rng.coin() ? rng.uniform(1.0, 1000.0) : 0.0;
      auto grid = rng.uniform_vector(rng.between(3, 20), 0.0, 2.0 * actual + 1.0);
      grid.push_back(actual);
      absorb(acc, check_pointwise_monotonicity(spec, actual, grid));
    }
    b.add("pointwise", VerdictStatus::Pass, std::move(acc));
  }
  const LossFunction constant = [](double, double) { return 1.0; };
  const double grid[] = {80, 90, 100, 110, 120};
  auto stub = check_pointwise_monotonicity(constant, 100.0, grid);
  stub.subject = "custom:constant-loss";
  b.add("pointwise", VerdictStatus::Fail, std::move(stub));
}

void suite_anonymity(ReportBuilder& b) {
  using Maker = AggregatorSpec (*)(Rng&, std::size_t);
  const std::pair<const char*, Maker> makers[] = {
      {"additive", [](Rng&, std::size_t) { return AggregatorSpec::additive(); }},
      {"multiplicative", [](Rng&, std::size_t) { return AggregatorSpec::multiplicative(); }},
      {"quantile:0.5", [](Rng&, std::size_t) { return AggregatorSpec::quantile(0.5); }},
      {"quantile:1", [](Rng&, std::size_t) { return AggregatorSpec::quantile(1.0); }},
      {"ltype:asc:positive",
       [](Rng& r, std::size_t n) { return AggregatorSpec::ltype(positive_coefficients(r, n)); }},
      {"ltype:desc:with-zero",
       [](Rng& r, std::size_t n) {
         auto c = positive_coefficients(r, n);
         c[r.index(n)] = 0.0;
         return AggregatorSpec::ltype(std::move(c), SortOrder::Descending);
       }},
  };
  for (const auto& [name, make] : makers) {
    AxiomVerdict acc;
    acc.axiom = Axiom::Anonymity;
    acc.subject = name;
    acc.seed = b.next_seed();
    Rng rng(acc.seed);
    for (std::size_t t = 0; t < b.trials() && acc.passed(); ++t) {
      const std::size_t n = rng.between(1, 30);
      const auto spec = make(rng, n);
      absorb(acc, verify_anonymity(spec, rng.uniform_vector(n, 0.0, 10.0), 20, rng.next()));
    }
    b.add("anonymity", VerdictStatus::Pass, std::move(acc));
  }
  const AggregateFn first_only = [](std::span<const double> losses) {
    TotalLossResult r;
    r.value = ExtendedValue::of(losses.front());
    r.n_units = losses.size();
    return r;
  };
  const double pair[] = {1.0, 2.0};
  b.add("anonymity", VerdictStatus::Fail, verify_anonymity(first_only, "custom:first-element", pair, 2, b.next_seed()));
}

AxiomVerdict random_monotonicity(ReportBuilder& b, const std::string& subject,
                                 AggregatorSpec (*make)(Rng&, std::size_t), const TransformSpec& t) {
  AxiomVerdict acc;
  acc.axiom = Axiom::TotalMonotonicity;
  acc.subject = subject;
  acc.seed = b.next_seed();
  Rng rng(acc.seed);
  for (std::size_t i = 0; i < b.trials() && acc.passed(); ++i) {
    const std::size_t n = rng.between(2, 30);
    const auto spec = make(rng, n).with(t);
    const auto losses = rng.uniform_vector(n, 0.1, 10.0);
    const Perturbation p = Perturbation::delta(rng.index(n), rng.uniform(1e-3, 1.0));
    absorb(acc, verify_total_monotonicity(spec, losses, std::span(&p, 1)));
  }
  return acc;
}

AxiomVerdict quantile_max_raise(ReportBuilder& b, const TransformSpec& t) {
  const auto seed = b.next_seed();
  Rng rng(seed);
  const auto losses = rng.uniform_vector(rng.between(4, 30), 0.1, 10.0);
  const auto top = std::max_element(losses.begin(), losses.end()) - losses.begin();
  const Perturbation p = Perturbation::delta(static_cast<std::size_t>(top), 1.0);
  auto v = verify_total_monotonicity(AggregatorSpec::quantile(0.5).with(t), losses, std::span(&p, 1));
  v.seed = seed;
  return v;
}

void suite_monotonicity(ReportBuilder& b) {
  const auto none = TransformSpec::none();
  b.add("monotonicity", VerdictStatus::Pass,
        random_monotonicity(b, "additive", [](Rng&, std::size_t) { return AggregatorSpec::additive(); }, none));
  b.add("monotonicity", VerdictStatus::Pass,
        random_monotonicity(
            b, "multiplicative", [](Rng&, std::size_t) { return AggregatorSpec::multiplicative(); }, none));
  b.add("monotonicity", VerdictStatus::Pass,
        random_monotonicity(
            b, "ltype:asc:positive",
            [](Rng& r, std::size_t n) { return AggregatorSpec::ltype(positive_coefficients(r, n)); }, none));
  b.add("monotonicity", VerdictStatus::Pass,
        random_monotonicity(b, "ltype:desc:positive",
                            [](Rng& r, std::size_t n) {
                              return AggregatorSpec::ltype(positive_coefficients(r, n), SortOrder::Descending);
                            },
                            none));

  b.add("monotonicity", VerdictStatus::Fail, quantile_max_raise(b, none));

  {
    const auto seed = b.next_seed();
    Rng rng(seed);
    const auto losses = rng.uniform_vector(rng.between(3, 30), 0.1, 10.0);
    const auto top = static_cast<std::size_t>(std::max_element(losses.begin(), losses.end()) - losses.begin());
    const std::size_t sub = top == 0 ? 1 : 0;
    const auto p = Perturbation::epsilon_below_max(losses, sub);
    auto v = verify_total_monotonicity(AggregatorSpec::quantile(1.0), losses, std::span(&p, 1));
    v.seed = seed;
    b.add("monotonicity", VerdictStatus::Fail, std::move(v));
  }
  {
    const auto seed = b.next_seed();
    Rng rng(seed);
    const std::size_t n = rng.between(3, 30);
    auto c = positive_coefficients(rng, n);
    c[rng.index(n)] = 0.0;
    const auto losses = rng.uniform_vector(n, 0.1, 10.0);
    const auto ce = corollary1_counterexample(c, SortOrder::Ascending, losses);
    const auto p = Perturbation::delta(*ce.index, ce.perturbed[*ce.index] - ce.input[*ce.index]);
    auto v = verify_total_monotonicity(AggregatorSpec::ltype(c), losses, std::span(&p, 1));
    v.seed = seed;
    b.add("monotonicity", VerdictStatus::Fail, std::move(v));
  }
}

void suite_lemma1(ReportBuilder& b) {
  for (double q : {0.25, 0.5, 0.9, 1.0}) {
    const auto seed = b.next_seed();
    Rng rng(seed);
    const auto losses = rng.uniform_vector(rng.between(10, 50), 0.0, 10.0);
    b.add("lemma1", VerdictStatus::Fail, verdict_from(lemma1_counterexample(q, losses), seed));
  }
}

void suite_corollary1(ReportBuilder& b) {
  const auto seed = b.next_seed();
  Rng rng(seed);
  const std::size_t n = rng.between(5, 40);
  const auto losses = rng.uniform_vector(n, 0.0, 10.0);
  const double w = 1.0 / static_cast<double>(n);

  // Trimmed mean dropping one unit at each end.
  std::vector<double> trimmed(n, 1.0 / static_cast<double>(n - 2));
  trimmed.front() = trimmed.back() = 0.0;
  b.add("corollary1", VerdictStatus::Fail,
        verdict_from(corollary1_counterexample(trimmed, SortOrder::Ascending, losses), seed));

  // Winsorized mean: extremes replaced by their neighbours.
  std::vector<double> winsorized(n, w);
  winsorized.front() = winsorized.back() = 0.0;
  winsorized[1] = winsorized[n - 2] = 2.0 * w;
  b.add("corollary1", VerdictStatus::Fail,
        verdict_from(corollary1_counterexample(winsorized, SortOrder::Ascending, losses), seed));

  auto random_c = positive_coefficients(rng, n);
  random_c[rng.index(n)] = 0.0;
  b.add("corollary1", VerdictStatus::Fail,
        verdict_from(corollary1_counterexample(random_c, SortOrder::Descending, losses), seed));
}

void suite_isomorphism(ReportBuilder& b) {
  for (double base : {std::numbers::e, 2.0, 10.0}) {
    AxiomVerdict acc;
    acc.axiom = Axiom::RankIsomorphism;
    acc.seed = b.next_seed();
    Rng rng(acc.seed);
    for (std::size_t t = 0; t < b.trials() && acc.passed(); ++t) {
      std::vector<LossVector> sets(rng.between(2, 5));
      for (auto& s : sets) s.losses = log_uniform_vector(rng, rng.between(1, 30));
      auto v = check_rank_preservation(sets, base);
      acc.subject = v.subject;
      absorb(acc, std::move(v));
    }
    b.add("isomorphism", VerdictStatus::Pass, std::move(acc));
  }
}

void suite_fisher(ReportBuilder& b) {
  constexpr std::size_t kUnits = 20;
  for (auto kind : {LossKind::AbsolutePercentageError, LossKind::SquaredError}) {
    const auto seed = b.next_seed();
    Rng rng(seed);
    const auto actuals = rng.uniform_vector(kUnits, 1.0, 1000.0);
    const AggregatorSpec specs[] = {AggregatorSpec::additive(), AggregatorSpec::multiplicative(),
                                    AggregatorSpec::quantile(0.5), AggregatorSpec::quantile(1.0),
                                    AggregatorSpec::ltype(positive_coefficients(rng, kUnits))};
    for (const auto& spec : specs) {
      b.add("fisher", VerdictStatus::Pass,
            verify_fisher_consistency({kind, ZeroActualPolicy::Error}, spec, actuals, b.trials(), 0.5,
                                      b.next_seed()));
    }
  }
}

void suite_corollary2(ReportBuilder& b) {
  const TransformSpec transforms[] = {TransformSpec::mean(), TransformSpec::geometric_mean(),
                                      TransformSpec::root(2.0), TransformSpec::scale(3.0),
                                      TransformSpec::log_base(10.0)};
  for (const auto& t : transforms) {
    b.add("corollary2", VerdictStatus::Pass,
          random_monotonicity(b, "additive/" + to_string(t),
                              [](Rng&, std::size_t) { return AggregatorSpec::additive(); }, t));
    b.add("corollary2", VerdictStatus::Fail, quantile_max_raise(b, t));
  }
}

}  // namespace

bool SuiteReport::expectations_met() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.met; });
}

std::string SuiteReport::to_json_lines() const {
  std::string out;
  std::size_t unmet = 0;
  for (const auto& e : entries) {
    auto j = nlohmann::json::parse(to_json_line(e.verdict));
    j["suite"] = e.suite;
    j["expected"] = std::string(to_string(e.expected));
    j["met"] = e.met;
    out += j.dump();
    out += '\n';
    if (!e.met) ++unmet;
  }
  nlohmann::json summary;
  summary["summary"] = true;
  summary["entries"] = entries.size();
  summary["unmet"] = unmet;
  summary["expectations_met"] = expectations_met();
  out += summary.dump();
  out += '\n';
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"pointwise",  "anonymity",   "monotonicity", "lemma1",
                                                 "corollary1", "isomorphism", "fisher",       "corollary2"};
  return names;
}

SuiteReport run_suites(const std::vector<std::string>& selection, std::uint64_t seed, std::size_t trials) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  const bool all = selection.empty() || (selection.size() == 1 && selection[0] == "all");
  for (const auto& s : selection) {
    if (s == "all") continue;
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
      throw Error(ErrorCode::InvalidArgument, "unknown suite '" + s + "'");
    }
  }
  ReportBuilder b(seed, trials);
  for (std::size_t i = 0; i < suite_names().size(); ++i) {
    const auto& name = suite_names()[i];
    if (!all && std::find(selection.begin(), selection.end(), name) == selection.end()) continue;
    b.start_suite(i);
    if (name == "pointwise") suite_pointwise(b);
    if (name == "anonymity") suite_anonymity(b);
    if (name == "monotonicity") suite_monotonicity(b);
    if (name == "lemma1") suite_lemma1(b);
    if (name == "corollary1") suite_corollary1(b);
    if (name == "isomorphism") suite_isomorphism(b);
    if (name == "fisher") suite_fisher(b);
    if (name == "corollary2") suite_corollary2(b);
  }
  return b.take();
}

}  // namespace totalloss

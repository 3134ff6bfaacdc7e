#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"
#include "totalloss/axiom_lab.hpp"

using namespace totalloss;

namespace {

std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

}  // namespace

TEST_CASE("anonymity worked values") {
  std::vector<double> a{1, 2, 3};
  auto v = verify_anonymity(AggregatorSpec::additive(), a, 10, 1);
  CHECK(v.passed());
  CHECK(v.trials > 0);
  CHECK(v.seed == 1);

  std::vector<double> b{5, 1, 3};
  auto q = verify_anonymity(AggregatorSpec::quantile(0.5), b, 6, 2);
  CHECK(q.passed());
  CHECK(q.trials == 6);

  std::vector<double> c{1, 2};
  AggregateFn first = [](std::span<const double> l) { return aggregate_additive(l.first(1)); };
  auto f = verify_anonymity(first, "custom:first", c, 10, 3);
  CHECK_FALSE(f.passed());
  REQUIRE(f.counterexample.has_value());
  CHECK(f.counterexample->input != f.counterexample->perturbed);
  CHECK_FALSE(f.counterexample->input_total.identical(f.counterexample->perturbed_total));
}

TEST_CASE("monotonicity worked values") {
  std::vector<double> a{1, 2, 3};
  std::vector<Perturbation> p0{Perturbation::delta(0, 0.5)};
  CHECK(verify_total_monotonicity(AggregatorSpec::additive(), a, p0).passed());

  std::vector<double> b{1, 2, 3, 4, 5};
  std::vector<Perturbation> pmax{Perturbation::delta(4, 10)};
  auto q = verify_total_monotonicity(AggregatorSpec::quantile(0.5), b, pmax);
  CHECK_FALSE(q.passed());
  REQUIRE(q.counterexample.has_value());
  CHECK(q.counterexample->input_total.value == ExtendedValue::of(3.0));
  CHECK(q.counterexample->perturbed_total.value == ExtendedValue::of(3.0));
  CHECK(replay_counterexample(*q.counterexample));

  std::vector<Perturbation> plow{Perturbation::delta(0, 0.5)};
  auto l = verify_total_monotonicity(AggregatorSpec::ltype({0, 1, 1}), a, plow);
  CHECK_FALSE(l.passed());
  REQUIRE(l.counterexample.has_value());
  CHECK(l.counterexample->input_total.value == ExtendedValue::of(5.0));
  CHECK(replay_counterexample(*l.counterexample));

  std::vector<double> z{0, 2};
  CHECK_ERROR_CODE(verify_total_monotonicity(AggregatorSpec::multiplicative(), z, p0), ErrorCode::NonPositiveLoss);
}

TEST_CASE("admissible aggregators respond to every single raise") {
  std::mt19937_64 gen(81);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = 2 + t % 20;
    auto v = random_vector(gen, n, 0.1, 100.0);
    auto c = random_vector(gen, n, 0.05, 2.0);
    std::vector<Perturbation> ps;
    for (std::size_t i = 0; i < n; ++i) ps.push_back(Perturbation::delta(i, 1e-6 * v[i] + 1e-3));
    for (const auto& s : {AggregatorSpec::additive(), AggregatorSpec::multiplicative(), AggregatorSpec::ltype(c),
                          AggregatorSpec::ltype(c, SortOrder::Descending)}) {
      CHECK_MESSAGE(verify_total_monotonicity(s, v, ps).passed(), to_string(s));
    }
  }
}

TEST_CASE("epsilon perturbation stays below the maximum") {
  std::vector<double> v{1, 2, 5};
  auto p = Perturbation::epsilon_below_max(v, 1);
  CHECK(p.kind == Perturbation::Kind::Epsilon);
  CHECK(p.amount == 1.5);
  CHECK(p.apply(v) == std::vector<double>{1, 3.5, 5});
}

TEST_CASE("lemma1_counterexample worked values") {
  std::vector<double> a{1, 2, 3, 4, 5};
  auto c = lemma1_counterexample(0.5, a);
  CHECK(c.perturbed == std::vector<double>{1, 2, 3, 4, 6});
  CHECK(c.input_total.value == ExtendedValue::of(3.0));
  CHECK(c.perturbed_total.value == ExtendedValue::of(3.0));
  CHECK(oracle::order_statistic(c.input, 0.5) == 3.0);
  CHECK(oracle::order_statistic(c.perturbed, 0.5) == 3.0);

  std::vector<double> b{1, 2, 5};
  auto m = lemma1_counterexample(1.0, b);
  CHECK(m.perturbed == std::vector<double>{1, 3.5, 5});
  CHECK(m.input_total.value == ExtendedValue::of(5.0));
  CHECK(m.perturbed_total.value == ExtendedValue::of(5.0));

  std::vector<double> flat{4, 4, 4};
  CHECK_ERROR_CODE(lemma1_counterexample(1.0, flat), ErrorCode::NoNonMaximalLoss);
}

TEST_CASE("raising the maximum moves the total when the rank is the top") {
  // q < 1 but ceil(q n) = n: the selected statistic is the maximum itself
  std::vector<double> v{1, 2, 3, 4, 5};
  const auto spec = AggregatorSpec::quantile(0.9);
  REQUIRE(quantile_rank(0.9, 5) == 5);
  auto raised = v;
  raised[4] += 1.0;
  CHECK(aggregate(spec, raised).value != aggregate(spec, v).value);
  // the generator falls back to the sub-maximal construction there
  auto c = lemma1_counterexample(0.9, v);
  CHECK(c.input_total.identical(c.perturbed_total));
  CHECK(c.perturbed[4] == 5.0);
}

TEST_CASE("lemma1_counterexample on random vectors") {
  std::mt19937_64 gen(82);
  for (int t = 0; t < 500; ++t) {
    std::size_t n = 2 + t % 60;
    auto v = random_vector(gen, n, 0.0, 50.0);
    for (double q : {0.25, 0.5, 0.9, 1.0}) {
      auto c = lemma1_counterexample(q, v);
      CHECK(c.input_total.identical(c.perturbed_total));
      CHECK(same_bits(oracle::order_statistic(c.input, q), oracle::order_statistic(c.perturbed, q)));
      REQUIRE(c.index.has_value());
      CHECK(c.perturbed[*c.index] > c.input[*c.index]);
      CHECK(replay_counterexample(c));
    }
  }
}

TEST_CASE("corollary1_counterexample") {
  std::vector<double> a{1, 2, 3}, c{0, 1, 1};
  auto ce = corollary1_counterexample(c, SortOrder::Ascending, a);
  CHECK(ce.input_total.identical(ce.perturbed_total));
  CHECK(ce.perturbed != ce.input);
  CHECK(replay_counterexample(ce));

  std::vector<double> pos{1, 1, 1};
  CHECK_ERROR_CODE(corollary1_counterexample(pos, SortOrder::Ascending, a), ErrorCode::NoConstruction);
  std::vector<double> short_c{0, 1};
  CHECK_ERROR_CODE(corollary1_counterexample(short_c, SortOrder::Ascending, a), ErrorCode::LengthMismatch);

  // a zero at the top slot: raising the max is invisible
  std::vector<double> top0{1, 1, 0};
  auto t0 = corollary1_counterexample(top0, SortOrder::Ascending, a);
  CHECK(t0.input_total.identical(t0.perturbed_total));
}

TEST_CASE("corollary1_counterexample on random coefficients, ties and orders") {
  std::mt19937_64 gen(83);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int t = 0; t < 500; ++t) {
    std::size_t n = 2 + t % 30;
    auto v = random_vector(gen, n, 0.0, 20.0);
    if (t % 4 == 0) for (auto& x : v) x = std::round(x / 5.0);
    auto c = random_vector(gen, n, 0.1, 2.0);
    std::uniform_int_distribution<std::size_t> at(0, n - 1);
    c[at(gen)] = 0.0;
    if (pick(gen) == 0) c[at(gen)] = 0.0;
    const auto order = t % 2 ? SortOrder::Descending : SortOrder::Ascending;
    try {
      auto ce = corollary1_counterexample(c, order, v);
      CHECK(ce.input_total.identical(ce.perturbed_total));
      CHECK(replay_counterexample(ce));
    } catch (const Error& e) {
      // only possible when every zero sits inside a tie block
      CHECK(e.code() == ErrorCode::NoConstruction);
    }
  }
}

TEST_CASE("fisher consistency worked values") {
  IndividualLossSpec ape{LossKind::AbsolutePercentageError, ZeroActualPolicy::Error};
  std::vector<double> act{100, 200};
  CHECK(verify_fisher_consistency(ape, AggregatorSpec::additive(), act, 200, 0.5, 1).passed());
  CHECK(verify_fisher_consistency(ape, AggregatorSpec::quantile(1.0), act, 200, 0.5, 1).passed());
  auto m = verify_fisher_consistency(ape, AggregatorSpec::multiplicative(), act, 200, 0.5, 1);
  CHECK(m.passed());
  CHECK(m.trials == 200);
}

TEST_CASE("fisher consistency flags an aggregator that ignores errors") {
  IndividualLossSpec se{LossKind::SquaredError, ZeroActualPolicy::Error};
  std::vector<double> act{10, 20, 30};
  // weights only the smallest loss, so it can fail to rise; not strict
  auto low = verify_fisher_consistency(se, AggregatorSpec::ltype({1, 0, 0}), act, 100, 0.5, 4);
  CHECK(low.passed());
  CHECK_ERROR_CODE(verify_fisher_consistency(se, AggregatorSpec::additive(), act, 10, 0.0, 4), ErrorCode::InvalidArgument);
}

TEST_CASE("counterexamples survive a JSON round trip") {
  std::vector<double> b{1, 2, 3, 4, 5};
  auto ce = lemma1_counterexample(0.5, b);
  auto line = to_json_line(ce);
  auto back = counterexample_from_json(line);
  CHECK(back.input == ce.input);
  CHECK(back.perturbed == ce.perturbed);
  CHECK(back.input_total.identical(ce.input_total));
  CHECK(replay_counterexample(back));

  AxiomVerdict v;
  v.axiom = Axiom::TotalMonotonicity;
  v.status = VerdictStatus::Fail;
  v.trials = 1;
  v.counterexample = ce;
  CHECK(replay_counterexample(counterexample_from_json(to_json_line(v))));

  // a tampered total must not replay
  auto forged = ce;
  forged.perturbed_total.value = ExtendedValue::of(99.0);
  CHECK_FALSE(replay_counterexample(forged));
}

TEST_CASE("degenerate totals round trip through JSON") {
  std::vector<double> z{0, 0, 1}, c{0, 0, 1};
  auto ce = corollary1_counterexample(c, SortOrder::Ascending, z);
  auto back = counterexample_from_json(to_json_line(ce));
  CHECK(back.input_total.identical(ce.input_total));
}

TEST_CASE("suites") {
  auto names = suite_names();
  CHECK(names.size() == 8);
  CHECK(std::find(names.begin(), names.end(), "lemma1") != names.end());

  auto r = run_suites({}, 7, 50);
  CHECK(r.expectations_met());
  CHECK_FALSE(r.entries.empty());
  for (const auto& e : r.entries) {
    CAPTURE(e.verdict.subject);
    CHECK(e.met);
    if (e.verdict.status == VerdictStatus::Fail) {
      REQUIRE(e.verdict.counterexample.has_value());
    } else {
      CHECK(e.verdict.trials > 0);
    }
  }
  CHECK(run_suites({}, 7, 50).to_json_lines() == r.to_json_lines());

  auto lemma = run_suites({"lemma1"}, 7, 20);
  CHECK(lemma.expectations_met());
  for (const auto& e : lemma.entries) CHECK(e.suite == "lemma1");

  // seeds do not depend on the selection
  auto both = run_suites({"anonymity", "lemma1"}, 7, 20);
  std::vector<std::uint64_t> a, b;
  for (const auto& e : lemma.entries) a.push_back(e.verdict.seed);
  for (const auto& e : both.entries) if (e.suite == "lemma1") b.push_back(e.verdict.seed);
  CHECK(a == b);

  CHECK_ERROR_CODE(run_suites({}, 7, 0), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(run_suites({"nope"}, 7, 5), ErrorCode::InvalidArgument);
}

TEST_CASE("transforms never flip a monotonicity verdict") {
  std::mt19937_64 gen(84);
  std::vector<TransformSpec> ts{TransformSpec::mean(), TransformSpec::root(2), TransformSpec::scale(3),
                                TransformSpec::log_base(10)};
  for (int t = 0; t < 60; ++t) {
    std::size_t n = 3 + t % 10;
    auto v = random_vector(gen, n, 0.5, 10.0);
    std::vector<Perturbation> ps;
    for (std::size_t i = 0; i < n; ++i) ps.push_back(Perturbation::delta(i, 0.25));
    for (const auto& base : {AggregatorSpec::additive(), AggregatorSpec::quantile(0.5)}) {
      const bool expected = verify_total_monotonicity(base, v, ps).passed();
      for (const auto& tr : ts) CHECK(verify_total_monotonicity(base.with(tr), v, ps).passed() == expected);
    }
  }
}

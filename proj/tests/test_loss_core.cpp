#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "totalloss/loss_core.hpp"

using namespace totalloss;

namespace {

IndividualLossSpec spec(LossKind k, ZeroActualPolicy p = ZeroActualPolicy::Skip) {
  return IndividualLossSpec{k, p};
}

const LossKind kAllKinds[] = {LossKind::AbsoluteError, LossKind::SquaredError,
                              LossKind::AbsolutePercentageError, LossKind::SquaredPercentageError};

}  // namespace

TEST_CASE("eval_loss worked values") {
  CHECK(eval_loss(spec(LossKind::AbsolutePercentageError), PredictionPair(110, 100)) == 10.0);
  CHECK(eval_loss(spec(LossKind::SquaredError), PredictionPair(3, 7)) == 16.0);
  CHECK(eval_loss(spec(LossKind::AbsoluteError), PredictionPair(3, 7)) == 4.0);
  CHECK(eval_loss(spec(LossKind::SquaredPercentageError), PredictionPair(90, 100)) ==
        doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("eval_loss is zero on a perfect prediction") {
  for (LossKind k : kAllKinds) {
    for (double a : {0.5, 1.0, 100.0, 12345.678}) {
      CHECK(eval_loss(spec(k), PredictionPair(a, a)) == 0.0);
    }
  }
  CHECK(eval_loss(spec(LossKind::AbsoluteError), PredictionPair(0, 0)) == 0.0);
  CHECK(eval_loss(spec(LossKind::SquaredError), PredictionPair(0, 0)) == 0.0);
}

TEST_CASE("percentage loss on a zero actual") {
  CHECK_ERROR_CODE(eval_loss(spec(LossKind::AbsolutePercentageError), PredictionPair(5, 0)),
                   ErrorCode::ZeroActual);
  CHECK_ERROR_CODE(eval_loss(spec(LossKind::SquaredPercentageError), PredictionPair(5, 0)),
                   ErrorCode::ZeroActual);
  CHECK(eval_loss(spec(LossKind::AbsoluteError), PredictionPair(5, 0)) == 5.0);
}

TEST_CASE("pair validation") {
  CHECK_ERROR_CODE(PredictionPair(-1, 2), ErrorCode::NegativeInput);
  CHECK_ERROR_CODE(PredictionPair(1, -2), ErrorCode::NegativeInput);
  CHECK_ERROR_CODE(PredictionPair(NAN, 2), ErrorCode::NonFiniteInput);
  CHECK_ERROR_CODE(PredictionPair(1, INFINITY), ErrorCode::NonFiniteInput);
}

TEST_CASE("losses are finite and nonnegative on random pairs") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1e4);
  for (int i = 0; i < 2000; ++i) {
    double a = u(gen) + 1e-3, p = u(gen);
    for (LossKind k : kAllKinds) {
      double l = eval_loss(spec(k), PredictionPair(p, a));
      CHECK(std::isfinite(l));
      CHECK(l >= 0.0);
    }
  }
}

TEST_CASE("eval_loss_vector") {
  std::vector<PredictionRecord> recs{{"a", 100, 110}, {"b", 200, 190}};
  auto v = eval_loss_vector(spec(LossKind::AbsolutePercentageError), recs);
  REQUIRE(v.size() == 2);
  CHECK(v.losses[0] == 10.0);
  CHECK(v.losses[1] == 5.0);
  CHECK(v.skipped_units.empty());
  CHECK(v.tag == DomainTag::RawLoss);

  SUBCASE("skip policy drops zero actuals") {
    std::vector<PredictionRecord> z{{"a", 100, 110}, {"zero", 0, 3}, {"b", 200, 190}};
    auto s = eval_loss_vector(spec(LossKind::AbsolutePercentageError), z);
    CHECK(s.losses == std::vector<double>{10.0, 5.0});
    CHECK(s.skipped_units == std::vector<std::string>{"zero"});
  }
  SUBCASE("error policy raises") {
    std::vector<PredictionRecord> z{{"a", 100, 110}, {"zero", 0, 3}};
    CHECK_ERROR_CODE(eval_loss_vector(spec(LossKind::AbsolutePercentageError, ZeroActualPolicy::Error), z),
                     ErrorCode::ZeroActual);
  }
  SUBCASE("everything skipped") {
    std::vector<PredictionRecord> z{{"zero", 0, 3}};
    CHECK_ERROR_CODE(eval_loss_vector(spec(LossKind::AbsolutePercentageError), z),
                     ErrorCode::EmptyAfterFiltering);
  }
  SUBCASE("zero actual is fine for non-percentage kinds") {
    std::vector<PredictionRecord> z{{"zero", 0, 3}};
    auto s = eval_loss_vector(spec(LossKind::SquaredError), z);
    CHECK(s.losses == std::vector<double>{9.0});
  }
}

TEST_CASE("impartiality under relabelled units") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(1.0, 500.0);
  std::vector<PredictionRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back({"u" + std::to_string(i), u(gen), u(gen)});
  auto relabelled = recs;
  std::vector<std::string> labels;
  for (auto& r : recs) labels.push_back(r.unit_id);
  std::shuffle(labels.begin(), labels.end(), gen);
  for (std::size_t i = 0; i < relabelled.size(); ++i) relabelled[i].unit_id = "x" + labels[i];
  for (LossKind k : kAllKinds) {
    auto a = eval_loss_vector(spec(k), recs);
    auto b = eval_loss_vector(spec(k), relabelled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_bits(a.losses[i], b.losses[i]));
  }
}

TEST_CASE("pointwise monotonicity worked values") {
  std::vector<double> grid{80, 90, 100, 110, 120};
  auto v = check_pointwise_monotonicity(spec(LossKind::AbsolutePercentageError), 100, grid);
  CHECK(v.passed());
  CHECK(v.trials > 0);
  CHECK(v.axiom == Axiom::PointwiseMonotonicity);

  auto stub = check_pointwise_monotonicity([](double, double) { return 1.0; }, 100, grid);
  CHECK_FALSE(stub.passed());
  REQUIRE(stub.counterexample.has_value());
  CHECK(stub.counterexample->input_total.value == ExtendedValue::of(1.0));
  CHECK(stub.counterexample->perturbed_total.value == ExtendedValue::of(1.0));

  std::vector<double> g0{0, 1, 2};
  CHECK(check_pointwise_monotonicity(spec(LossKind::SquaredError), 0, g0).passed());
}

TEST_CASE("pointwise monotonicity catches a one-sided defect") {
  // flat below the actual, fine above
  auto half = [](double p, double a) { return p < a ? 0.0 : p - a; };
  std::vector<double> grid{1, 2, 3, 4, 5};
  CHECK_FALSE(check_pointwise_monotonicity(half, 3, grid).passed());
}

TEST_CASE("pointwise monotonicity needs a real grid") {
  std::vector<double> g{1, 1};
  CHECK_ERROR_CODE(check_pointwise_monotonicity(spec(LossKind::AbsoluteError), 1, g), ErrorCode::DegenerateGrid);
}

TEST_CASE("pointwise monotonicity holds on random grids") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int t = 0; t < 200; ++t) {
    double a = u(gen) + 1.0;
    std::vector<double> grid{a};
    for (int i = 0; i < 30; ++i) grid.push_back(u(gen));
    std::sort(grid.begin(), grid.end());
    for (LossKind k : kAllKinds) {
      auto v = check_pointwise_monotonicity(spec(k), a, grid);
      CHECK_MESSAGE(v.passed(), to_string(k));
    }
  }
}

TEST_CASE("parsers") {
  CHECK(parse_loss_kind("ape") == LossKind::AbsolutePercentageError);
  CHECK(parse_loss_kind("se") == LossKind::SquaredError);
  CHECK(parse_zero_actual_policy("error") == ZeroActualPolicy::Error);
  CHECK_ERROR_CODE(parse_loss_kind("mse"), ErrorCode::SpecSyntax);
}

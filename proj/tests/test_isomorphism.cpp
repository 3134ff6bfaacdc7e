#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"
#include "totalloss/isomorphism.hpp"

using namespace totalloss;

namespace {

LossVector lv(std::vector<double> v) {
  LossVector out;
  out.losses = std::move(v);
  return out;
}

LossVector random_positive(std::mt19937_64& gen, std::size_t n, double lo = 0.01, double hi = 100.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return lv(std::move(v));
}

int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace

TEST_CASE("to_log_domain") {
  auto l = to_log_domain(lv({1, 2, 3}));
  CHECK(l.tag == DomainTag::LogLoss);
  CHECK(l.log_base == doctest::Approx(std::numbers::e));
  CHECK(l.losses[0] == 0.0);
  CHECK(l.losses[1] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(l.losses[2] == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(aggregate_additive(l.losses).value.finite() == doctest::Approx(std::log(6.0)).epsilon(1e-14));

  auto z = to_log_domain(lv({1, 1, 1}));
  CHECK(z.losses == std::vector<double>{0, 0, 0});

  try {
    to_log_domain(lv({4, 0, 9}));
    FAIL("expected NonPositiveLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveLoss);
    CHECK(e.indices() == std::vector<std::size_t>{1});
  }
  CHECK_ERROR_CODE(to_log_domain(lv({1, 2}), 1.0), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(to_log_domain(to_log_domain(lv({1, 2}))), ErrorCode::TagMismatch);
}

TEST_CASE("to_exp_domain") {
  auto r = to_exp_domain(to_log_domain(lv({1, 2, 3})));
  CHECK(r.tag == DomainTag::RawLoss);
  CHECK(r.losses[0] == 1.0);
  CHECK(r.losses[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.losses[2] == doctest::Approx(3.0).epsilon(1e-15));

  LossVector zeros = lv({0, 0});
  zeros.tag = DomainTag::LogLoss;
  zeros.log_base = std::numbers::e;
  CHECK(to_exp_domain(zeros).losses == std::vector<double>{1, 1});

  CHECK_ERROR_CODE(to_exp_domain(lv({0, 1})), ErrorCode::TagMismatch);
}

TEST_CASE("log/exp round trip") {
  std::mt19937_64 gen(71);
  for (int t = 0; t < 1000; ++t) {
    auto v = random_positive(gen, 1 + t % 30, 1e-6, 1e6);
    for (double b : {std::numbers::e, 2.0, 10.0}) {
      auto back = to_exp_domain(to_log_domain(v, b), b);
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(oracle::rel_close(back.losses[i], v.losses[i], 1e-12));
    }
  }
}

TEST_CASE("shift_positive") {
  auto a = shift_positive(lv({0, 5, 10}));
  CHECK(a.k == 1.0);
  CHECK(a.losses.losses == std::vector<double>{1, 6, 11});
  CHECK(a.losses.shift_k == 1.0);

  auto b = shift_positive(lv({2, 3}));
  CHECK(b.k == 0.0);
  CHECK(b.losses.losses == std::vector<double>{2, 3});

  auto c = shift_positive(lv({0, 0}), 0.5);
  CHECK(c.k == 0.5);
  CHECK(c.losses.losses == std::vector<double>{0.5, 0.5});

  auto d = shift_positive(lv({0, 7}));
  CHECK_NOTHROW(to_log_domain(d.losses));
}

TEST_CASE("log of the product equals the sum of logs") {
  std::mt19937_64 gen(72);
  for (int t = 0; t < 500; ++t) {
    auto v = random_positive(gen, 1 + t % 20, 0.5, 2.0);
    for (double b : {std::numbers::e, 2.0, 10.0}) {
      const double lhs = std::log(oracle::naive_product(v.losses)) / std::log(b);
      const double rhs = aggregate_additive(to_log_domain(v, b).losses).value.finite();
      if (std::abs(lhs) < 1e-300) continue;
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(std::abs(lhs), 1e-6));
    }
  }
}

TEST_CASE("rankings do not depend on the base") {
  std::mt19937_64 gen(73);
  for (int t = 0; t < 300; ++t) {
    auto a = random_positive(gen, 8), b = random_positive(gen, 8);
    int ref = 0;
    bool first = true;
    for (double base : {std::numbers::e, 2.0, 10.0, 1.01, 1000.0}) {
      const double sa = aggregate_additive(to_log_domain(a, base).losses).value.finite();
      const double sb = aggregate_additive(to_log_domain(b, base).losses).value.finite();
      int s = sign_of(sa - sb);
      if (first) ref = s;
      first = false;
      CHECK(s == ref);
    }
  }
}

TEST_CASE("shifting logs by k equals scaling raw losses by b^k") {
  std::mt19937_64 gen(74);
  std::uniform_real_distribution<double> uk(-3.0, 3.0);
  for (int t = 0; t < 300; ++t) {
    auto v = random_positive(gen, 1 + t % 15, 0.1, 10.0);
    const double k = uk(gen);
    for (double b : {std::numbers::e, 2.0, 10.0}) {
      auto logs = to_log_domain(v, b).losses;
      for (auto& x : logs) x += k;
      auto scaled = v.losses;
      for (auto& x : scaled) x *= std::pow(b, k);
      const double via_log = aggregate_additive(logs).value.finite();
      const double via_raw = aggregate_additive(to_log_domain(lv(scaled), b).losses).value.finite();
      CHECK(std::abs(via_log - via_raw) <= 1e-9 * std::max({std::abs(via_log), std::abs(via_raw), 1.0}));
      // and through the multiplicative fold directly
      auto m = aggregate_multiplicative(scaled);
      const double via_product = m.log_value->finite() / std::log(b);
      CHECK(std::abs(via_product - via_log) <= 1e-9 * std::max(std::abs(via_log), 1.0));
    }
  }
}

TEST_CASE("degeneracy and NonPositiveLoss agree") {
  std::mt19937_64 gen(75);
  std::uniform_int_distribution<int> coin(0, 4);
  for (int t = 0; t < 500; ++t) {
    auto v = random_positive(gen, 1 + t % 10);
    for (auto& x : v.losses) if (coin(gen) == 0) x = 0.0;
    const bool degenerate = aggregate_multiplicative(v.losses).degenerate;
    bool raised = false;
    try {
      to_log_domain(v);
    } catch (const Error& e) {
      raised = e.code() == ErrorCode::NonPositiveLoss;
    }
    CHECK(degenerate == raised);
  }
}

TEST_CASE("rank preservation") {
  std::vector<LossVector> a{lv({1, 2, 3}), lv({2, 2, 2})};
  auto va = check_rank_preservation(a);
  CHECK(va.passed());
  CHECK(va.axiom == Axiom::RankIsomorphism);
  CHECK(va.trials > 0);

  std::vector<LossVector> b{lv({1, 2}), lv({1.5, 1.5})};
  CHECK(check_rank_preservation(b).passed());
  // raw additive totals tie, the product and log-sum do not
  CHECK(aggregate_additive(b[0].losses).value == aggregate_additive(b[1].losses).value);
  CHECK(aggregate_multiplicative(b[0].losses).value < aggregate_multiplicative(b[1].losses).value);

  std::vector<LossVector> bad{lv({1, 0}), lv({1, 1})};
  CHECK_ERROR_CODE(check_rank_preservation(bad), ErrorCode::NonPositiveLoss);
}

TEST_CASE("rank preservation on random pairs") {
  std::mt19937_64 gen(76);
  for (int t = 0; t < 500; ++t) {
    std::vector<LossVector> sets{random_positive(gen, 1 + t % 12), random_positive(gen, 1 + t % 12)};
    CHECK(check_rank_preservation(sets).passed());
    CHECK(check_rank_preservation(sets, 10.0).passed());
    // brute force both orderings with the naive product
    const double p0 = oracle::naive_product(sets[0].losses), p1 = oracle::naive_product(sets[1].losses);
    const double s0 = aggregate_additive(to_log_domain(sets[0]).losses).value.finite();
    const double s1 = aggregate_additive(to_log_domain(sets[1]).losses).value.finite();
    if (!oracle::rel_close(p0, p1, 1e-9)) CHECK(sign_of(p0 - p1) == sign_of(s0 - s1));
  }
}

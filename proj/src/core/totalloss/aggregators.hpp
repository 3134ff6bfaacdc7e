#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "totalloss/extended_value.hpp"
#include "totalloss/loss_core.hpp"
#include "totalloss/verdict.hpp"

namespace totalloss {

enum class SortOrder { Ascending, Descending };

struct Additive {};
struct Multiplicative {};
struct Quantile {
  double q = 1.0;
};
struct LType {
  std::vector<double> coefficients;
  SortOrder order = SortOrder::Ascending;

  // All c_i > 0: the variant that still responds to every single loss.
  bool all_positive() const noexcept;
};

using AggregatorKind = std::variant<Additive, Multiplicative, Quantile, LType>;

enum class TransformKind { None, MeanDivideByN, GeometricMeanExpOfMeanLog, Root, Scale, LogBase };

// A strictly increasing map applied to a total. `param` is p for Root,
// s for Scale, b for LogBase and ignored otherwise.
struct TransformSpec {
  TransformKind kind = TransformKind::None;
  double param = 0.0;

  static TransformSpec none() { return {}; }
  static TransformSpec mean() { return {TransformKind::MeanDivideByN, 0.0}; }
  static TransformSpec geometric_mean() { return {TransformKind::GeometricMeanExpOfMeanLog, 0.0}; }
  static TransformSpec root(double p);
  static TransformSpec scale(double s);
  static TransformSpec log_base(double b);
};

// A total-loss functional plus the transforms applied to its value, in order.
struct AggregatorSpec {
  AggregatorKind kind = Additive{};
  std::vector<TransformSpec> transforms;

  static AggregatorSpec additive() { return {Additive{}, {}}; }
  static AggregatorSpec multiplicative() { return {Multiplicative{}, {}}; }
  static AggregatorSpec quantile(double q);
  static AggregatorSpec ltype(std::vector<double> coefficients, SortOrder order = SortOrder::Ascending);

  AggregatorSpec with(TransformSpec t) const;

  bool is_multiplicative() const noexcept { return std::holds_alternative<Multiplicative>(kind); }
};

// Textual spec grammar, shared by the CLI and by serialized counterexamples:
//   aggregator := additive | multiplicative | quantile:<q>
//               | ltype[:asc|:desc][:<c1>,<c2>,...]
//   transform  := none | mean | geomean | root:<p> | scale:<s> | log:<b>
//   spec       := aggregator ( "/" transform )*
std::string to_string(const AggregatorSpec& spec);
std::string to_string(const TransformSpec& t);
AggregatorSpec parse_aggregator_spec(std::string_view text);
TransformSpec parse_transform_spec(std::string_view text);

struct TotalLossResult {
  ExtendedValue value;
  // Natural log of `value`; present for multiplicative totals, where it is
  // the primary quantity and `value` is reconstructed from it.
  std::optional<ExtendedValue> log_value;
  bool degenerate = false;
  std::size_t n_units = 0;
  AggregatorSpec spec;

  TotalSnapshot snapshot() const { return {value, log_value, degenerate}; }
  bool identical(const TotalLossResult& other) const noexcept;
};

// 1-based order-statistic index ceil(q*n), clamped to [1, n]. A product q*n
// within 1e-9 relative of an integer counts as that integer, so decimal
// inputs like q = 0.9, n = 10 select the 9th value.
std::size_t quantile_rank(double q, std::size_t n);

TotalLossResult aggregate_additive(std::span<const double> losses);
TotalLossResult aggregate_multiplicative(std::span<const double> losses);
TotalLossResult aggregate_quantile(std::span<const double> losses, double q);
TotalLossResult aggregate_ltype(std::span<const double> losses, std::span<const double> coefficients,
                                SortOrder order = SortOrder::Ascending);

TotalLossResult apply_transform(const TotalLossResult& result, const TransformSpec& t);

// Dispatches on spec.kind, then applies spec.transforms in order.
TotalLossResult aggregate(const AggregatorSpec& spec, std::span<const double> losses);
inline TotalLossResult aggregate(const AggregatorSpec& spec, const LossVector& losses) {
  return aggregate(spec, losses.view());
}

enum class Preset { MAPE, MEDAPE, RMSE, GMAPE };

std::string_view to_string(Preset preset) noexcept;
std::optional<Preset> parse_preset(std::string_view name);

struct MetricSpec {
  IndividualLossSpec loss;
  AggregatorSpec aggregator;
};

MetricSpec preset_spec(Preset preset, ZeroActualPolicy policy = ZeroActualPolicy::Skip);

struct MetricResult {
  TotalLossResult total;
  LossVector losses;
};

MetricResult evaluate_metric(const MetricSpec& metric, std::span<const PredictionRecord> records);

TotalLossResult preset_metric(Preset preset, std::span<const PredictionRecord> records,
                              ZeroActualPolicy policy = ZeroActualPolicy::Skip);

// Three-way comparison of two totals. Multiplicative totals compare on their
// log values, so products beyond double range still order correctly. Values
// within `rel_tol` relative of each other compare equal.
int compare_totals(const TotalLossResult& a, const TotalLossResult& b, double rel_tol);

// True when `after` exceeds `before` by more than `rel_tol` relative.
bool strictly_increased(const TotalLossResult& before, const TotalLossResult& after, double rel_tol);

}  // namespace totalloss

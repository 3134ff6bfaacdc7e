#include "totalloss/aggregators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "totalloss/error.hpp"
#include "totalloss/numeric_text.hpp"

namespace totalloss {

namespace {

void require_nonempty(std::span<const double> losses) {
  if (losses.empty()) throw Error(ErrorCode::EmptyVector, "loss vector is empty");
}

void require_finite(std::span<const double> losses) {
  for (double x : losses) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "loss is not finite");
  }
}

std::vector<double> sorted_copy(std::span<const double> losses, SortOrder order = SortOrder::Ascending) {
  std::vector<double> out(losses.begin(), losses.end());
  if (order == SortOrder::Ascending) {
    std::sort(out.begin(), out.end());
  } else {
    std::sort(out.begin(), out.end(), std::greater<>());
  }
  return out;
}

double log_in_base(double x, double base) {
  if (base == 2.0) return std::log2(x);
  if (base == 10.0) return std::log10(x);
  return std::log(x) / std::log(base);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double parse_param(std::string_view text, std::string_view what) {
  auto v = parse_double(trim(text));
  if (!v) throw Error(ErrorCode::SpecSyntax, "bad " + std::string(what) + " '" + std::string(text) + "'");
  return *v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

bool LType::all_positive() const noexcept {
  return std::all_of(coefficients.begin(), coefficients.end(), [](double c) { return c > 0.0; });
}

TransformSpec TransformSpec::root(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "root order must be > 0");
  return {TransformKind::Root, p};
}

TransformSpec TransformSpec::scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "scale must be > 0");
  return {TransformKind::Scale, s};
}

TransformSpec TransformSpec::log_base(double b) {
  if (!(b > 1.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "log base must be > 1");
  return {TransformKind::LogBase, b};
}

AggregatorSpec AggregatorSpec::quantile(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::QOutOfRange, "quantile q must lie in (0, 1]");
  return {Quantile{q}, {}};
}

AggregatorSpec AggregatorSpec::ltype(std::vector<double> coefficients, SortOrder order) {
  for (double c : coefficients) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::NegativeCoefficient, "L-type coefficients must be finite and >= 0");
    }
  }
  return {LType{std::move(coefficients), order}, {}};
}

AggregatorSpec AggregatorSpec::with(TransformSpec t) const {
  AggregatorSpec out = *this;
  if (t.kind != TransformKind::None) out.transforms.push_back(t);
  return out;
}

std::string to_string(const TransformSpec& t) {
  switch (t.kind) {
    case TransformKind::None: return "none";
    case TransformKind::MeanDivideByN: return "mean";
    case TransformKind::GeometricMeanExpOfMeanLog: return "geomean";
    case TransformKind::Root: return "root:" + format_double(t.param);
    case TransformKind::Scale: return "scale:" + format_double(t.param);
    case TransformKind::LogBase: return "log:" + format_double(t.param);
  }
  return "?";
}

std::string to_string(const AggregatorSpec& spec) {
  std::string out = std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Additive>) {
          return "additive";
        } else if constexpr (std::is_same_v<K, Multiplicative>) {
          return "multiplicative";
        } else if constexpr (std::is_same_v<K, Quantile>) {
          return "quantile:" + format_double(k.q);
        } else {
          std::string s = k.order == SortOrder::Ascending ? "ltype:asc" : "ltype:desc";
          if (!k.coefficients.empty()) {
            s += ':';
            for (std::size_t i = 0; i < k.coefficients.size(); ++i) {
              if (i) s += ',';
              s += format_double(k.coefficients[i]);
            }
          }
          return s;
        }
      },
      spec.kind);
  for (const auto& t : spec.transforms) out += "/" + to_string(t);
  return out;
}

TransformSpec parse_transform_spec(std::string_view text) {
  const auto parts = split(trim(text), ':');
  const auto head = lowercase(parts[0]);
  if (parts.size() == 1) {
    if (head == "none") return TransformSpec::none();
    if (head == "mean") return TransformSpec::mean();
    if (head == "geomean") return TransformSpec::geometric_mean();
  } else if (parts.size() == 2) {
    if (head == "root") return TransformSpec::root(parse_param(parts[1], "root order"));
    if (head == "scale") return TransformSpec::scale(parse_param(parts[1], "scale"));
    if (head == "log") return TransformSpec::log_base(parse_param(parts[1], "log base"));
  }
  throw Error(ErrorCode::SpecSyntax, "unknown transform '" + std::string(text) + "'");
}

AggregatorSpec parse_aggregator_spec(std::string_view text) {
  const auto stages = split(trim(text), '/');
  const auto parts = split(stages[0], ':');
  const auto head = lowercase(trim(parts[0]));
  AggregatorSpec spec;
  if (head == "additive" && parts.size() == 1) {
    spec = AggregatorSpec::additive();
  } else if (head == "multiplicative" && parts.size() == 1) {
    spec = AggregatorSpec::multiplicative();
  } else if (head == "quantile" && parts.size() == 2) {
    spec = AggregatorSpec::quantile(parse_param(parts[1], "quantile q"));
  } else if (head == "ltype" && parts.size() <= 3) {
    SortOrder order = SortOrder::Ascending;
    std::size_t next = 1;
    if (parts.size() > 1) {
      const auto o = lowercase(trim(parts[1]));
      if (o == "asc" || o == "desc") {
        order = o == "asc" ? SortOrder::Ascending : SortOrder::Descending;
        next = 2;
      }
    }
    if (parts.size() > next + 1) throw Error(ErrorCode::SpecSyntax, "bad ltype spec '" + std::string(text) + "'");
    std::vector<double> coefficients;
    if (parts.size() == next + 1) {
      for (auto c : split(parts[next], ',')) coefficients.push_back(parse_param(c, "coefficient"));
    }
    spec = AggregatorSpec::ltype(std::move(coefficients), order);
  } else {
    throw Error(ErrorCode::SpecSyntax, "unknown aggregator '" + std::string(stages[0]) + "'");
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    const auto t = parse_transform_spec(stages[i]);
    if (t.kind != TransformKind::None) spec.transforms.push_back(t);
  }
  return spec;
}

bool TotalLossResult::identical(const TotalLossResult& other) const noexcept {
  return snapshot().identical(other.snapshot()) && n_units == other.n_units;
}

std::size_t quantile_rank(double q, std::size_t n) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::QOutOfRange, "quantile q must lie in (0, 1]");
  if (n == 0) throw Error(ErrorCode::EmptyVector, "loss vector is empty");
  const double x = q * static_cast<double>(n);
  const double nearest = std::nearbyint(x);
  double rank = std::abs(x - nearest) <= 1e-9 * x ? nearest : std::ceil(x);
  rank = std::clamp(rank, 1.0, static_cast<double>(n));
  return static_cast<std::size_t>(rank);
}

TotalLossResult aggregate_additive(std::span<const double> losses) {
  require_nonempty(losses);
  require_finite(losses);
  double sum = 0.0;
  for (double x : sorted_copy(losses)) sum += x;
  TotalLossResult r;
  r.value = ExtendedValue::of(sum);
  r.n_units = losses.size();
  r.spec = AggregatorSpec::additive();
  return r;
}

TotalLossResult aggregate_multiplicative(std::span<const double> losses) {
  require_nonempty(losses);
  require_finite(losses);
  TotalLossResult r;
  r.n_units = losses.size();
  r.spec = AggregatorSpec::multiplicative();
  for (double x : losses) {
    if (x < 0.0) throw Error(ErrorCode::NegativeInput, "multiplicative total needs nonnegative losses");
  }
  if (std::any_of(losses.begin(), losses.end(), [](double x) { return x == 0.0; })) {
    r.degenerate = true;
    r.value = ExtendedValue::of(0.0);
    r.log_value = ExtendedValue::neg_infinity();
    return r;
  }
  double log_sum = 0.0;
  for (double x : sorted_copy(losses)) log_sum += std::log(x);
  r.log_value = ExtendedValue::of(log_sum);
  // exp overflow lands on the +inf marker; the log stays exact.
  r.value = ExtendedValue::of(std::exp(log_sum));
  return r;
}

TotalLossResult aggregate_quantile(std::span<const double> losses, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::QOutOfRange, "quantile q must lie in (0, 1]");
  require_nonempty(losses);
  require_finite(losses);
  const auto sorted = sorted_copy(losses);
  TotalLossResult r;
  r.value = ExtendedValue::of(sorted[quantile_rank(q, sorted.size()) - 1]);
  r.n_units = losses.size();
  r.spec = AggregatorSpec::quantile(q);
  return r;
}

TotalLossResult aggregate_ltype(std::span<const double> losses, std::span<const double> coefficients,
                                SortOrder order) {
  require_nonempty(losses);
  require_finite(losses);
  if (coefficients.size() != losses.size()) {
    throw Error(ErrorCode::LengthMismatch, "L-type needs " + std::to_string(losses.size()) +
                                               " coefficients, got " + std::to_string(coefficients.size()));
  }
  auto spec = AggregatorSpec::ltype(std::vector<double>(coefficients.begin(), coefficients.end()), order);
  const auto sorted = sorted_copy(losses, order);
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) sum += coefficients[i] * sorted[i];
  TotalLossResult r;
  r.value = ExtendedValue::of(sum);
  r.n_units = losses.size();
  r.spec = std::move(spec);
  return r;
}

namespace {

// Transforms that are affine in log space keep multiplicative totals exact
// without ever forming the raw product.
TotalLossResult transform_log_domain(TotalLossResult r, const TransformSpec& t) {
  const ExtendedValue lv = *r.log_value;
  const double n = static_cast<double>(r.n_units);
  auto set_log = [&r](ExtendedValue next) {
    r.log_value = next;
    r.value = next.is_finite() ? ExtendedValue::of(std::exp(next.finite()))
                               : (next.kind() == ExtendedValue::Kind::NegInfinity ? ExtendedValue::of(0.0)
                                                                                  : ExtendedValue::pos_infinity());
  };
  if (!lv.is_finite()) {
    if (t.kind == TransformKind::LogBase) {
      if (lv.kind() == ExtendedValue::Kind::NegInfinity) {
        throw Error(ErrorCode::LogOfNonPositive, "cannot take the log of a zero total");
      }
      r.value = ExtendedValue::pos_infinity();
      r.log_value.reset();
    }
    // Every other transform fixes 0 and +inf.
    return r;
  }
  const double l = lv.finite();
  switch (t.kind) {
    case TransformKind::None: break;
    case TransformKind::MeanDivideByN: set_log(ExtendedValue::of(l - std::log(n))); break;
    case TransformKind::GeometricMeanExpOfMeanLog: set_log(ExtendedValue::of(l / n)); break;
    case TransformKind::Root: set_log(ExtendedValue::of(l / t.param)); break;
    case TransformKind::Scale: set_log(ExtendedValue::of(l + std::log(t.param))); break;
    case TransformKind::LogBase:
      r.value = ExtendedValue::of(l / std::log(t.param));
      r.log_value.reset();
      break;
  }
  return r;
}

TotalLossResult transform_value(TotalLossResult r, const TransformSpec& t) {
  if (r.value.kind() == ExtendedValue::Kind::PosInfinity) return r;
  if (!r.value.is_finite()) throw Error(ErrorCode::TransformDomain, "total is -inf");
  const double v = r.value.finite();
  const double n = static_cast<double>(r.n_units);
  double out = v;
  switch (t.kind) {
    case TransformKind::None: break;
    case TransformKind::MeanDivideByN: out = v / n; break;
    case TransformKind::GeometricMeanExpOfMeanLog:
      if (v < 0.0) throw Error(ErrorCode::TransformDomain, "geometric mean of a negative total");
      out = v == 0.0 ? 0.0 : std::exp(std::log(v) / n);
      break;
    case TransformKind::Root:
      if (v < 0.0) throw Error(ErrorCode::TransformDomain, "root of a negative total");
      out = t.param == 2.0 ? std::sqrt(v) : std::pow(v, 1.0 / t.param);
      break;
    case TransformKind::Scale: out = v * t.param; break;
    case TransformKind::LogBase:
      if (!(v > 0.0)) throw Error(ErrorCode::LogOfNonPositive, "log transform needs a positive total");
      out = log_in_base(v, t.param);
      break;
  }
  r.value = ExtendedValue::of(out);
  return r;
}

}  // namespace

TotalLossResult apply_transform(const TotalLossResult& result, const TransformSpec& t) {
  TotalLossResult out = result.log_value ? transform_log_domain(result, t) : transform_value(result, t);
  if (t.kind != TransformKind::None) out.spec.transforms.push_back(t);
  return out;
}

TotalLossResult aggregate(const AggregatorSpec& spec, std::span<const double> losses) {
  TotalLossResult r = std::visit(
      [&](const auto& k) -> TotalLossResult {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Additive>) {
          return aggregate_additive(losses);
        } else if constexpr (std::is_same_v<K, Multiplicative>) {
          return aggregate_multiplicative(losses);
        } else if constexpr (std::is_same_v<K, Quantile>) {
          return aggregate_quantile(losses, k.q);
        } else {
          return aggregate_ltype(losses, k.coefficients, k.order);
        }
      },
      spec.kind);
  for (const auto& t : spec.transforms) r = apply_transform(r, t);
  return r;
}

std::string_view to_string(Preset preset) noexcept {
  switch (preset) {
    case Preset::MAPE: return "MAPE";
    case Preset::MEDAPE: return "MEDAPE";
    case Preset::RMSE: return "RMSE";
    case Preset::GMAPE: return "GMAPE";
  }
  return "?";
}

std::optional<Preset> parse_preset(std::string_view name) {
  const auto lower = lowercase(trim(name));
  if (lower == "mape") return Preset::MAPE;
  if (lower == "medape") return Preset::MEDAPE;
  if (lower == "rmse") return Preset::RMSE;
  if (lower == "gmape") return Preset::GMAPE;
  return std::nullopt;
}

MetricSpec preset_spec(Preset preset, ZeroActualPolicy policy) {
  switch (preset) {
    case Preset::MAPE:
      return {{LossKind::AbsolutePercentageError, policy}, AggregatorSpec::additive().with(TransformSpec::mean())};
    case Preset::MEDAPE:
      return {{LossKind::AbsolutePercentageError, policy}, AggregatorSpec::quantile(0.5)};
    case Preset::RMSE:
      return {{LossKind::SquaredError, policy},
              AggregatorSpec::additive().with(TransformSpec::mean()).with(TransformSpec::root(2.0))};
    case Preset::GMAPE:
      return {{LossKind::AbsolutePercentageError, policy},
              AggregatorSpec::multiplicative().with(TransformSpec::geometric_mean())};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset");
}

MetricResult evaluate_metric(const MetricSpec& metric, std::span<const PredictionRecord> records) {
  MetricResult out;
  out.losses = eval_loss_vector(metric.loss, records);
  out.total = aggregate(metric.aggregator, out.losses);
  return out;
}

TotalLossResult preset_metric(Preset preset, std::span<const PredictionRecord> records, ZeroActualPolicy policy) {
  return evaluate_metric(preset_spec(preset, policy), records).total;
}

int compare_totals(const TotalLossResult& a, const TotalLossResult& b, double rel_tol) {
  if (a.log_value && b.log_value) {
    const auto& la = *a.log_value;
    const auto& lb = *b.log_value;
    if (la.is_finite() && lb.is_finite()) {
      const double d = la.finite() - lb.finite();
      if (std::abs(d) <= rel_tol) return 0;
      return d < 0.0 ? -1 : 1;
    }
    if (la.kind() == lb.kind()) return 0;
    return la < lb ? -1 : 1;
  }
  const auto& va = a.value;
  const auto& vb = b.value;
  if (va.is_finite() && vb.is_finite()) {
    const double x = va.finite();
    const double y = vb.finite();
    if (std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y))) return 0;
    return x < y ? -1 : 1;
  }
  if (va.kind() == vb.kind()) return 0;
  return va < vb ? -1 : 1;
}

bool strictly_increased(const TotalLossResult& before, const TotalLossResult& after, double rel_tol) {
  if (before.log_value && after.log_value) {
    const auto& lb = *before.log_value;
    const auto& la = *after.log_value;
    if (lb.is_finite() && la.is_finite()) return la.finite() - lb.finite() > rel_tol;
    return lb < la;
  }
  const auto& vb = before.value;
  const auto& va = after.value;
  if (vb.is_finite() && va.is_finite()) {
    return va.finite() - vb.finite() > rel_tol * std::abs(vb.finite()) && va.finite() > vb.finite();
  }
  return vb < va;
}

}  // namespace totalloss

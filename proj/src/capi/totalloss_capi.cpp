#include "totalloss/totalloss.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "totalloss/aggregators.hpp"
#include "totalloss/axiom_lab.hpp"
#include "totalloss/dataset.hpp"
#include "totalloss/error.hpp"
#include "totalloss/isomorphism.hpp"

struct tl_dataset {
  totalloss::Dataset data;
};

struct tl_metric {
  totalloss::MetricSpec spec;
  std::string preset_name;
  mutable std::string name_cache;
  mutable std::string aggregator_cache;
};

struct tl_report {
  totalloss::SuiteReport report;
  std::string text;
};

namespace {

using totalloss::Error;
using totalloss::ErrorCode;

thread_local std::string last_error;

tl_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return TL_ERR_INVALID_ARGUMENT;
    case ErrorCode::NonFiniteInput: return TL_ERR_NON_FINITE_INPUT;
    case ErrorCode::NegativeInput: return TL_ERR_NEGATIVE_INPUT;
    case ErrorCode::ZeroActual: return TL_ERR_ZERO_ACTUAL;
    case ErrorCode::EmptyAfterFiltering: return TL_ERR_EMPTY_AFTER_FILTERING;
    case ErrorCode::EmptyVector: return TL_ERR_EMPTY_VECTOR;
    case ErrorCode::QOutOfRange: return TL_ERR_Q_OUT_OF_RANGE;
    case ErrorCode::LengthMismatch: return TL_ERR_LENGTH_MISMATCH;
    case ErrorCode::NegativeCoefficient: return TL_ERR_NEGATIVE_COEFFICIENT;
    case ErrorCode::LogOfNonPositive: return TL_ERR_LOG_OF_NON_POSITIVE;
    case ErrorCode::TransformDomain: return TL_ERR_TRANSFORM_DOMAIN;
    case ErrorCode::NonPositiveLoss: return TL_ERR_NON_POSITIVE_LOSS;
    case ErrorCode::TagMismatch: return TL_ERR_TAG_MISMATCH;
    case ErrorCode::DegenerateGrid: return TL_ERR_DEGENERATE_GRID;
    case ErrorCode::NoNonMaximalLoss: return TL_ERR_NO_NON_MAXIMAL_LOSS;
    case ErrorCode::NoConstruction: return TL_ERR_NO_CONSTRUCTION;
    case ErrorCode::MissingColumn: return TL_ERR_MISSING_COLUMN;
    case ErrorCode::UnknownColumn: return TL_ERR_UNKNOWN_COLUMN;
    case ErrorCode::NonNumericCell: return TL_ERR_NON_NUMERIC_CELL;
    case ErrorCode::DuplicateUnitId: return TL_ERR_DUPLICATE_UNIT_ID;
    case ErrorCode::EmptyFile: return TL_ERR_EMPTY_FILE;
    case ErrorCode::Io: return TL_ERR_IO;
    case ErrorCode::SpecSyntax: return TL_ERR_SPEC_SYNTAX;
  }
  return TL_ERR_INTERNAL;
}

tl_status fail(tl_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
tl_status guarded(Body&& body) {
  try {
    body();
    return TL_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TL_ERR_INTERNAL, e.what());
  }
}

tl_value_state state_of(const totalloss::ExtendedValue& v) {
  switch (v.kind()) {
    case totalloss::ExtendedValue::Kind::Finite: return TL_FINITE;
    case totalloss::ExtendedValue::Kind::PosInfinity: return TL_POS_INFINITY;
    case totalloss::ExtendedValue::Kind::NegInfinity: return TL_NEG_INFINITY;
  }
  return TL_ABSENT;
}

tl_total to_c(const totalloss::TotalLossResult& r, std::size_t skipped) {
  tl_total out{};
  out.value = r.value.is_finite() ? r.value.finite() : 0.0;
  out.value_state = state_of(r.value);
  out.log_state = TL_ABSENT;
  if (r.log_value) {
    out.log_value = r.log_value->is_finite() ? r.log_value->finite() : 0.0;
    out.log_state = state_of(*r.log_value);
  }
  out.degenerate = r.degenerate ? 1 : 0;
  out.n_units = r.n_units;
  out.n_skipped = skipped;
  return out;
}

totalloss::ExtendedValue from_c(double v, tl_value_state s) {
  switch (s) {
    case TL_POS_INFINITY: return totalloss::ExtendedValue::pos_infinity();
    case TL_NEG_INFINITY: return totalloss::ExtendedValue::neg_infinity();
    default: return totalloss::ExtendedValue::of(v);
  }
}

totalloss::TotalLossResult from_c(const tl_total& t) {
  totalloss::TotalLossResult r;
  r.value = from_c(t.value, t.value_state);
  if (t.log_state != TL_ABSENT) r.log_value = from_c(t.log_value, t.log_state);
  r.degenerate = t.degenerate != 0;
  r.n_units = t.n_units;
  return r;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* tl_status_name(tl_status status) {
  switch (status) {
    case TL_OK: return "OK";
    case TL_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case TL_ERR_NON_FINITE_INPUT: return "NonFiniteInput";
    case TL_ERR_NEGATIVE_INPUT: return "NegativeInput";
    case TL_ERR_ZERO_ACTUAL: return "ZeroActual";
    case TL_ERR_EMPTY_AFTER_FILTERING: return "EmptyAfterFiltering";
    case TL_ERR_EMPTY_VECTOR: return "EmptyVector";
    case TL_ERR_Q_OUT_OF_RANGE: return "QOutOfRange";
    case TL_ERR_LENGTH_MISMATCH: return "LengthMismatch";
    case TL_ERR_NEGATIVE_COEFFICIENT: return "NegativeCoefficient";
    case TL_ERR_LOG_OF_NON_POSITIVE: return "LogOfNonPositive";
    case TL_ERR_TRANSFORM_DOMAIN: return "TransformDomain";
    case TL_ERR_NON_POSITIVE_LOSS: return "NonPositiveLoss";
    case TL_ERR_TAG_MISMATCH: return "TagMismatch";
    case TL_ERR_DEGENERATE_GRID: return "DegenerateGrid";
    case TL_ERR_NO_NON_MAXIMAL_LOSS: return "NoNonMaximalLoss";
    case TL_ERR_NO_CONSTRUCTION: return "NoConstruction";
    case TL_ERR_MISSING_COLUMN: return "MissingColumn";
    case TL_ERR_UNKNOWN_COLUMN: return "UnknownColumn";
    case TL_ERR_NON_NUMERIC_CELL: return "NonNumericCell";
    case TL_ERR_DUPLICATE_UNIT_ID: return "DuplicateUnitId";
    case TL_ERR_EMPTY_FILE: return "EmptyFile";
    case TL_ERR_IO: return "Io";
    case TL_ERR_SPEC_SYNTAX: return "SpecSyntax";
    case TL_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* tl_last_error(void) { return last_error.c_str(); }

const char* tl_version(void) { return "1.0.0"; }

tl_status tl_dataset_load_csv(const char* path, tl_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tl_dataset{totalloss::parse_dataset(path)};
  });
}

tl_status tl_dataset_parse_csv(const char* text, size_t length, tl_dataset** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new tl_dataset{totalloss::parse_dataset_text(std::string_view(text, length))};
  });
}

void tl_dataset_free(tl_dataset* dataset) { delete dataset; }

size_t tl_dataset_unit_count(const tl_dataset* dataset) { return dataset ? dataset->data.unit_count() : 0; }

size_t tl_dataset_column_count(const tl_dataset* dataset) {
  return dataset ? dataset->data.prediction_columns.size() : 0;
}

const char* tl_dataset_column_name(const tl_dataset* dataset, size_t column) {
  if (!dataset || column >= dataset->data.prediction_columns.size()) return nullptr;
  return dataset->data.prediction_columns[column].name.c_str();
}

const char* tl_dataset_unit_id(const tl_dataset* dataset, size_t unit) {
  if (!dataset || unit >= dataset->data.unit_ids.size()) return nullptr;
  return dataset->data.unit_ids[unit].c_str();
}

tl_status tl_dataset_find_column(const tl_dataset* dataset, const char* name, size_t* column) {
  return guarded([&] {
    require(dataset, "dataset");
    require(name, "name");
    require(column, "column");
    const auto& cols = dataset->data.prediction_columns;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i].name == name) {
        *column = i;
        return;
      }
    }
    throw Error(ErrorCode::UnknownColumn, std::string("no prediction column named '") + name + "'");
  });
}

tl_status tl_metric_preset(const char* name, tl_metric** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    const auto preset = totalloss::parse_preset(name);
    if (!preset) throw Error(ErrorCode::SpecSyntax, std::string("unknown metric preset '") + name + "'");
    *out = new tl_metric{totalloss::preset_spec(*preset), std::string(totalloss::to_string(*preset)), {}, {}};
  });
}

tl_status tl_metric_create(const char* loss, const char* aggregator, tl_metric** out) {
  return guarded([&] {
    require(loss, "loss");
    require(aggregator, "aggregator");
    require(out, "out");
    totalloss::MetricSpec spec;
    spec.loss.kind = totalloss::parse_loss_kind(loss);
    spec.aggregator = totalloss::parse_aggregator_spec(aggregator);
    *out = new tl_metric{std::move(spec), {}, {}, {}};
  });
}

tl_status tl_metric_set_zero_actual(tl_metric* metric, const char* policy) {
  return guarded([&] {
    require(metric, "metric");
    require(policy, "policy");
    metric->spec.loss.zero_actual_policy = totalloss::parse_zero_actual_policy(policy);
  });
}

tl_status tl_metric_set_coefficients(tl_metric* metric, const double* coefficients, size_t count) {
  return guarded([&] {
    require(metric, "metric");
    if (count > 0) require(coefficients, "coefficients");
    auto* lt = std::get_if<totalloss::LType>(&metric->spec.aggregator.kind);
    if (!lt) throw Error(ErrorCode::InvalidArgument, "coefficients apply to L-type aggregators only");
    auto replaced = totalloss::AggregatorSpec::ltype(std::vector<double>(coefficients, coefficients + count), lt->order);
    *lt = std::get<totalloss::LType>(replaced.kind);
  });
}

tl_status tl_metric_add_transform(tl_metric* metric, const char* transform) {
  return guarded([&] {
    require(metric, "metric");
    require(transform, "transform");
    const auto t = totalloss::parse_transform_spec(transform);
    if (t.kind != totalloss::TransformKind::None) metric->spec.aggregator.transforms.push_back(t);
    metric->preset_name.clear();
  });
}

const char* tl_metric_name(const tl_metric* metric) {
  if (!metric) return "";
  if (!metric->preset_name.empty()) return metric->preset_name.c_str();
  metric->name_cache = std::string(totalloss::to_string(metric->spec.loss.kind)) + "/" +
                       totalloss::to_string(metric->spec.aggregator);
  return metric->name_cache.c_str();
}

const char* tl_metric_aggregator(const tl_metric* metric) {
  if (!metric) return "";
  metric->aggregator_cache = totalloss::to_string(metric->spec.aggregator);
  return metric->aggregator_cache.c_str();
}

int tl_metric_is_admissible(const tl_metric* metric) {
  if (!metric) return 0;
  const auto& kind = metric->spec.aggregator.kind;
  if (std::holds_alternative<totalloss::Quantile>(kind)) return 0;
  if (const auto* lt = std::get_if<totalloss::LType>(&kind)) return lt->all_positive() ? 1 : 0;
  return 1;
}

tl_metric* tl_metric_clone(const tl_metric* metric) {
  if (!metric) return nullptr;
  return new (std::nothrow) tl_metric{metric->spec, metric->preset_name, {}, {}};
}

void tl_metric_free(tl_metric* metric) { delete metric; }

tl_status tl_evaluate(const tl_dataset* dataset, size_t column, const tl_metric* metric, tl_total* out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(metric, "metric");
    require(out, "out");
    const auto records = dataset->data.records(column);
    const auto result = totalloss::evaluate_metric(metric->spec, records);
    *out = to_c(result.total, result.losses.skipped_units.size());
  });
}

tl_status tl_unit_losses(const tl_dataset* dataset, size_t column, const tl_metric* metric, double* losses,
                         uint8_t* retained, size_t capacity) {
  return guarded([&] {
    require(dataset, "dataset");
    require(metric, "metric");
    require(losses, "losses");
    require(retained, "retained");
    const auto records = dataset->data.records(column);
    if (capacity < records.size()) throw Error(ErrorCode::LengthMismatch, "output buffers are too small");
    const auto vec = totalloss::eval_loss_vector(metric->spec.loss, records);
    std::size_t next = 0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (skipped < vec.skipped_units.size() && vec.skipped_units[skipped] == records[i].unit_id) {
        losses[i] = 0.0;
        retained[i] = 0;
        ++skipped;
      } else {
        losses[i] = vec.losses[next++];
        retained[i] = 1;
      }
    }
  });
}

tl_status tl_aggregate(const double* losses, size_t count, const tl_metric* metric, tl_total* out) {
  return guarded([&] {
    require(metric, "metric");
    require(out, "out");
    if (count > 0) require(losses, "losses");
    const auto r = totalloss::aggregate(metric->spec.aggregator, std::span<const double>(losses, count));
    *out = to_c(r, 0);
  });
}

tl_status tl_to_log_domain(const double* losses, size_t count, double base, double* out, size_t* bad_index) {
  return guarded([&] {
    if (count > 0) {
      require(losses, "losses");
      require(out, "out");
    }
    totalloss::LossVector v;
    v.losses.assign(losses, losses + count);
    try {
      const auto logged = totalloss::to_log_domain(v, base);
      std::copy(logged.losses.begin(), logged.losses.end(), out);
    } catch (const Error& e) {
      if (bad_index && !e.indices().empty()) *bad_index = e.indices().front();
      throw;
    }
  });
}

int tl_compare_totals(const tl_total* a, const tl_total* b, double rel_tol) {
  if (!a || !b) return 0;
  return totalloss::compare_totals(from_c(*a), from_c(*b), rel_tol);
}

tl_status tl_verify_run(const char* suites, uint64_t seed, size_t trials, tl_report** out) {
  return guarded([&] {
    require(out, "out");
    std::vector<std::string> selection;
    const std::string text = suites ? suites : "all";
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      auto name = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!name.empty()) selection.push_back(name);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    auto report = totalloss::run_suites(selection, seed, trials);
    auto text_out = report.to_json_lines();
    *out = new tl_report{std::move(report), std::move(text_out)};
  });
}

const char* tl_report_text(const tl_report* report) { return report ? report->text.c_str() : ""; }

int tl_report_expectations_met(const tl_report* report) {
  return report && report->report.expectations_met() ? 1 : 0;
}

size_t tl_report_entry_count(const tl_report* report) { return report ? report->report.entries.size() : 0; }

void tl_report_free(tl_report* report) { delete report; }

const char* tl_verify_suite_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : totalloss::suite_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

tl_status tl_counterexample_replay(const char* json_line, int* reproduced) {
  return guarded([&] {
    require(json_line, "json_line");
    require(reproduced, "reproduced");
    const auto ce = totalloss::counterexample_from_json(json_line);
    *reproduced = totalloss::replay_counterexample(ce) ? 1 : 0;
  });
}

}  // extern "C"

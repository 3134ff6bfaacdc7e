#include "cli_app.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "totalloss/totalloss.h"

namespace totalloss::cli {

namespace {

using nlohmann::json;

struct DatasetDeleter {
  void operator()(tl_dataset* d) const { tl_dataset_free(d); }
};
struct MetricDeleter {
  void operator()(tl_metric* m) const { tl_metric_free(m); }
};
struct ReportDeleter {
  void operator()(tl_report* r) const { tl_report_free(r); }
};
using DatasetPtr = std::unique_ptr<tl_dataset, DatasetDeleter>;
using MetricPtr = std::unique_ptr<tl_metric, MetricDeleter>;
using ReportPtr = std::unique_ptr<tl_report, ReportDeleter>;

class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& message) : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

void check(tl_status status, int exit_code) {
  if (status != TL_OK) {
    throw CliError(exit_code, std::string(tl_status_name(status)) + ": " + tl_last_error());
  }
}

enum class Format { Table, Structured };

struct MetricOptions {
  std::vector<std::string> metrics;
  std::string loss;
  std::string agg;
  std::vector<std::string> transforms;
  std::string zero_actual = "skip";
};

struct NamedMetric {
  std::string name;
  MetricPtr metric;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> read_coefficient_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitData, "cannot open coefficient file '" + path + "'");
  std::vector<double> coefficients;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw CliError(kExitData, "coefficient file '" + path + "' line " + std::to_string(line_no) +
                                    ": not a number: '" + token + "'");
    }
    coefficients.push_back(value);
  }
  return coefficients;
}

// `aggregator` may end in an L-type coefficient file: ltype[:asc|:desc]:<path>.
MetricPtr make_metric(const std::string& loss, const std::string& aggregator, const std::vector<std::string>& extra,
                      const std::string& zero_actual) {
  std::vector<std::string> stages;
  std::optional<std::vector<double>> coefficients;
  // A coefficient path may itself contain '/', so try the longest prefix
  // that names a file before splitting off transform stages.
  if (aggregator.rfind("ltype:", 0) == 0) {
    std::string prefix = "ltype";
    std::string rest = aggregator.substr(6);
    for (const char* order : {"asc:", "desc:"}) {
      if (rest.rfind(order, 0) == 0) {
        prefix += ":" + std::string(order, std::strlen(order) - 1);
        rest = rest.substr(std::strlen(order));
      }
    }
    for (auto cut = rest.size(); cut != std::string::npos && cut > 0; cut = rest.rfind('/', cut - 1)) {
      const std::string path = rest.substr(0, cut);
      if (std::filesystem::is_regular_file(path)) {
        coefficients = read_coefficient_file(path);
        stages.push_back(prefix);
        if (cut < rest.size()) {
          for (auto& t : split(rest.substr(cut + 1), '/')) stages.push_back(t);
        }
        break;
      }
    }
  }
  if (!coefficients) stages = split(aggregator, '/');
  if (stages.empty()) stages.push_back("additive");
  const std::string head = stages[0];
  tl_metric* raw = nullptr;
  check(tl_metric_create(loss.c_str(), head.c_str(), &raw), kExitUsage);
  MetricPtr metric(raw);
  if (coefficients) {
    check(tl_metric_set_coefficients(metric.get(), coefficients->data(), coefficients->size()), kExitUsage);
  }
  for (std::size_t i = 1; i < stages.size(); ++i) check(tl_metric_add_transform(metric.get(), stages[i].c_str()), kExitUsage);
  for (const auto& t : extra) check(tl_metric_add_transform(metric.get(), t.c_str()), kExitUsage);
  check(tl_metric_set_zero_actual(metric.get(), zero_actual.c_str()), kExitUsage);
  return metric;
}

std::vector<NamedMetric> build_metrics(const MetricOptions& opts) {
  std::vector<NamedMetric> out;
  for (const auto& text : opts.metrics) {
    tl_metric* raw = nullptr;
    if (tl_metric_preset(text.c_str(), &raw) == TL_OK) {
      MetricPtr metric(raw);
      check(tl_metric_set_zero_actual(metric.get(), opts.zero_actual.c_str()), kExitUsage);
      out.push_back({tl_metric_name(metric.get()), std::move(metric)});
      continue;
    }
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      throw CliError(kExitUsage, "--metric '" + text + "' is neither a preset (MAPE, MEDAPE, RMSE, GMAPE) "
                                 "nor a <loss>/<aggregator>[/<transform>...] spec");
    }
    auto metric = make_metric(text.substr(0, slash), text.substr(slash + 1), {}, opts.zero_actual);
    out.push_back({tl_metric_name(metric.get()), std::move(metric)});
  }
  if (!opts.loss.empty() || !opts.agg.empty() || !opts.transforms.empty()) {
    auto metric = make_metric(opts.loss.empty() ? "ape" : opts.loss, opts.agg.empty() ? "additive" : opts.agg,
                              opts.transforms, opts.zero_actual);
    out.push_back({tl_metric_name(metric.get()), std::move(metric)});
  }
  if (out.empty()) {
    tl_metric* raw = nullptr;
    check(tl_metric_preset("MAPE", &raw), kExitUsage);
    MetricPtr metric(raw);
    check(tl_metric_set_zero_actual(metric.get(), opts.zero_actual.c_str()), kExitUsage);
    out.push_back({"MAPE", std::move(metric)});
  }
  return out;
}

DatasetPtr load_dataset(const std::string& path) {
  tl_dataset* raw = nullptr;
  check(tl_dataset_load_csv(path.c_str(), &raw), kExitData);
  return DatasetPtr(raw);
}

std::vector<std::size_t> resolve_columns(const tl_dataset* ds, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  if (names.empty()) {
    for (std::size_t i = 0; i < tl_dataset_column_count(ds); ++i) cols.push_back(i);
    return cols;
  }
  for (const auto& name : names) {
    std::size_t idx = 0;
    check(tl_dataset_find_column(ds, name.c_str(), &idx), kExitData);
    cols.push_back(idx);
  }
  return cols;
}

json value_json(double v, tl_value_state s) {
  switch (s) {
    case TL_FINITE: return v;
    case TL_POS_INFINITY: return "+inf";
    case TL_NEG_INFINITY: return "-inf";
    case TL_ABSENT: break;
  }
  return nullptr;
}

std::string human(double v, tl_value_state s) {
  switch (s) {
    case TL_POS_INFINITY: return "+inf";
    case TL_NEG_INFINITY: return "-inf";
    case TL_ABSENT: return "-";
    case TL_FINITE: break;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct UnitLosses {
  std::vector<double> losses;
  std::vector<std::uint8_t> retained;
};

UnitLosses unit_losses(const tl_dataset* ds, std::size_t column, const tl_metric* metric) {
  const auto n = tl_dataset_unit_count(ds);
  UnitLosses out{std::vector<double>(n), std::vector<std::uint8_t>(n)};
  check(tl_unit_losses(ds, column, metric, out.losses.data(), out.retained.data(), n), kExitData);
  return out;
}

std::vector<std::string> skipped_ids(const tl_dataset* ds, const UnitLosses& u) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < u.retained.size(); ++i) {
    if (!u.retained[i]) ids.emplace_back(tl_dataset_unit_id(ds, i));
  }
  return ids;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string degenerate_warning(const std::string& metric, const std::string& column) {
  return "warning: " + metric + " on " + column +
         " is degenerate: a zero individual loss forces the multiplicative total to 0 "
         "whatever the other units' errors";
}

struct Row {
  std::string metric;
  std::string column;
  tl_total total;
  std::vector<std::string> skipped;
};

json row_json(const Row& row) {
  json j;
  j["metric"] = row.metric;
  j["column"] = row.column;
  j["value"] = value_json(row.total.value, row.total.value_state);
  j["log_value"] = value_json(row.total.log_value, row.total.log_state);
  j["degenerate"] = row.total.degenerate != 0;
  j["n"] = row.total.n_units;
  j["skipped"] = row.skipped;
  return j;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateOptions {
  std::string file;
  std::vector<std::string> columns;
  MetricOptions metric;
  bool strict_degenerate = false;
  bool per_unit = false;
  Format format = Format::Table;
};

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out) {
  auto ds = load_dataset(opts.file);
  const auto metrics = build_metrics(opts.metric);
  const auto cols = resolve_columns(ds.get(), opts.columns);

  std::vector<Row> rows;
  std::vector<std::pair<std::size_t, UnitLosses>> unit_tables;  // row index -> losses
  bool any_degenerate = false;
  for (const auto& m : metrics) {
    for (auto c : cols) {
      Row row{m.name, tl_dataset_column_name(ds.get(), c), {}, {}};
      check(tl_evaluate(ds.get(), c, m.metric.get(), &row.total), kExitData);
      auto losses = unit_losses(ds.get(), c, m.metric.get());
      row.skipped = skipped_ids(ds.get(), losses);
      any_degenerate = any_degenerate || row.total.degenerate;
      if (opts.per_unit) unit_tables.emplace_back(rows.size(), std::move(losses));
      rows.push_back(std::move(row));
    }
  }

  if (opts.format == Format::Structured) {
    for (const auto& row : rows) out << row_json(row).dump() << '\n';
    for (const auto& row : rows) {
      if (!row.total.degenerate) continue;
      json w;
      w["warning"] = "degenerate";
      w["metric"] = row.metric;
      w["column"] = row.column;
      w["message"] = degenerate_warning(row.metric, row.column);
      out << w.dump() << '\n';
    }
    for (const auto& [r, u] : unit_tables) {
      for (std::size_t i = 0; i < u.losses.size(); ++i) {
        json j;
        j["record"] = "unit_loss";
        j["metric"] = rows[r].metric;
        j["column"] = rows[r].column;
        j["unit_id"] = tl_dataset_unit_id(ds.get(), i);
        j["loss"] = u.retained[i] ? json(u.losses[i]) : json(nullptr);
        j["retained"] = u.retained[i] != 0;
        out << j.dump() << '\n';
      }
    }
  } else {
    std::size_t mw = 6, cw = 6;
    for (const auto& row : rows) {
      mw = std::max(mw, row.metric.size());
      cw = std::max(cw, row.column.size());
    }
    out << pad("metric", mw) << "  " << pad("column", cw) << "  " << pad("value", 12) << "  " << pad("n", 6)
        << "  skipped\n";
    for (const auto& row : rows) {
      out << pad(row.metric, mw) << "  " << pad(row.column, cw) << "  "
          << pad(human(row.total.value, row.total.value_state), 12) << "  " << pad(std::to_string(row.total.n_units), 6)
          << "  " << row.skipped.size() << (row.total.degenerate ? "  DEGENERATE" : "") << '\n';
    }
    for (const auto& row : rows) {
      if (row.total.degenerate) out << degenerate_warning(row.metric, row.column) << '\n';
    }
    for (const auto& [r, u] : unit_tables) {
      out << "\nper-unit losses: " << rows[r].metric << " / " << rows[r].column << '\n';
      for (std::size_t i = 0; i < u.losses.size(); ++i) {
        out << "  " << pad(tl_dataset_unit_id(ds.get(), i), 12) << "  "
            << (u.retained[i] ? human(u.losses[i], TL_FINITE) : std::string("skipped")) << '\n';
      }
    }
  }
  return opts.strict_degenerate && any_degenerate ? kExitDegenerate : kExitOk;
}

// ---- rank -----------------------------------------------------------------

struct RankOptions {
  std::string file;
  std::vector<std::string> columns;
  MetricOptions metric;
  bool strict_degenerate = false;
  Format format = Format::Table;
};

constexpr double kTieTolerance = 1e-9;

int cmd_rank(const RankOptions& opts, std::ostream& out) {
  auto ds = load_dataset(opts.file);
  const auto cols = resolve_columns(ds.get(), opts.columns);
  if (cols.size() < 2) throw CliError(kExitUsage, "rank needs at least two prediction columns");
  auto metrics = build_metrics(opts.metric);
  if (metrics.size() != 1) throw CliError(kExitUsage, "rank takes exactly one metric");
  const auto& m = metrics.front();

  std::vector<Row> rows;
  bool any_degenerate = false;
  for (auto c : cols) {
    Row row{m.name, tl_dataset_column_name(ds.get(), c), {}, {}};
    check(tl_evaluate(ds.get(), c, m.metric.get(), &row.total), kExitData);
    row.skipped = skipped_ids(ds.get(), unit_losses(ds.get(), c, m.metric.get()));
    any_degenerate = any_degenerate || row.total.degenerate;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return tl_compare_totals(&a.total, &b.total, kTieTolerance) < 0;
  });

  std::vector<std::size_t> ranks(rows.size());
  std::vector<bool> tied(rows.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ranks[i] = i + 1;
    if (i > 0 && tl_compare_totals(&rows[i - 1].total, &rows[i].total, kTieTolerance) == 0) {
      ranks[i] = ranks[i - 1];
      tied[i] = tied[i - 1] = true;
    }
  }

  if (opts.format == Format::Structured) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto j = row_json(rows[i]);
      j["rank"] = ranks[i];
      j["tied"] = static_cast<bool>(tied[i]);
      out << j.dump() << '\n';
    }
  } else {
    std::size_t cw = 6;
    for (const auto& row : rows) cw = std::max(cw, row.column.size());
    out << "metric: " << m.name << " (lower is better)\n";
    out << pad("rank", 5) << "  " << pad("column", cw) << "  value\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << pad(std::to_string(ranks[i]), 5) << "  " << pad(rows[i].column, cw) << "  "
          << human(rows[i].total.value, rows[i].total.value_state) << (tied[i] ? "  (tie)" : "")
          << (rows[i].total.degenerate ? "  DEGENERATE" : "") << '\n';
    }
    for (const auto& row : rows) {
      if (row.total.degenerate) out << degenerate_warning(row.metric, row.column) << '\n';
    }
  }
  return opts.strict_degenerate && any_degenerate ? kExitDegenerate : kExitOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyOptions {
  std::vector<std::string> suites;
  std::uint64_t seed = 0;
  std::size_t trials = 200;
  Format format = Format::Table;
};

std::string abbreviate(std::string s, std::size_t width) {
  if (s.size() > width) s = s.substr(0, width - 3) + "...";
  return s;
}

std::string list(const json& values) {
  std::string s = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += values[i].is_number() ? human(values[i].get<double>(), TL_FINITE) : values[i].dump();
  }
  return s + "]";
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out) {
  if (opts.trials == 0) throw CliError(kExitUsage, "--trials must be >= 1");
  std::string selection;
  for (const auto& s : opts.suites) selection += (selection.empty() ? "" : ",") + s;
  if (selection.empty()) selection = "all";

  tl_report* raw = nullptr;
  check(tl_verify_run(selection.c_str(), opts.seed, opts.trials, &raw), kExitUsage);
  ReportPtr report(raw);
  const bool met = tl_report_expectations_met(report.get()) != 0;

  if (opts.format == Format::Structured) {
    out << tl_report_text(report.get());
  } else {
    std::istringstream lines(tl_report_text(report.get()));
    std::string line;
    out << pad("suite", 13) << pad("axiom", 24) << pad("expected", 9) << pad("status", 7) << pad("trials", 8)
        << "subject\n";
    while (std::getline(lines, line)) {
      const auto j = json::parse(line);
      if (j.contains("summary")) {
        out << (met ? "all expectations met" : "UNMET EXPECTATIONS: " + j["unmet"].dump()) << " (" << j["entries"]
            << " checks, seed " << opts.seed << ")\n";
        continue;
      }
      out << pad(j["suite"].get<std::string>(), 13) << pad(j["axiom"].get<std::string>(), 24)
          << pad(j["expected"].get<std::string>(), 9) << pad(j["status"].get<std::string>(), 7)
          << pad(std::to_string(j["trials"].get<std::size_t>()), 8) << abbreviate(j["subject"].get<std::string>(), 60)
          << (j["met"].get<bool>() ? "" : "  <-- UNEXPECTED") << '\n';
      const auto& ce = j["counterexample"];
      if (!ce.is_null()) {
        out << "    input:     " << list(ce["input"]) << '\n'
            << "    perturbed: " << list(ce["perturbed"]) << '\n'
            << "    totals:    " << ce["input_total"]["value"].dump() << " -> "
            << ce["perturbed_total"]["value"].dump() << "  (" << ce["note"].get<std::string>() << ")\n";
      }
    }
  }
  return met ? kExitOk : kExitUsage;
}

// ---- replay ---------------------------------------------------------------

int cmd_replay(const std::string& path, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitData, "cannot open '" + path + "'");
  std::string line;
  std::size_t replayed = 0;
  std::size_t failed = 0;
  while (std::getline(in, line)) {
    if (line.find("\"counterexample\":{") == std::string::npos && line.find("\"input_total\"") == std::string::npos) {
      continue;
    }
    int reproduced = 0;
    check(tl_counterexample_replay(line.c_str(), &reproduced), kExitData);
    ++replayed;
    if (!reproduced) ++failed;
  }
  out << "replayed " << replayed << " counterexample(s), " << (replayed - failed) << " reproduced\n";
  return failed == 0 ? kExitOk : kExitUsage;
}

void add_format_option(CLI::App* cmd, Format& format) {
  const std::map<std::string, Format> formats{{"table", Format::Table}, {"structured", Format::Structured}};
  cmd->add_option("--format", format, "table | structured")->transform(CLI::CheckedTransformer(formats));
}

void add_metric_options(CLI::App* cmd, MetricOptions& m) {
  cmd->add_option("--metric", m.metrics, "preset (MAPE|MEDAPE|RMSE|GMAPE) or <loss>/<aggregator>[/<transform>...]");
  cmd->add_option("--loss", m.loss, "ape | ae | se | spe");
  cmd->add_option("--agg", m.agg, "additive | multiplicative | quantile:<q> | ltype[:asc|:desc]:<coeff-file>");
  cmd->add_option("--transform", m.transforms, "none | mean | geomean | root:<p> | scale:<s> | log:<b>");
  cmd->add_option("--zero-actual", m.zero_actual, "skip | error")->check(CLI::IsMember({"skip", "error"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Total-loss accuracy metrics for nonnegative cross-sectional predictions", "totalloss-cli"};
  app.require_subcommand(1);

  EvaluateOptions eval;
  std::uint64_t unused_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Compute metrics for each prediction column");
  evaluate->add_option("file", eval.file, "CSV with unit_id, actual and prediction columns")->required();
  evaluate->add_option("--column", eval.columns, "prediction column (default: all)");
  add_metric_options(evaluate, eval.metric);
  evaluate->add_flag("--strict-degenerate", eval.strict_degenerate, "exit 3 if any total is degenerate");
  evaluate->add_flag("--per-unit", eval.per_unit, "also print per-unit losses");
  evaluate->add_option("--seed", unused_seed, "accepted for symmetry; evaluation is deterministic");
  add_format_option(evaluate, eval.format);

  RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "Order prediction columns by total loss (lower is better)");
  rank_cmd->add_option("file", rank.file)->required();
  rank_cmd->add_option("--column", rank.columns, "prediction columns to rank (default: all)");
  add_metric_options(rank_cmd, rank.metric);
  rank_cmd->add_flag("--strict-degenerate", rank.strict_degenerate);
  rank_cmd->add_option("--seed", unused_seed);
  add_format_option(rank_cmd, rank.format);

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the axiom verification suites");
  verify_cmd->add_option("--suite", verify.suites, std::string("suite name or 'all': ") + tl_verify_suite_names());
  verify_cmd->add_option("--seed", verify.seed);
  verify_cmd->add_option("--trials", verify.trials, "randomized trials per check");
  add_format_option(verify_cmd, verify.format);

  std::string replay_file;
  auto* replay_cmd = app.add_subcommand("replay", "Re-check counterexamples from a structured verify report");
  replay_cmd->add_option("file", replay_file)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(eval, out);
    if (rank_cmd->parsed()) return cmd_rank(rank, out);
    if (verify_cmd->parsed()) return cmd_verify(verify, out);
    if (replay_cmd->parsed()) return cmd_replay(replay_file, out);
  } catch (const CliError& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return kExitUsage;
}

}  // namespace totalloss::cli

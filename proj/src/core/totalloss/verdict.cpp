#include "totalloss/verdict.hpp"

#include "json.hpp"
#include "totalloss/error.hpp"

namespace totalloss {

using nlohmann::json;

std::string_view to_string(Axiom axiom) noexcept {
  switch (axiom) {
    case Axiom::Anonymity: return "anonymity";
    case Axiom::TotalMonotonicity: return "total_monotonicity";
    case Axiom::PointwiseMonotonicity: return "pointwise_monotonicity";
    case Axiom::FisherConsistency: return "fisher_consistency";
    case Axiom::RankIsomorphism: return "rank_isomorphism";
  }
  return "?";
}

std::string_view to_string(VerdictStatus status) noexcept {
  return status == VerdictStatus::Pass ? "pass" : "fail";
}

bool TotalSnapshot::identical(const TotalSnapshot& other) const noexcept {
  if (degenerate != other.degenerate) return false;
  if (!value.identical(other.value)) return false;
  if (log_value.has_value() != other.log_value.has_value()) return false;
  return !log_value || log_value->identical(*other.log_value);
}

namespace {

json extended_to_json(const ExtendedValue& v) {
  if (v.is_finite()) return v.finite();
  return v.to_string();
}

ExtendedValue extended_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "+inf") return ExtendedValue::pos_infinity();
    if (s == "-inf") return ExtendedValue::neg_infinity();
    throw Error(ErrorCode::SpecSyntax, "bad extended value '" + s + "'");
  }
  return ExtendedValue::of(j.get<double>());
}

json snapshot_to_json(const TotalSnapshot& s) {
  json j;
  j["value"] = extended_to_json(s.value);
  j["log_value"] = s.log_value ? extended_to_json(*s.log_value) : json(nullptr);
  j["degenerate"] = s.degenerate;
  return j;
}

TotalSnapshot snapshot_from_json(const json& j) {
  TotalSnapshot s;
  s.value = extended_from_json(j.at("value"));
  if (!j.at("log_value").is_null()) s.log_value = extended_from_json(j.at("log_value"));
  s.degenerate = j.at("degenerate").get<bool>();
  return s;
}

json counterexample_json(const Counterexample& ce) {
  json j;
  j["aggregator"] = ce.aggregator_spec;
  j["loss"] = ce.loss_spec;
  j["actual"] = ce.actual ? json(*ce.actual) : json(nullptr);
  j["index"] = ce.index ? json(*ce.index) : json(nullptr);
  j["input"] = ce.input;
  j["perturbed"] = ce.perturbed;
  j["input_total"] = snapshot_to_json(ce.input_total);
  j["perturbed_total"] = snapshot_to_json(ce.perturbed_total);
  j["note"] = ce.note;
  return j;
}

}  // namespace

std::string to_json_line(const Counterexample& ce) { return counterexample_json(ce).dump(); }

std::string to_json_line(const AxiomVerdict& verdict) {
  json j;
  j["axiom"] = std::string(to_string(verdict.axiom));
  j["subject"] = verdict.subject;
  j["status"] = std::string(to_string(verdict.status));
  j["trials"] = verdict.trials;
  j["seed"] = verdict.seed;
  j["counterexample"] = verdict.counterexample ? counterexample_json(*verdict.counterexample) : json(nullptr);
  return j.dump();
}

Counterexample counterexample_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SpecSyntax, std::string("counterexample is not valid JSON: ") + e.what());
  }
  // Accept either a bare counterexample or a whole verdict line.
  if (j.contains("counterexample")) j = j.at("counterexample");
  if (j.is_null()) throw Error(ErrorCode::SpecSyntax, "verdict carries no counterexample");
  try {
    Counterexample ce;
    ce.aggregator_spec = j.at("aggregator").get<std::string>();
    ce.loss_spec = j.at("loss").get<std::string>();
    if (!j.at("actual").is_null()) ce.actual = j.at("actual").get<double>();
    if (!j.at("index").is_null()) ce.index = j.at("index").get<std::size_t>();
    ce.input = j.at("input").get<std::vector<double>>();
    ce.perturbed = j.at("perturbed").get<std::vector<double>>();
    ce.input_total = snapshot_from_json(j.at("input_total"));
    ce.perturbed_total = snapshot_from_json(j.at("perturbed_total"));
    ce.note = j.at("note").get<std::string>();
    return ce;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SpecSyntax, std::string("malformed counterexample: ") + e.what());
  }
}

}  // namespace totalloss

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "totalloss/extended_value.hpp"

namespace totalloss {

enum class Axiom {
  Anonymity,
  TotalMonotonicity,
  PointwiseMonotonicity,
  FisherConsistency,
  RankIsomorphism,
};

enum class VerdictStatus { Pass, Fail };

std::string_view to_string(Axiom axiom) noexcept;
std::string_view to_string(VerdictStatus status) noexcept;

// The comparable part of a total: enough to re-check a violation bit for bit.
struct TotalSnapshot {
  ExtendedValue value;
  std::optional<ExtendedValue> log_value;
  bool degenerate = false;

  bool identical(const TotalSnapshot& other) const noexcept;
};

// Two inputs and their totals. `aggregator_spec` and `loss_spec` use the
// textual spec grammar so the pair can be replayed from a report line.
struct Counterexample {
  std::string aggregator_spec;
  std::string loss_spec;
  std::optional<double> actual;  // pointwise checks only
  std::optional<std::size_t> index;
  std::vector<double> input;
  std::vector<double> perturbed;
  TotalSnapshot input_total;
  TotalSnapshot perturbed_total;
  std::string note;
};

struct AxiomVerdict {
  Axiom axiom = Axiom::Anonymity;
  VerdictStatus status = VerdictStatus::Pass;
  std::size_t trials = 0;
  std::optional<Counterexample> counterexample;
  std::uint64_t seed = 0;
  std::string subject;

  bool passed() const noexcept { return status == VerdictStatus::Pass; }
};

// One JSON object per call, no trailing newline. Doubles are written with
// round-trip precision; infinities as the strings "+inf" / "-inf".
std::string to_json_line(const Counterexample& ce);
std::string to_json_line(const AxiomVerdict& verdict);

Counterexample counterexample_from_json(std::string_view text);

}  // namespace totalloss

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "totalloss/loss_core.hpp"

namespace totalloss {

struct PredictionColumn {
  std::string name;
  std::vector<double> values;
};

// Columnar view of a comma-separated file: `unit_id`, `actual`, and every
// other header column as a prediction set.
struct Dataset {
  std::vector<std::string> unit_ids;
  std::vector<double> actuals;
  std::vector<PredictionColumn> prediction_columns;

  std::size_t unit_count() const noexcept { return unit_ids.size(); }
  const PredictionColumn& column(std::string_view name) const;
  std::vector<PredictionRecord> records(std::string_view column_name) const;
  std::vector<PredictionRecord> records(std::size_t column_index) const;
};

Dataset parse_dataset_text(std::string_view text);
Dataset parse_dataset(const std::string& path);

}  // namespace totalloss

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recursep/discretize.hpp"
#include "recursep/history.hpp"
#include "recursep/step_curve.hpp"

namespace recursep {

// Shortest stable decimal rendering used by every CSV writer.
std::string format_number(double v);

struct GridSpec {
  std::optional<TimeGrid> explicit_grid;
  int default_intervals = 100;  // uniform over [0, max observed time]
};

// Long-format ingestion: header `id,arm,type,time` (any column order), one
// row per record, `type` one of event/death/censor. Each subject carries
// exactly one death or censor row; event rows must not come after it in
// time. Schema violations report the offending line number.
Dataset ingest_csv(const std::string& path, const GridSpec& spec = {});

std::vector<RawRecord> parse_long_csv(const std::string& path);

// Canonical long-format export: events at their interval right endpoints,
// deaths at the death-interval endpoint, censoring at the midpoint of the
// first unobserved interval (or at tau for fully observed subjects).
// Re-ingesting on the same grid reproduces the dataset exactly.
void export_csv(const Dataset& dataset, const std::string& path);

// Two-column (time,value) curve export for plotting.
void write_curve_csv(const StepCurve& curve, const std::string& path);

}  // namespace recursep

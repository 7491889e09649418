#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recursep/comparators.hpp"
#include "recursep/separable.hpp"
#include "recursep/simulate.hpp"

namespace recursep {

enum class Direction { two_sided, left, right };
enum class Method { pr_msmat, wa, gl };

std::string direction_name(Direction d);
std::string method_name(Method m);

// One simulation scenario: a data-generating process plus the analysis
// settings every replication uses. Continuous scenarios are discretized onto
// a uniform grid with `analysis_intervals` intervals before analysis.
struct ScenarioConfig {
  std::string name;
  std::optional<DiscreteDGPConfig> discrete;
  std::optional<ContinuousDGPConfig> continuous;
  int analysis_intervals = 60;
  std::vector<double> horizons;  // time values; empty means the grid horizon
  PrMsmatOptions analysis;
  ComparatorOptions comparator;
};

struct CampaignConfig {
  std::vector<ScenarioConfig> scenarios;
  std::vector<Method> methods{Method::pr_msmat};
  std::vector<Direction> directions{Direction::two_sided, Direction::left,
                                    Direction::right};
  int replications = 1000;
  double level = 0.05;
  std::uint64_t seed = 1;
  int parallelism = 0;  // 0 means all available workers
  bool archive_statistics = true;
  bool archive_curves = true;
  // Replication seeds are derived from (seed, scenario index, replication
  // index), so results do not depend on the worker count.
};

CampaignConfig campaign_config_from_json(const std::string& text);

struct RateEntry {
  std::string scenario;
  std::string method;
  std::string direction;
  double tau = 0.0;
  int replications = 0;
  int failures = 0;
  int rejections = 0;
  double rate = 0.0;
  double se = 0.0;
};

struct CurveSummary {
  std::string scenario;
  int arm = 0;
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> se;
};

struct CampaignResult {
  std::vector<RateEntry> rates;
  // Keyed by "scenario/method/tau": the standardized statistics across
  // successful replications, in replication order.
  std::map<std::string, std::vector<double>> statistics;
  std::vector<CurveSummary> curves;  // mean while-alive L(t) per arm
  int failed_replications = 0;
  std::vector<std::string> failure_log;  // scenario, replication, seed, reason
};

CampaignResult run_campaign(const CampaignConfig& config);

// Deterministic result emission (used by the CLI and the acceptance suite).
void write_rates_csv(const CampaignResult& result, const std::string& path);
void write_curves_csv(const CampaignResult& result, const std::string& directory);
std::string campaign_summary_json(const CampaignConfig& config,
                                  const CampaignResult& result);

}  // namespace recursep

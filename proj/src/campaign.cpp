#include "recursep/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "recursep/csv_io.hpp"
#include "recursep/errors.hpp"
#include "recursep/estimators.hpp"
#include "recursep/rng.hpp"
#include "recursep/stats.hpp"
#include "recursep/threading.hpp"

namespace recursep {

std::string direction_name(Direction d) {
  switch (d) {
    case Direction::two_sided: return "two";
    case Direction::left: return "left";
    case Direction::right: return "right";
  }
  return "two";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::pr_msmat: return "PR-MSMaT";
    case Method::wa: return "WA";
    case Method::gl: return "GL";
  }
  return "PR-MSMaT";
}

namespace {

Direction direction_from_name(const std::string& s) {
  if (s == "two" || s == "two-sided" || s == "two_sided") return Direction::two_sided;
  if (s == "left" || s == "left-sided") return Direction::left;
  if (s == "right" || s == "right-sided") return Direction::right;
  throw DataError("unknown direction: " + s);
}

Method method_from_name(const std::string& s) {
  if (s == "PR-MSMaT" || s == "pr-msmat" || s == "pr_msmat") return Method::pr_msmat;
  if (s == "WA" || s == "wa") return Method::wa;
  if (s == "GL" || s == "gl") return Method::gl;
  throw DataError("unknown method: " + s);
}

struct CellOutcome {
  bool ok = false;
  double z = 0.0;
  double p_two = 1.0;
  double p_left = 0.5;
  double p_right = 0.5;
};

struct RepOutcome {
  bool generated = false;
  std::string failure;
  std::vector<CellOutcome> cells;       // methods x horizons, row-major
  std::vector<double> wa_curve[2];      // per-arm L(t) levels
};

double rejection_p(const CellOutcome& c, Direction d) {
  switch (d) {
    case Direction::two_sided: return c.p_two;
    case Direction::left: return c.p_left;
    case Direction::right: return c.p_right;
  }
  return c.p_two;
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config) {
  if (config.replications < 1) throw DataError("campaign needs replications");
  if (config.scenarios.empty()) throw DataError("campaign needs scenarios");
  if (config.methods.empty()) throw DataError("campaign needs methods");

  CampaignResult result;
  const std::size_t workers =
      worker_count(static_cast<std::size_t>(std::max(config.parallelism, 0)));

  for (std::size_t si = 0; si < config.scenarios.size(); ++si) {
    const ScenarioConfig& scenario = config.scenarios[si];
    if (scenario.discrete.has_value() == scenario.continuous.has_value()) {
      throw DataError("scenario " + scenario.name +
                      ": exactly one generator must be configured");
    }
    const std::uint64_t scenario_seed = derive_seed(config.seed, si);
    const int N = config.replications;

    // Resolve the analysis grid and horizon indices once.
    TimeGrid grid = scenario.discrete
                        ? TimeGrid::uniform(
                              scenario.discrete->intervals,
                              static_cast<double>(scenario.discrete->intervals))
                        : TimeGrid::uniform(scenario.analysis_intervals,
                                            scenario.continuous->max_follow_up);
    std::vector<int> horizon_indices;
    if (scenario.horizons.empty()) {
      horizon_indices.push_back(grid.intervals());
    } else {
      for (double h : scenario.horizons) {
        horizon_indices.push_back(grid.horizon_index(h));
      }
    }
    const std::size_t cells_per_rep =
        config.methods.size() * horizon_indices.size();

    std::vector<RepOutcome> outcomes(N);
    parallel_for(N, workers, [&](std::size_t rep) {
      RepOutcome& out = outcomes[rep];
      out.cells.resize(cells_per_rep);
      const std::uint64_t rep_seed = derive_seed(scenario_seed, rep);
      std::optional<Dataset> dataset_slot;
      try {
        if (scenario.discrete) {
          DiscreteDGPConfig dgp = *scenario.discrete;
          dgp.seed = rep_seed;
          dataset_slot = generate_discrete(dgp);
        } else {
          ContinuousDGPConfig dgp = *scenario.continuous;
          dgp.seed = rep_seed;
          dataset_slot = discretize(generate_continuous(dgp), grid,
                                    DeathIntervalEvents::drop);
        }
      } catch (const std::exception& e) {
        out.failure = e.what();
        return;
      }
      const Dataset& dataset = *dataset_slot;
      out.generated = true;

      std::size_t cell = 0;
      for (Method m : config.methods) {
        for (int h : horizon_indices) {
          CellOutcome& c = out.cells[cell++];
          try {
            TestResult t;
            if (m == Method::pr_msmat) {
              PrMsmatOptions opts = scenario.analysis;
              opts.horizon_index = h;
              opts.seed = derive_seed(rep_seed, 101);
              t = pr_msmat_test(dataset, opts);
            } else {
              ComparatorOptions opts = scenario.comparator;
              opts.horizon_index = h;
              opts.seed = derive_seed(rep_seed, 202);
              t = m == Method::wa ? wa_test(dataset, opts)
                                  : gl_test(dataset, opts);
            }
            c.ok = true;
            c.z = t.z;
            c.p_two = t.p_two;
            c.p_left = t.p_left;
            c.p_right = t.p_right;
          } catch (const std::exception& e) {
            c.ok = false;
            if (out.failure.empty()) out.failure = e.what();
          }
        }
      }
      if (config.archive_curves) {
        try {
          for (int arm : {0, 1}) {
            out.wa_curve[arm] = while_alive_curve(dataset, arm).values;
          }
        } catch (const std::exception& e) {
          if (out.failure.empty()) out.failure = e.what();
        }
      }
    });

    // Deterministic aggregation in replication order.
    std::vector<int> scenario_failures_by_cell(cells_per_rep, 0);
    int scenario_failed_reps = 0;
    for (int rep = 0; rep < N; ++rep) {
      const RepOutcome& out = outcomes[rep];
      bool rep_failed = !out.generated;
      for (std::size_t c = 0; c < cells_per_rep; ++c) {
        if (!out.cells[c].ok) {
          ++scenario_failures_by_cell[c];
          rep_failed = true;
        }
      }
      if (rep_failed) {
        ++scenario_failed_reps;
        ++result.failed_replications;
        result.failure_log.push_back(
            scenario.name + " replication=" + std::to_string(rep) +
            " seed=" + std::to_string(derive_seed(scenario_seed, rep)) +
            " reason=" + (out.failure.empty() ? "generation" : out.failure));
      }
    }
    if (scenario_failed_reps * 100 > N) {
      throw NumericError("campaign aborted: scenario " + scenario.name +
                         " failed in more than 1% of replications");
    }

    std::size_t cell = 0;
    for (Method m : config.methods) {
      for (std::size_t hi = 0; hi < horizon_indices.size(); ++hi, ++cell) {
        const double tau = grid.end_of(horizon_indices[hi]);
        std::vector<double> zs;
        zs.reserve(N);
        std::vector<int> rejections(config.directions.size(), 0);
        int completed = 0;
        for (int rep = 0; rep < N; ++rep) {
          const CellOutcome& c = outcomes[rep].cells[cell];
          if (!c.ok) continue;
          ++completed;
          zs.push_back(c.z);
          for (std::size_t di = 0; di < config.directions.size(); ++di) {
            if (rejection_p(c, config.directions[di]) < config.level) {
              ++rejections[di];
            }
          }
        }
        for (std::size_t di = 0; di < config.directions.size(); ++di) {
          RateEntry e;
          e.scenario = scenario.name;
          e.method = method_name(m);
          e.direction = direction_name(config.directions[di]);
          e.tau = tau;
          e.replications = N;
          e.failures = N - completed;
          e.rejections = rejections[di];
          e.rate = completed > 0
                       ? static_cast<double>(rejections[di]) / completed
                       : 0.0;
          e.se = binomial_se(e.rate, static_cast<std::size_t>(completed));
          result.rates.push_back(e);
        }
        if (config.archive_statistics) {
          result.statistics[scenario.name + "/" + method_name(m) + "/" +
                            format_number(tau)] = std::move(zs);
        }
      }
    }

    if (config.archive_curves) {
      for (int arm : {0, 1}) {
        CurveSummary cs;
        cs.scenario = scenario.name;
        cs.arm = arm;
        const int K = grid.intervals();
        cs.time.resize(K);
        cs.mean.assign(K, 0.0);
        cs.se.assign(K, 0.0);
        for (int k = 1; k <= K; ++k) cs.time[k - 1] = grid.end_of(k);
        int m_count = 0;
        for (int rep = 0; rep < N; ++rep) {
          const RepOutcome& out = outcomes[rep];
          if (!out.generated || out.wa_curve[arm].empty()) continue;
          ++m_count;
          for (int k = 0; k < K; ++k) cs.mean[k] += out.wa_curve[arm][k];
        }
        if (m_count > 0) {
          for (int k = 0; k < K; ++k) cs.mean[k] /= m_count;
          for (int rep = 0; rep < N; ++rep) {
            const RepOutcome& out = outcomes[rep];
            if (!out.generated || out.wa_curve[arm].empty()) continue;
            for (int k = 0; k < K; ++k) {
              const double d = out.wa_curve[arm][k] - cs.mean[k];
              cs.se[k] += d * d;
            }
          }
          if (m_count > 1) {
            for (int k = 0; k < K; ++k) {
              cs.se[k] = std::sqrt(cs.se[k] / (m_count - 1) / m_count);
            }
          }
        }
        result.curves.push_back(std::move(cs));
      }
    }
  }
  return result;
}

void write_rates_csv(const CampaignResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "scenario,method,direction,tau,replications,failures,rejections,rate,se\n";
  for (const RateEntry& e : result.rates) {
    out << e.scenario << ',' << e.method << ',' << e.direction << ','
        << format_number(e.tau) << ',' << e.replications << ',' << e.failures
        << ',' << e.rejections << ',' << format_number(e.rate) << ','
        << format_number(e.se) << '\n';
  }
}

void write_curves_csv(const CampaignResult& result,
                      const std::string& directory) {
  for (const CurveSummary& cs : result.curves) {
    const std::string path = directory + "/curves_" + cs.scenario + "_arm" +
                             std::to_string(cs.arm) + ".csv";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "time,mean,se\n";
    for (std::size_t k = 0; k < cs.time.size(); ++k) {
      out << format_number(cs.time[k]) << ',' << format_number(cs.mean[k])
          << ',' << format_number(cs.se[k]) << '\n';
    }
  }
}

std::string campaign_summary_json(const CampaignConfig& config,
                                  const CampaignResult& result) {
  nlohmann::json j;
  j["replications"] = config.replications;
  j["level"] = config.level;
  j["seed"] = config.seed;
  j["failed_replications"] = result.failed_replications;
  j["failures"] = result.failure_log;
  nlohmann::json rates = nlohmann::json::array();
  for (const RateEntry& e : result.rates) {
    rates.push_back({{"scenario", e.scenario},
                     {"method", e.method},
                     {"direction", e.direction},
                     {"tau", e.tau},
                     {"replications", e.replications},
                     {"failures", e.failures},
                     {"rejections", e.rejections},
                     {"rate", e.rate},
                     {"se", e.se}});
  }
  j["rates"] = rates;
  return j.dump(2);
}

namespace {

PrMsmatOptions analysis_from_json(const nlohmann::json& j) {
  PrMsmatOptions opts;
  if (j.contains("a_d")) opts.a_d = j["a_d"].get<int>();
  if (j.contains("variance")) {
    const std::string v = j["variance"].get<std::string>();
    if (v == "plugin") opts.variance = VarianceMethod::plugin;
    else if (v == "bootstrap") opts.variance = VarianceMethod::bootstrap;
    else throw DataError("unknown variance method: " + v);
  }
  if (j.contains("bootstrap_b")) opts.bootstrap_replicates = j["bootstrap_b"].get<int>();
  if (j.contains("truncation")) {
    opts.truncation.lower = j["truncation"][0].get<double>();
    opts.truncation.upper = j["truncation"][1].get<double>();
  }
  if (j.contains("link")) {
    const std::string l = j["link"].get<std::string>();
    if (l == "logit") opts.hazard.link = HazardLink::logit;
    else if (l == "identity") opts.hazard.link = HazardLink::identity;
    else throw DataError("unknown hazard link: " + l);
  }
  if (j.contains("bins")) opts.hazard.time_bins = j["bins"].get<int>();
  if (j.contains("event_slope")) opts.hazard.event_slope = j["event_slope"].get<bool>();
  return opts;
}

}  // namespace

CampaignConfig campaign_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid campaign config: ") + e.what());
  }
  try {
    CampaignConfig config;
    if (j.contains("replications")) config.replications = j["replications"].get<int>();
    if (j.contains("level")) config.level = j["level"].get<double>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("parallelism")) config.parallelism = j["parallelism"].get<int>();
    if (j.contains("archive_curves")) config.archive_curves = j["archive_curves"].get<bool>();
    if (j.contains("methods")) {
      config.methods.clear();
      for (const auto& m : j["methods"]) {
        config.methods.push_back(method_from_name(m.get<std::string>()));
      }
    }
    if (j.contains("directions")) {
      config.directions.clear();
      for (const auto& d : j["directions"]) {
        config.directions.push_back(direction_from_name(d.get<std::string>()));
      }
    }
    if (!j.contains("scenarios")) throw DataError("campaign config needs scenarios");
    for (const auto& s : j["scenarios"]) {
      ScenarioConfig sc;
      sc.name = s.at("name").get<std::string>();
      const auto& dgp = s.at("dgp");
      const std::string type = dgp.at("type").get<std::string>();
      if (type == "discrete") {
        DiscreteDGPConfig d;
        if (dgp.contains("intervals")) d.intervals = dgp["intervals"].get<int>();
        if (dgp.contains("subjects")) d.subjects = dgp["subjects"].get<int>();
        if (dgp.contains("pattern")) {
          const std::string p = dgp["pattern"].get<std::string>();
          if (p == "constant") d.pattern = BaselinePattern::constant;
          else if (p == "decreasing") d.pattern = BaselinePattern::decreasing;
          else if (p == "increasing") d.pattern = BaselinePattern::increasing;
          else throw DataError("unknown baseline pattern: " + p);
        }
        if (dgp.contains("beta_y_a")) d.beta_y_a = dgp["beta_y_a"].get<double>();
        if (dgp.contains("beta_d_0")) d.beta_d_0 = dgp["beta_d_0"].get<double>();
        if (dgp.contains("beta_d_a")) d.beta_d_a = dgp["beta_d_a"].get<double>();
        if (dgp.contains("beta_y_d")) d.beta_y_d = dgp["beta_y_d"].get<double>();
        sc.discrete = d;
      } else if (type == "continuous") {
        ContinuousDGPConfig c;
        if (dgp.contains("base_rate")) c.base_rate = dgp["base_rate"].get<double>();
        if (dgp.contains("step_factor")) c.step_factor = dgp["step_factor"].get<double>();
        if (dgp.contains("epoch_length")) c.epoch_length = dgp["epoch_length"].get<double>();
        if (dgp.contains("max_follow_up")) c.max_follow_up = dgp["max_follow_up"].get<double>();
        if (dgp.contains("rate_ratio")) c.rate_ratio = dgp["rate_ratio"].get<double>();
        if (dgp.contains("hazard_ratio")) c.hazard_ratio = dgp["hazard_ratio"].get<double>();
        if (dgp.contains("control_death_rate")) {
          c.control_death_rate = dgp["control_death_rate"].get<double>();
        }
        if (dgp.contains("subjects")) c.subjects = dgp["subjects"].get<int>();
        sc.continuous = c;
      } else {
        throw DataError("unknown dgp type: " + type);
      }
      if (s.contains("analysis")) {
        const auto& a = s["analysis"];
        sc.analysis = analysis_from_json(a);
        if (a.contains("grid_k")) sc.analysis_intervals = a["grid_k"].get<int>();
        if (a.contains("horizons")) {
          for (const auto& h : a["horizons"]) sc.horizons.push_back(h.get<double>());
        }
      }
      if (s.contains("comparator")) {
        const auto& c = s["comparator"];
        if (c.contains("variance")) {
          const std::string v = c["variance"].get<std::string>();
          if (v == "empirical") sc.comparator.variance = VarianceMethod::empirical;
          else if (v == "bootstrap") sc.comparator.variance = VarianceMethod::bootstrap;
          else throw DataError("unknown comparator variance: " + v);
        }
        if (c.contains("bootstrap_b")) {
          sc.comparator.bootstrap_replicates = c["bootstrap_b"].get<int>();
        }
      }
      config.scenarios.push_back(std::move(sc));
    }
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid campaign config: ") + e.what());
  }
}

}  // namespace recursep

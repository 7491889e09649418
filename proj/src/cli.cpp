#include "recursep/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "recursep/campaign.hpp"
#include "recursep/comparators.hpp"
#include "recursep/csv_io.hpp"
#include "recursep/errors.hpp"
#include "recursep/estimators.hpp"
#include "recursep/separable.hpp"

namespace recursep {

namespace {

struct RunConfig {
  std::string mode;
  std::string input;
  std::string config_path;
  int grid_k = 100;
  std::vector<double> horizons;
  std::vector<std::string> methods{"PR-MSMaT"};
  int a_d = 0;
  std::string variance = "plugin";
  int bootstrap_b = 500;
  double truncate_lower = 0.05;
  double truncate_upper = 20.0;
  std::string link = "logit";
  int bins = 10;
  std::uint64_t seed = 20260809;
  std::string out_dir = ".";
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config-file values fill any field the command line left untouched.
void merge_config_file(RunConfig& cfg, const CLI::App& app,
                       const nlohmann::json& j) {
  const auto untouched = [&](const std::string& flag) {
    return app.get_option(flag)->count() == 0;
  };
  if (j.contains("input") && untouched("--input")) cfg.input = j["input"];
  if (j.contains("grid_k") && untouched("--grid-k")) cfg.grid_k = j["grid_k"];
  if (j.contains("horizons") && untouched("--horizons")) {
    cfg.horizons.clear();
    for (const auto& h : j["horizons"]) cfg.horizons.push_back(h.get<double>());
  }
  if (j.contains("methods") && untouched("--method")) {
    cfg.methods.clear();
    for (const auto& m : j["methods"]) cfg.methods.push_back(m.get<std::string>());
  }
  if (j.contains("a_d") && untouched("--a-d")) cfg.a_d = j["a_d"];
  if (j.contains("variance") && untouched("--variance")) cfg.variance = j["variance"];
  if (j.contains("bootstrap_b") && untouched("--bootstrap-b")) {
    cfg.bootstrap_b = j["bootstrap_b"];
  }
  if (j.contains("truncate") && untouched("--truncate")) {
    cfg.truncate_lower = j["truncate"][0].get<double>();
    cfg.truncate_upper = j["truncate"][1].get<double>();
  }
  if (j.contains("link") && untouched("--link")) cfg.link = j["link"];
  if (j.contains("bins") && untouched("--bins")) cfg.bins = j["bins"];
  if (j.contains("seed") && untouched("--seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out") && untouched("--out")) cfg.out_dir = j["out"];
}

nlohmann::json resolved_config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["mode"] = cfg.mode;
  j["input"] = cfg.input;
  j["grid_k"] = cfg.grid_k;
  j["horizons"] = cfg.horizons;
  j["methods"] = cfg.methods;
  j["a_d"] = cfg.a_d;
  j["variance"] = cfg.variance;
  j["bootstrap_b"] = cfg.bootstrap_b;
  j["truncate"] = {cfg.truncate_lower, cfg.truncate_upper};
  j["link"] = cfg.link;
  j["bins"] = cfg.bins;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void write_manifest(const std::string& out_dir, const nlohmann::json& config,
                    const std::vector<std::string>& files) {
  nlohmann::json j;
  j["config"] = config;
  j["outputs"] = files;
  write_text(out_dir + "/manifest.json", j.dump(2));
}

HazardFitOptions hazard_options(const RunConfig& cfg) {
  HazardFitOptions h;
  if (cfg.link == "logit") h.link = HazardLink::logit;
  else if (cfg.link == "identity") h.link = HazardLink::identity;
  else throw DataError("unknown hazard link: " + cfg.link);
  h.time_bins = cfg.bins;
  return h;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.input.empty()) throw DataError("--input is required for this mode");
  GridSpec spec;
  spec.default_intervals = cfg.grid_k;
  return ingest_csv(cfg.input, spec);
}

bool has_censoring(const Dataset& dataset, int horizon) {
  for (const SubjectHistory& s : dataset.subjects()) {
    if (s.censor_interval && *s.censor_interval <= horizon) return true;
  }
  return false;
}

int run_test_mode(const RunConfig& cfg) {
  const Dataset dataset = load_dataset(cfg);
  std::vector<int> horizons;
  if (cfg.horizons.empty()) {
    horizons.push_back(dataset.intervals());
  } else {
    for (double h : cfg.horizons) {
      if (h > dataset.grid().tau() * (1.0 + 1e-9)) {
        throw DataError("horizon exceeds the grid horizon tau");
      }
      horizons.push_back(dataset.grid().horizon_index(h));
    }
  }

  std::vector<std::string> files;
  std::printf("%-10s %10s %10s %12s\n", "method", "tau", "z", "-log10(p)");
  for (const std::string& method : cfg.methods) {
    for (int h : horizons) {
      TestResult result;
      if (method == "PR-MSMaT") {
        PrMsmatOptions opts;
        opts.a_d = cfg.a_d;
        opts.horizon_index = h;
        opts.variance = cfg.variance == "bootstrap" ? VarianceMethod::bootstrap
                                                    : VarianceMethod::plugin;
        opts.bootstrap_replicates = cfg.bootstrap_b;
        opts.seed = cfg.seed;
        opts.truncation = {cfg.truncate_lower, cfg.truncate_upper};
        opts.hazard = hazard_options(cfg);
        result = pr_msmat_test(dataset, opts);
      } else if (method == "WA" || method == "GL") {
        ComparatorOptions opts;
        opts.horizon_index = h;
        opts.variance = cfg.variance == "bootstrap" || has_censoring(dataset, h)
                            ? VarianceMethod::bootstrap
                            : VarianceMethod::empirical;
        opts.bootstrap_replicates = cfg.bootstrap_b;
        opts.seed = cfg.seed;
        result = method == "WA" ? wa_test(dataset, opts) : gl_test(dataset, opts);
      } else {
        throw DataError("unknown method: " + method);
      }
      const std::string path = cfg.out_dir + "/test_" + method + "_tau" +
                               format_number(result.tau) + ".json";
      write_text(path, result.to_json());
      files.push_back(path);
      std::printf("%-10s %10s %10.3f %12.3f\n", method.c_str(),
                  format_number(result.tau).c_str(), result.z,
                  -std::log10(std::max(result.p_two, 1e-300)));
    }
  }
  write_manifest(cfg.out_dir, resolved_config_json(cfg), files);
  return 0;
}

int run_estimate_mode(const RunConfig& cfg) {
  const Dataset dataset = load_dataset(cfg);
  std::vector<std::string> files;
  const auto save = [&](const StepCurve& curve, const std::string& name) {
    const std::string path = cfg.out_dir + "/" + name + ".csv";
    write_curve_csv(curve, path);
    files.push_back(path);
  };
  for (int arm : {0, 1}) {
    save(kaplan_meier(dataset, arm), "km_arm" + std::to_string(arm));
    save(ghosh_lin_mean(dataset, arm), "gl_arm" + std::to_string(arm));
    save(while_alive_curve(dataset, arm), "wa_arm" + std::to_string(arm));
  }
  const HazardFitOptions hazard = hazard_options(cfg);
  const DeathHazardModel control_model = fit_death_hazard(dataset, 0, hazard);
  const DeathHazardModel treated_model = fit_death_hazard(dataset, 1, hazard);
  const WeightBounds bounds{cfg.truncate_lower, cfg.truncate_upper};
  for (int a_y : {0, 1}) {
    const WeightProcess w = compute_weights(dataset, control_model,
                                            treated_model, a_y, cfg.a_d, bounds);
    const CounterfactualMeanCurve c =
        counterfactual_mean_curve(dataset, a_y, cfg.a_d, w);
    save(StepCurve{dataset.grid(), c.cumulative, CurveKind::cumulative},
         "cf_ay" + std::to_string(a_y) + "_ad" + std::to_string(cfg.a_d));
  }
  write_manifest(cfg.out_dir, resolved_config_json(cfg), files);
  return 0;
}

int run_simulate_mode(const RunConfig& cfg, const CLI::App& app) {
  if (cfg.config_path.empty()) {
    throw DataError("--config is required in simulate mode");
  }
  CampaignConfig campaign = campaign_config_from_json(read_file(cfg.config_path));
  if (app.get_option("--seed")->count() > 0) campaign.seed = cfg.seed;
  const CampaignResult result = run_campaign(campaign);

  std::vector<std::string> files;
  const std::string rates_path = cfg.out_dir + "/results.csv";
  write_rates_csv(result, rates_path);
  files.push_back(rates_path);
  write_curves_csv(result, cfg.out_dir);
  for (const CurveSummary& cs : result.curves) {
    files.push_back(cfg.out_dir + "/curves_" + cs.scenario + "_arm" +
                    std::to_string(cs.arm) + ".csv");
  }
  const std::string summary_path = cfg.out_dir + "/summary.json";
  write_text(summary_path, campaign_summary_json(campaign, result));
  files.push_back(summary_path);

  nlohmann::json manifest_cfg;
  manifest_cfg["mode"] = cfg.mode;
  manifest_cfg["config"] = cfg.config_path;
  manifest_cfg["seed"] = campaign.seed;
  manifest_cfg["out"] = cfg.out_dir;
  write_manifest(cfg.out_dir, manifest_cfg, files);

  for (const RateEntry& e : result.rates) {
    std::printf("%s %s %s tau=%s rate=%.4f (se %.4f)\n", e.scenario.c_str(),
                e.method.c_str(), e.direction.c_str(),
                format_number(e.tau).c_str(), e.rate, e.se);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Recurrent-event treatment effect tests with terminal events"};
  app.name("recursep");

  RunConfig cfg;
  std::string horizons_arg, methods_arg, truncate_arg;
  app.add_option("--mode", cfg.mode, "test | estimate | simulate")->required();
  app.add_option("--input", cfg.input, "long-format CSV input");
  app.add_option("--config", cfg.config_path, "JSON config file");
  app.add_option("--grid-k", cfg.grid_k, "intervals for the default grid");
  app.add_option("--horizons", horizons_arg, "comma-separated horizon times");
  app.add_option("--method", methods_arg, "comma-separated methods");
  app.add_option("--a-d", cfg.a_d, "terminal-pathway component (0 or 1)");
  app.add_option("--variance", cfg.variance, "plugin | bootstrap");
  app.add_option("--bootstrap-b", cfg.bootstrap_b, "bootstrap replicates");
  app.add_option("--truncate", truncate_arg, "weight bounds, e.g. 0.05,20");
  app.add_option("--link", cfg.link, "death hazard link: logit | identity");
  app.add_option("--bins", cfg.bins, "death hazard time bins");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--out", cfg.out_dir, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!horizons_arg.empty()) {
      cfg.horizons.clear();
      for (const std::string& h : split_list(horizons_arg)) {
        cfg.horizons.push_back(std::stod(h));
      }
    }
    if (!methods_arg.empty()) cfg.methods = split_list(methods_arg);
    if (!truncate_arg.empty()) {
      const std::vector<std::string> parts = split_list(truncate_arg);
      if (parts.size() != 2) throw DataError("--truncate expects two values");
      cfg.truncate_lower = std::stod(parts[0]);
      cfg.truncate_upper = std::stod(parts[1]);
    }
    if (!cfg.config_path.empty() && cfg.mode != "simulate") {
      merge_config_file(cfg, app, nlohmann::json::parse(read_file(cfg.config_path)));
    }
    std::filesystem::create_directories(cfg.out_dir);

    if (cfg.mode == "test") return run_test_mode(cfg);
    if (cfg.mode == "estimate") return run_estimate_mode(cfg);
    if (cfg.mode == "simulate") return run_simulate_mode(cfg, app);
    throw DataError("unknown mode: " + cfg.mode);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace recursep

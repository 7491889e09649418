#include <doctest.h>

#include <cmath>

#include "recursep/comparators.hpp"
#include "recursep/errors.hpp"
#include "recursep/estimators.hpp"
#include "recursep/separable.hpp"
#include "recursep/simulate.hpp"

using namespace recursep;

namespace {

SubjectHistory subj(std::string id, int arm, std::vector<int> counts,
                    std::optional<int> death = {},
                    std::optional<int> censor = {}) {
  SubjectHistory s;
  s.id = std::move(id);
  s.arm = arm;
  s.event_counts = std::move(counts);
  s.death_interval = death;
  s.censor_interval = censor;
  return s;
}

Dataset simulated(int seed, int intervals = 60, int subjects = 200) {
  DiscreteDGPConfig config;
  config.intervals = intervals;
  config.subjects = subjects;
  config.beta_d_0 = 2.0 / intervals;
  config.beta_d_a = -0.8 / intervals;
  config.beta_y_d = 0.8 / intervals;
  config.beta_y_a = -0.3 / intervals;
  config.seed = static_cast<std::uint64_t>(seed);
  return generate_discrete(config);
}

// Constant-hazard model stub: predict() returns `level` for every interval
// and event count.
DeathHazardModel constant_model(int arm, double level, int intervals) {
  DeathHazardModel m;
  m.arm = arm;
  m.link = HazardLink::identity;
  m.bin_start = {1, intervals + 1};
  m.alpha = {level};
  m.gamma = 0.0;
  m.diagnostics.converged = true;
  return m;
}

PrMsmatOptions sim_options() {
  PrMsmatOptions opts;
  opts.hazard.link = HazardLink::identity;
  opts.hazard.time_bins = 2;
  return opts;
}

}  // namespace

TEST_CASE("weights are exactly one when the components agree") {
  const Dataset data = simulated(41);
  const DeathHazardModel m0 = fit_death_hazard(data, 0, sim_options().hazard);
  const DeathHazardModel m1 = fit_death_hazard(data, 1, sim_options().hazard);
  for (int a : {0, 1}) {
    const WeightProcess w = compute_weights(data, m0, m1, a, a);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (double v : w.for_subject(i)) CHECK(v == 1.0);
    }
    CHECK(w.truncated_fraction == 0.0);
  }
}

TEST_CASE("weight products match direct evaluation") {
  const TimeGrid grid = TimeGrid::uniform(3, 3.0);
  const Dataset data(grid, {subj("alive", 1, {0, 0, 0}, {}, 3),
                            subj("dies", 1, {0, 0, 0}, 1),
                            subj("ctrl", 0, {0, 0, 0})});
  const DeathHazardModel m0 = constant_model(0, 0.1, 3);
  const DeathHazardModel m1 = constant_model(1, 0.2, 3);
  const WeightProcess w = compute_weights(data, m0, m1, 1, 0);

  // Alive through two intervals: ((1-0.1)/(1-0.2))^2.
  const double survival_ratio = (1.0 - 0.1) / (1.0 - 0.2);
  CHECK(w.at(0, 1) == doctest::Approx(survival_ratio).epsilon(1e-15));
  CHECK(w.at(0, 2) ==
        doctest::Approx(survival_ratio * survival_ratio).epsilon(1e-15));
  CHECK(w.at(0, 2) == doctest::Approx(1.265625).epsilon(1e-12));

  // Death in interval 1: hazard ratio 0.1/0.2.
  CHECK(w.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));

  // Control subjects carry no weights for a_Y = 1.
  CHECK(w.for_subject(2).empty());
}

TEST_CASE("weights depend only on the history up to the interval") {
  const TimeGrid grid = TimeGrid::uniform(4, 4.0);
  DeathHazardModel m0 = constant_model(0, 0.1, 4);
  m0.gamma = 0.02;
  DeathHazardModel m1 = constant_model(1, 0.2, 4);
  m1.gamma = 0.01;
  const Dataset early(grid, {subj("s", 1, {1, 0, 0, 0}), subj("c", 0, {0, 0, 0, 0})});
  const Dataset late(grid, {subj("s", 1, {1, 0, 0, 1}), subj("c", 0, {0, 0, 0, 0})});
  const WeightProcess we = compute_weights(early, m0, m1, 1, 0);
  const WeightProcess wl = compute_weights(late, m0, m1, 1, 0);
  for (int t = 1; t <= 4; ++t) CHECK(we.at(0, t) == wl.at(0, t));
}

TEST_CASE("weight truncation binds and is reported") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("dies", 1, {0, 0}, 1), subj("c", 0, {0, 0})});
  const DeathHazardModel m0 = constant_model(0, 0.01, 2);
  const DeathHazardModel m1 = constant_model(1, 0.5, 2);
  // Death factor 0.01/0.5 = 0.02 falls below the default lower bound.
  const WeightProcess w = compute_weights(data, m0, m1, 1, 0);
  CHECK(w.at(0, 1) == 0.05);
  CHECK(w.truncated_fraction == doctest::Approx(1.0));

  // Wider bounds leave the raw value untouched.
  const WeightProcess wide =
      compute_weights(data, m0, m1, 1, 0, WeightBounds{1e-6, 1e6});
  CHECK(wide.at(0, 1) == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("counterfactual curve reduces to ghosh-lin when components agree") {
  const Dataset data = simulated(43);
  const DeathHazardModel m0 = fit_death_hazard(data, 0, sim_options().hazard);
  const DeathHazardModel m1 = fit_death_hazard(data, 1, sim_options().hazard);
  for (int a : {0, 1}) {
    const WeightProcess w = compute_weights(data, m0, m1, a, a);
    const CounterfactualMeanCurve curve = counterfactual_mean_curve(data, a, a, w);
    const std::vector<double> gl = ghosh_lin_increments(data, a);
    for (int t = 1; t <= data.intervals(); ++t) {
      CHECK(std::abs(curve.increments[t - 1] - gl[t - 1]) <= 1e-12);
    }
  }
}

TEST_CASE("counterfactual increment follows the weighted display") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("p", 1, {0, 1}), subj("q", 1, {0, 0}, 2),
                            subj("c", 0, {0, 0})});
  WeightProcess w;
  w.a_y = 1;
  w.a_d = 0;
  w.per_subject_.resize(data.size());
  w.per_subject_[0] = {1.0, 2.0};  // weight 2 in the event interval
  w.per_subject_[1] = {1.0, 1.0};
  const CounterfactualMeanCurve curve = counterfactual_mean_curve(data, 1, 0, w);
  // Both subjects at risk in interval 2, S(t_2) = 0.5, weighted events 2.
  CHECK(curve.survival[1] == doctest::Approx(0.5));
  CHECK(curve.increments[1] == doctest::Approx(0.5).epsilon(1e-15));

  WeightProcess mismatched = w;
  mismatched.a_d = 1;
  CHECK_THROWS_AS(counterfactual_mean_curve(data, 1, 0, mismatched), DataError);
}

TEST_CASE("proportional-rate fit on constructed curves") {
  const Dataset data = simulated(47);
  const DeathHazardModel m0 = fit_death_hazard(data, 0, sim_options().hazard);
  const DeathHazardModel m1 = fit_death_hazard(data, 1, sim_options().hazard);
  const WeightProcess w0 = compute_weights(data, m0, m1, 0, 0);
  const CounterfactualMeanCurve c0 = counterfactual_mean_curve(data, 0, 0, w0);
  const int h = data.intervals();

  // Identical curves: beta = 0.
  CounterfactualMeanCurve c1 = c0;
  c1.a_y = 1;
  CHECK(fit_pr_msm(c1, c0, data, h).beta_hat == doctest::Approx(0.0));
  CHECK(score_statistic(c1, c0, data, h) == doctest::Approx(0.0));

  // Doubling every increment: beta = log 2, and the constant factor pulls out.
  for (double& v : c1.increments) v *= 2.0;
  const PrMsmFit fit = fit_pr_msm(c1, c0, data, h);
  CHECK_FALSE(fit.at_boundary);
  CHECK(fit.beta_hat == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Zero treated curve is flagged as a boundary estimate.
  for (double& v : c1.increments) v = 0.0;
  CHECK(fit_pr_msm(c1, c0, data, h).at_boundary);

  // No events in the control curve is an error.
  CounterfactualMeanCurve empty = c0;
  for (double& v : empty.increments) v = 0.0;
  CounterfactualMeanCurve t = c0;
  t.a_y = 1;
  CHECK_THROWS_AS(fit_pr_msm(t, empty, data, h), NumericError);
}

TEST_CASE("score statistic on a single-interval toy") {
  const TimeGrid grid = TimeGrid::uniform(1, 1.0);
  std::vector<SubjectHistory> subjects;
  for (int i = 0; i < 5; ++i) subjects.push_back(subj("t" + std::to_string(i), 1, {0}));
  subjects.push_back(subj("c", 0, {0}));
  const Dataset data(grid, subjects);

  CounterfactualMeanCurve c1{1, 0, grid, {0.3}, {0.3}, {1.0}, {0.3}};
  CounterfactualMeanCurve c0{0, 0, grid, {0.1}, {0.1}, {1.0}, {0.1}};
  CHECK(score_statistic(c1, c0, data, 1) == doctest::Approx(1.0).epsilon(1e-15));

  // Swapping the curve roles negates the score.
  CounterfactualMeanCurve s1 = c0;
  s1.a_y = 1;
  CounterfactualMeanCurve s0 = c1;
  s0.a_y = 0;
  CHECK(score_statistic(s1, s0, data, 1) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("estimating equation vanishes at the fitted coefficient") {
  const Dataset data = simulated(53);
  PrMsmatOptions opts = sim_options();
  const TestResult r = pr_msmat_test(data, opts);
  const DeathHazardModel m0 = fit_death_hazard(data, 0, opts.hazard);
  const DeathHazardModel m1 = fit_death_hazard(data, 1, opts.hazard);
  const WeightProcess w1 = compute_weights(data, m0, m1, 1, 0);
  const WeightProcess w0 = compute_weights(data, m0, m1, 0, 0);
  const CounterfactualMeanCurve c1 = counterfactual_mean_curve(data, 1, 0, w1);
  const CounterfactualMeanCurve c0 = counterfactual_mean_curve(data, 0, 0, w0);
  const double beta = fit_pr_msm(c1, c0, data, data.intervals()).beta_hat;
  CHECK(beta == doctest::Approx(r.effect_estimate).epsilon(1e-12));

  double lhs = 0.0;
  for (int t = 1; t <= data.intervals(); ++t) {
    lhs += data.at_risk_count(1, t) *
           (c1.increments[t - 1] - std::exp(beta) * c0.increments[t - 1]);
  }
  CHECK(std::abs(lhs) <= 1e-10);
}

TEST_CASE("plugin variance single-event oracle") {
  const TimeGrid grid = TimeGrid::uniform(1, 1.0);
  std::vector<SubjectHistory> subjects;
  subjects.push_back(subj("t0", 1, {1}));
  for (int i = 1; i < 4; ++i) subjects.push_back(subj("t" + std::to_string(i), 1, {0}));
  for (int i = 0; i < 3; ++i) subjects.push_back(subj("c" + std::to_string(i), 0, {0}));
  const Dataset data(grid, subjects);

  WeightProcess w1;
  w1.a_y = 1;
  w1.a_d = 0;
  w1.per_subject_.resize(data.size());
  for (std::size_t i = 0; i < 4; ++i) w1.per_subject_[i] = {1.0};
  WeightProcess w0;
  w0.a_y = 0;
  w0.a_d = 0;
  w0.per_subject_.resize(data.size());
  for (std::size_t i = 4; i < 7; ++i) w0.per_subject_[i] = {1.0};

  const CounterfactualMeanCurve c1 = counterfactual_mean_curve(data, 1, 0, w1);
  const CounterfactualMeanCurve c0 = counterfactual_mean_curve(data, 0, 0, w0);
  // One event, S = 1, W = 1, Q = D_1: psi = n, variance = n^2 / n^2 = 1.
  CHECK(plugin_variance(data, c1, c0, w1, w0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("no events yields zero plugin variance and a degenerate test error") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("t", 1, {0, 0}), subj("c", 0, {0, 0})});
  PrMsmatOptions opts = sim_options();
  CHECK_THROWS_AS(pr_msmat_test(data, opts), NumericError);
}

TEST_CASE("mirrored arms give a zero score and p-value one") {
  DiscreteDGPConfig config;
  config.intervals = 40;
  config.subjects = 60;
  config.beta_d_0 = 0.03;
  config.beta_d_a = -0.01;
  config.beta_y_d = 0.01;
  config.seed = 59;
  const Dataset base = generate_discrete(config);
  std::vector<SubjectHistory> mirrored;
  for (const SubjectHistory& s : base.subjects()) {
    SubjectHistory in_treated = s;
    in_treated.id += "_t";
    in_treated.arm = 1;
    SubjectHistory in_control = s;
    in_control.id += "_c";
    in_control.arm = 0;
    mirrored.push_back(std::move(in_treated));
    mirrored.push_back(std::move(in_control));
  }
  const Dataset data(base.grid(), mirrored);
  const TestResult r = pr_msmat_test(data, sim_options());
  CHECK(r.statistic == 0.0);
  CHECK(r.z == 0.0);
  CHECK(r.p_two == doctest::Approx(1.0));
}

TEST_CASE("arm relabeling negates the score under matched risk sets") {
  // Pairs share exit patterns so the at-risk processes of the two arms are
  // identical, which makes the relabeling antisymmetry exact.
  DiscreteDGPConfig config;
  config.intervals = 30;
  config.subjects = 80;
  config.beta_d_0 = 0.04;
  config.beta_d_a = 0.0;
  config.beta_y_d = 0.0;
  config.beta_y_a = -0.02;
  config.seed = 61;
  const Dataset base = generate_discrete(config);
  std::vector<SubjectHistory> paired;
  int idx = 0;
  for (const SubjectHistory& s : base.subjects()) {
    SubjectHistory treated = s;
    treated.id = "p" + std::to_string(idx) + "_t";
    treated.arm = 1;
    SubjectHistory control = base.subject((idx + 7) % base.size());
    control.id = "p" + std::to_string(idx) + "_c";
    control.arm = 0;
    // Align the exit pattern of the pair.
    control.death_interval = treated.death_interval;
    control.censor_interval = treated.censor_interval;
    if (control.death_interval) {
      for (int k = *control.death_interval; k <= base.intervals(); ++k) {
        control.event_counts[k - 1] = 0;
      }
    }
    paired.push_back(std::move(treated));
    paired.push_back(std::move(control));
    ++idx;
  }
  const Dataset data(base.grid(), paired);

  std::vector<SubjectHistory> flipped = data.subjects();
  for (SubjectHistory& s : flipped) s.arm = 1 - s.arm;
  const Dataset mirror(data.grid(), flipped);

  PrMsmatOptions opts = sim_options();
  opts.a_d = 0;
  PrMsmatOptions opts_flipped = opts;
  opts_flipped.a_d = 1;

  const TestResult r = pr_msmat_test(data, opts);
  const TestResult rf = pr_msmat_test(mirror, opts_flipped);
  CHECK(rf.statistic == doctest::Approx(-r.statistic).epsilon(1e-10));
  CHECK(rf.effect_estimate == doctest::Approx(-r.effect_estimate).epsilon(1e-10));
}

TEST_CASE("widening unused truncation bounds changes nothing") {
  const Dataset data = simulated(67);
  PrMsmatOptions narrow = sim_options();
  narrow.truncation = {0.05, 20.0};
  PrMsmatOptions wide = sim_options();
  wide.truncation = {0.001, 1000.0};
  const TestResult a = pr_msmat_test(data, narrow);
  CHECK(*a.truncated_fraction == 0.0);
  const TestResult b = pr_msmat_test(data, wide);
  CHECK(a.statistic == b.statistic);
  CHECK(a.variance == b.variance);
  CHECK(a.effect_estimate == b.effect_estimate);
}

TEST_CASE("bootstrap variance is deterministic and degenerates to zero") {
  const Dataset data = simulated(71, 40, 120);
  PrMsmatOptions opts = sim_options();
  const double v1 = bootstrap_variance(data, opts, 25, 99);
  const double v2 = bootstrap_variance(data, opts, 25, 99);
  CHECK(v1 == v2);
  CHECK(v1 > 0.0);
  CHECK_THROWS_AS(bootstrap_variance(data, opts, 1, 99), DataError);

  // One subject per arm: every resample is identical.
  const TimeGrid grid = TimeGrid::uniform(3, 3.0);
  const Dataset tiny(grid, {subj("t", 1, {1, 0, 0}), subj("c", 0, {0, 1, 0})});
  BootstrapReport report;
  const double v0 = bootstrap_variance(tiny, opts, 2, 5, &report);
  CHECK(v0 == 0.0);
  CHECK(report.completed == 2);
}

TEST_CASE("pr-msmat test output is internally consistent") {
  const Dataset data = simulated(73);
  PrMsmatOptions opts = sim_options();
  const TestResult r = pr_msmat_test(data, opts);
  CHECK(std::isfinite(r.z));
  CHECK(r.variance > 0.0);
  CHECK(r.p_two == doctest::Approx(2.0 * (1.0 - 0.5 * std::erfc(-(-std::abs(r.z)) / std::sqrt(2.0)))).epsilon(1e-12));
  CHECK(r.p_left + r.p_right == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.p_two >= 0.0);
  CHECK(r.p_two <= 1.0);
  CHECK(r.method == "PR-MSMaT");
  CHECK(r.a_d == 0);
  const std::string json = r.to_json();
  CHECK(json.find("\"method\"") != std::string::npos);
  CHECK(json.find("\"p_two\"") != std::string::npos);
}

TEST_CASE("comparator tests behave on simulated data") {
  const Dataset data = simulated(79);
  ComparatorOptions opts;
  const TestResult wa = wa_test(data, opts);
  CHECK(std::isfinite(wa.z));
  CHECK(wa.method == "WA");
  CHECK(wa.variance > 0.0);

  const TestResult gl = gl_test(data, opts);
  CHECK(std::isfinite(gl.z));
  CHECK(gl.method == "GL");

  // Bootstrap path agrees in sign and is deterministic.
  ComparatorOptions boot;
  boot.variance = VarianceMethod::bootstrap;
  boot.bootstrap_replicates = 30;
  const TestResult wb1 = wa_test(data, boot);
  const TestResult wb2 = wa_test(data, boot);
  CHECK(wb1.z == wb2.z);
  CHECK((wb1.effect_estimate > 0) == (wa.effect_estimate > 0));
}

TEST_CASE("empirical comparator variance refuses censored data") {
  const TimeGrid grid = TimeGrid::uniform(4, 4.0);
  const Dataset data(grid, {subj("t", 1, {1, 0, 0, 0}, {}, 3),
                            subj("t2", 1, {0, 1, 0, 0}),
                            subj("c", 0, {1, 0, 0, 0}),
                            subj("c2", 0, {0, 0, 1, 0})});
  ComparatorOptions opts;
  CHECK_THROWS_AS(wa_test(data, opts), DataError);
}

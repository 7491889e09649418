#include <doctest.h>

#include <cmath>

#include "recursep/errors.hpp"
#include "recursep/estimators.hpp"
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

Dataset small_simulated(int seed, int intervals = 50, int subjects = 120) {
  DiscreteDGPConfig config;
  config.intervals = intervals;
  config.subjects = subjects;
  config.beta_d_0 = 3.0 / intervals;
  config.beta_d_a = -1.0 / intervals;
  config.beta_y_d = 1.0 / intervals;
  config.seed = static_cast<std::uint64_t>(seed);
  return generate_discrete(config);
}

}  // namespace

TEST_CASE("nelson-aalen on hand-checked data") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("a", 1, {1, 0}), subj("b", 1, {1, 2}),
                            subj("c", 0, {0, 0})});
  const StepCurve na = nelson_aalen_events(data, 1);
  CHECK(na.at(1) == doctest::Approx(1.0));
  CHECK(na.at(2) == doctest::Approx(2.0));

  // No events: flat zero.
  const StepCurve zero = nelson_aalen_events(data, 0);
  CHECK(zero.at(1) == 0.0);
  CHECK(zero.at(2) == 0.0);
}

TEST_CASE("nelson-aalen stops accruing once the risk set empties") {
  const TimeGrid grid = TimeGrid::uniform(3, 3.0);
  const Dataset data(grid, {subj("a", 1, {1, 0, 0}, 2), subj("c", 0, {0, 0, 0})});
  const StepCurve na = nelson_aalen_events(data, 1);
  CHECK(na.at(1) == doctest::Approx(1.0));
  CHECK(na.at(2) == doctest::Approx(1.0));
  CHECK(na.at(3) == doctest::Approx(1.0));  // empty risk set adds zero
}

TEST_CASE("kaplan-meier on hand-checked data") {
  const TimeGrid grid = TimeGrid::uniform(3, 3.0);
  const Dataset data(grid,
                     {subj("a", 1, {0, 0, 0}, 2), subj("b", 1, {0, 0, 0}, 3),
                      subj("c", 1, {0, 0, 0}), subj("d", 1, {0, 0, 0}),
                      subj("z", 0, {0, 0, 0})});
  const StepCurve km = kaplan_meier(data, 1);
  CHECK(km.at(1) == doctest::Approx(1.0));
  CHECK(km.at(2) == doctest::Approx(0.75));
  CHECK(km.at(3) == doctest::Approx(0.5));

  // No deaths: survival stays at one.
  CHECK(kaplan_meier(data, 0).at(3) == 1.0);
}

TEST_CASE("kaplan-meier collapses when everyone dies immediately") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("a", 1, {0, 0}, 1), subj("b", 1, {0, 0}, 1),
                            subj("z", 0, {0, 0})});
  const StepCurve km = kaplan_meier(data, 1);
  CHECK(km.at(1) == 0.0);
  CHECK(km.at(2) == 0.0);
}

TEST_CASE("kaplan-meier equals the empirical survival fraction without censoring") {
  const Dataset data = small_simulated(19);
  for (int arm : {0, 1}) {
    const StepCurve km = kaplan_meier(data, arm);
    const double n_arm = static_cast<double>(data.arm_counts()[arm]);
    for (int k = 1; k <= data.intervals(); ++k) {
      int alive = 0;
      for (const SubjectHistory& s : data.subjects()) {
        if (s.arm == arm && (!s.death_interval || *s.death_interval > k)) {
          ++alive;
        }
      }
      CHECK(km.at(k) == doctest::Approx(alive / n_arm).epsilon(1e-12));
    }
  }
}

TEST_CASE("ghosh-lin has no correction without deaths and lies below nelson-aalen") {
  const TimeGrid grid = TimeGrid::uniform(3, 3.0);
  const Dataset nodeaths(grid, {subj("a", 1, {1, 0, 2}), subj("b", 1, {0, 1, 0}),
                                subj("z", 0, {0, 0, 0})});
  const StepCurve gl = ghosh_lin_mean(nodeaths, 1);
  const StepCurve na = nelson_aalen_events(nodeaths, 1);
  for (int k = 1; k <= 3; ++k) CHECK(gl.at(k) == na.at(k));

  const Dataset data = small_simulated(23);
  for (int arm : {0, 1}) {
    const StepCurve g = ghosh_lin_mean(data, arm);
    const StepCurve n = nelson_aalen_events(data, arm);
    for (int k = 1; k <= data.intervals(); ++k) {
      CHECK(g.at(k) <= n.at(k) + 1e-12);
    }
  }
}

TEST_CASE("ghosh-lin hand example with a same-interval death") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("a", 1, {1, 0}), subj("b", 1, {0, 0}, 1),
                            subj("z", 0, {0, 0})});
  const StepCurve gl = ghosh_lin_mean(data, 1);
  // S(t_1) = 0.5 and one event among two at risk.
  CHECK(gl.at(1) == doctest::Approx(0.25));
}

TEST_CASE("while-alive loss on the two-subject oracle") {
  const TimeGrid grid = TimeGrid::uniform(4, 4.0);
  const Dataset data(grid, {subj("a", 1, {1, 0, 1, 0}),
                            subj("b", 1, {1, 0, 0, 0}, 2),
                            subj("z", 0, {0, 0, 0, 0})});
  const WhileAliveResult wa = while_alive_loss(data, 1, 4);
  // Mean events 1.5 over mean restricted lifetime (4 + 2) / 2 = 3.
  CHECK(wa.walr == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(wa.sccl == doctest::Approx(2.0).epsilon(1e-12));

  // No events: zero loss rate.
  const WhileAliveResult none = while_alive_loss(data, 0, 4);
  CHECK(none.walr == 0.0);
  CHECK(none.sccl == 0.0);

  CHECK_THROWS_AS(while_alive_loss(data, 1, 0), DataError);
  CHECK_THROWS_AS(while_alive_loss(data, 1, 5), DataError);
}

TEST_CASE("while-alive loss is invariant under subject replication") {
  const Dataset data = small_simulated(31);
  std::vector<SubjectHistory> doubled = data.subjects();
  for (SubjectHistory s : data.subjects()) {
    s.id += "_copy";
    doubled.push_back(std::move(s));
  }
  const Dataset twice(data.grid(), doubled);
  const int h = data.intervals();
  const WhileAliveResult one = while_alive_loss(data, 1, h);
  const WhileAliveResult two = while_alive_loss(twice, 1, h);
  CHECK(one.walr == doctest::Approx(two.walr).epsilon(1e-12));
  CHECK(one.sccl == doctest::Approx(two.sccl).epsilon(1e-12));
}

TEST_CASE("while-alive curve matches pointwise evaluation") {
  const Dataset data = small_simulated(37);
  const StepCurve curve = while_alive_curve(data, 1);
  for (int k : {1, 10, 25, 50}) {
    const WhileAliveResult wa = while_alive_loss(data, 1, k);
    CHECK(curve.at(k) == doctest::Approx(wa.sccl).epsilon(1e-12));
  }
}

TEST_CASE("estimators reject an empty arm selector") {
  const TimeGrid grid = TimeGrid::uniform(2, 2.0);
  const Dataset data(grid, {subj("a", 1, {0, 0}), subj("z", 0, {0, 0})});
  CHECK_THROWS_AS(nelson_aalen_events(data, 2), DataError);
  CHECK_THROWS_AS(kaplan_meier(data, -1), DataError);
}

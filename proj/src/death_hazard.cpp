#include "recursep/death_hazard.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace recursep {

namespace {

constexpr double kBigCoefficient = 30.0;

double clamp_prob(double p) {
  return std::clamp(p, DeathHazardModel::kEps, 1.0 - DeathHazardModel::kEps);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Aggregated person-intervals sharing a (time bin, lagged event count) cell.
struct Cell {
  int bin = 0;
  int prior_events = 0;
  double exposure = 0.0;
  double deaths = 0.0;
};

// In-place Cholesky solve of A x = b for a small SPD matrix (row-major).
// Returns false if the matrix is not positive definite.
bool solve_spd(std::vector<double> a, std::vector<double> b,
               std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (s <= 1e-12) return false;
        a[i * n + i] = std::sqrt(s);
      } else {
        a[i * n + j] = s / a[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
    x[i] = s / a[i * n + i];
  }
  return true;
}

// Contiguous bins with roughly equal at-risk exposure. Zero-exposure bins
// (possible when exposure is concentrated) are merged away afterwards.
std::vector<int> make_bins(const std::vector<double>& exposure_by_interval,
                           int requested) {
  const int K = static_cast<int>(exposure_by_interval.size()) - 1;
  const int B = std::clamp(requested, 1, K);
  double total = 0.0;
  for (int k = 1; k <= K; ++k) total += exposure_by_interval[k];

  std::vector<int> starts{1};
  double cum = 0.0;
  int b = 0;
  for (int k = 1; k <= K; ++k) {
    cum += exposure_by_interval[k];
    const int bins_left = B - b - 1;
    const int intervals_left = K - k;
    if (bins_left > 0 &&
        (intervals_left == bins_left || cum * B >= total * (b + 1))) {
      starts.push_back(k + 1);
      ++b;
    }
  }
  starts.push_back(K + 1);

  // Merge away bins that ended up with no exposure: drop interior boundaries
  // whose left side is empty, then fold an empty trailing bin leftwards.
  const auto span_exposure = [&](int from, int to) {
    double e = 0.0;
    for (int k = from; k < to; ++k) e += exposure_by_interval[k];
    return e;
  };
  std::vector<int> merged{1};
  for (std::size_t i = 1; i + 1 < starts.size(); ++i) {
    if (span_exposure(merged.back(), starts[i]) > 0.0) {
      merged.push_back(starts[i]);
    }
  }
  merged.push_back(K + 1);
  while (merged.size() > 2 &&
         span_exposure(merged[merged.size() - 2], K + 1) <= 0.0) {
    merged.erase(merged.end() - 2);
  }
  return merged;
}

double bernoulli_loglik(const std::vector<Cell>& cells,
                        const std::vector<double>& alpha, double gamma,
                        HazardLink link) {
  double ll = 0.0;
  for (const Cell& c : cells) {
    const double eta = alpha[c.bin] + gamma * c.prior_events;
    const double p =
        clamp_prob(link == HazardLink::logit ? inv_logit(eta) : eta);
    ll += c.deaths * std::log(p) + (c.exposure - c.deaths) * std::log(1.0 - p);
  }
  return ll;
}

}  // namespace

int DeathHazardModel::bin_of(int interval) const {
  const auto it =
      std::upper_bound(bin_start.begin(), bin_start.end(), interval);
  return static_cast<int>(it - bin_start.begin()) - 1;
}

double DeathHazardModel::predict(int interval, int prior_events) const {
  const double eta = alpha[bin_of(interval)] + gamma * prior_events;
  return clamp_prob(link == HazardLink::logit ? inv_logit(eta) : eta);
}

DeathHazardModel fit_death_hazard(const Dataset& dataset, int arm,
                                  const HazardFitOptions& options) {
  if (arm != 0 && arm != 1) throw DataError("arm must be 0 or 1");
  const int K = dataset.intervals();

  std::vector<double> exposure(K + 1, 0.0);
  double total_exposure = 0.0;
  for (int k = 1; k <= K; ++k) {
    exposure[k] = dataset.at_risk_count(arm, k);
    total_exposure += exposure[k];
  }
  if (total_exposure <= 0.0) {
    throw DataError("arm has no at-risk person-intervals");
  }

  DeathHazardModel model;
  model.arm = arm;
  model.link = options.link;
  model.bin_start = make_bins(exposure, options.time_bins);
  const int B = static_cast<int>(model.bin_start.size()) - 1;

  // Aggregate at-risk person-intervals into (bin, prior events) cells.
  std::map<std::pair<int, int>, Cell> table;
  for (const SubjectHistory& s : dataset.subjects()) {
    if (s.arm != arm) continue;
    const int last = s.last_at_risk(K);
    int y = 0;
    for (int k = 1; k <= last; ++k) {
      const int b = model.bin_of(k);
      Cell& c = table[{b, y}];
      c.bin = b;
      c.prior_events = y;
      c.exposure += 1.0;
      if (s.death_interval && *s.death_interval == k) c.deaths += 1.0;
      y += s.event_counts[k - 1];
    }
  }
  std::vector<Cell> cells;
  cells.reserve(table.size());
  for (auto& [key, cell] : table) cells.push_back(cell);

  std::vector<double> bin_exposure(B, 0.0), bin_deaths(B, 0.0);
  double y_mean = 0.0, y_sq = 0.0;
  for (const Cell& c : cells) {
    bin_exposure[c.bin] += c.exposure;
    bin_deaths[c.bin] += c.deaths;
    y_mean += c.exposure * c.prior_events;
    y_sq += c.exposure * c.prior_events * c.prior_events;
  }
  y_mean /= total_exposure;
  const double y_var = y_sq / total_exposure - y_mean * y_mean;

  const bool want_slope = options.event_slope && y_var > 1e-12;
  const bool slope_dropped = options.event_slope && !want_slope;

  auto empirical_fallback = [&](bool flag) {
    model.gamma = 0.0;
    model.alpha.resize(B);
    for (int b = 0; b < B; ++b) {
      const double rate = clamp_prob(bin_deaths[b] / bin_exposure[b]);
      model.alpha[b] = options.link == HazardLink::logit ? logit(rate) : rate;
    }
    model.diagnostics.converged = true;
    model.diagnostics.iterations = 0;
    model.diagnostics.separation_fallback = flag;
    model.diagnostics.log_likelihood =
        bernoulli_loglik(cells, model.alpha, 0.0, options.link);
    return model;
  };

  if (options.link == HazardLink::identity) {
    // Exposure-weighted least squares on the cell rates.
    const std::size_t dim = static_cast<std::size_t>(B) + (want_slope ? 1 : 0);
    std::vector<double> a(dim * dim, 0.0), rhs(dim, 0.0), theta;
    for (const Cell& c : cells) {
      const double w = c.exposure;
      const double rate = c.deaths / c.exposure;
      const std::size_t ib = static_cast<std::size_t>(c.bin);
      a[ib * dim + ib] += w;
      rhs[ib] += w * rate;
      if (want_slope) {
        const double y = c.prior_events;
        const std::size_t iy = dim - 1;
        a[ib * dim + iy] += w * y;
        a[iy * dim + ib] += w * y;
        a[iy * dim + iy] += w * y * y;
        rhs[iy] += w * y * rate;
      }
    }
    if (!solve_spd(a, rhs, theta)) {
      return empirical_fallback(true);
    }
    model.alpha.assign(theta.begin(), theta.begin() + B);
    model.gamma = want_slope ? theta[B] : 0.0;
    model.diagnostics.converged = true;
    model.diagnostics.iterations = 1;
    model.diagnostics.separation_fallback = slope_dropped;
    model.diagnostics.log_likelihood =
        bernoulli_loglik(cells, model.alpha, model.gamma, options.link);
    return model;
  }

  // Logit link. A bin with no deaths or no survivors has an infinite MLE.
  for (int b = 0; b < B; ++b) {
    if (bin_deaths[b] <= 0.0 || bin_deaths[b] >= bin_exposure[b]) {
      return empirical_fallback(true);
    }
  }
  if (slope_dropped) {
    // Slope requested but the lagged event count never varies.
    return empirical_fallback(true);
  }

  const std::size_t dim = static_cast<std::size_t>(B) + (want_slope ? 1 : 0);
  std::vector<double> alpha(B);
  for (int b = 0; b < B; ++b) {
    alpha[b] = logit(clamp_prob(bin_deaths[b] / bin_exposure[b]));
  }
  double gamma = 0.0;
  double ll = bernoulli_loglik(cells, alpha, gamma, options.link);

  FitDiagnostics diag;
  bool converged = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    diag.iterations = iter;
    std::vector<double> h(dim * dim, 0.0), g(dim, 0.0), step;
    for (const Cell& c : cells) {
      const double eta = alpha[c.bin] + gamma * c.prior_events;
      const double p = inv_logit(eta);
      const double w = c.exposure * p * (1.0 - p);
      const double resid = c.deaths - c.exposure * p;
      const std::size_t ib = static_cast<std::size_t>(c.bin);
      h[ib * dim + ib] += w;
      g[ib] += resid;
      if (want_slope) {
        const double y = c.prior_events;
        const std::size_t iy = dim - 1;
        h[ib * dim + iy] += w * y;
        h[iy * dim + ib] += w * y;
        h[iy * dim + iy] += w * y * y;
        g[iy] += resid * y;
      }
    }
    if (!solve_spd(h, g, step)) {
      return empirical_fallback(true);
    }

    // Step halving on the Bernoulli log-likelihood.
    double scale = 1.0;
    double new_ll = ll;
    std::vector<double> new_alpha = alpha;
    double new_gamma = gamma;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      for (int b = 0; b < B; ++b) new_alpha[b] = alpha[b] + scale * step[b];
      new_gamma = want_slope ? gamma + scale * step[B] : 0.0;
      new_ll = bernoulli_loglik(cells, new_alpha, new_gamma, options.link);
      if (std::isfinite(new_ll) && new_ll >= ll - 1e-12) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;

    double max_change = 0.0;
    for (int b = 0; b < B; ++b) {
      max_change = std::max(max_change, std::abs(scale * step[b]));
    }
    if (want_slope) max_change = std::max(max_change, std::abs(scale * step[B]));

    alpha = new_alpha;
    gamma = new_gamma;
    ll = new_ll;

    double max_coef = std::abs(gamma);
    for (double v : alpha) max_coef = std::max(max_coef, std::abs(v));
    if (max_coef > kBigCoefficient) {
      return empirical_fallback(true);
    }
    if (max_change < options.tolerance) {
      converged = true;
      break;
    }
  }

  diag.converged = converged;
  diag.log_likelihood = ll;
  if (!converged) {
    throw HazardFitError("death hazard fit did not converge", diag);
  }
  model.alpha = alpha;
  model.gamma = gamma;
  model.diagnostics = diag;
  return model;
}

}  // namespace recursep

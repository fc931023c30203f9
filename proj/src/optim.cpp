#include "dqgnn/optim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <random>

#include "dqgnn/errors.hpp"

namespace dqgnn {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Wraps the user evaluator with budget accounting, best-point tracking and the trace.
class Evaluations {
 public:
  Evaluations(const ObjectiveSpec& spec, OptResult& result) : spec_(spec), result_(result) {}

  // Baseline evaluation of the initial point; not charged to the budget.
  double baseline(const Vec& x) {
    const double fx = call(x);
    result_.best_point.assign(x.data(), x.data() + x.size());
    result_.best_value = fx;
    if (!std::isfinite(fx)) failed_ = true;
    return fx;
  }

  // Charged evaluation; nullopt once the budget is spent or a non-finite value was seen.
  std::optional<double> operator()(const Vec& x) {
    if (stopped()) return std::nullopt;
    ++result_.evaluations_used;
    const double fx = call(x);
    if (!std::isfinite(fx)) {
      failed_ = true;
      return std::nullopt;
    }
    if (fx < result_.best_value) {
      result_.best_value = fx;
      result_.best_point.assign(x.data(), x.data() + x.size());
    }
    return fx;
  }

  bool failed() const { return failed_; }
  bool exhausted() const { return result_.evaluations_used >= spec_.budget; }
  bool stopped() const { return failed_ || exhausted(); }

 private:
  double call(const Vec& x) {
    const double fx = spec_.evaluator(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    result_.trace.push_back(fx);
    return fx;
  }

  const ObjectiveSpec& spec_;
  OptResult& result_;
  bool failed_ = false;
};

// Minimizes g's + 1/2 s'Hs subject to |s| <= radius (More-Sorensen via eigendecomposition).
Vec trust_region_step(const Vec& g, const Mat& h, double radius) {
  const Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Vec& lam = es.eigenvalues();  // ascending
  const Mat& v = es.eigenvectors();
  const Vec gp = v.transpose() * g;
  const long n = g.size();
  const double lmin = lam(0);
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

  auto step_at = [&](double mu) {
    Vec s(n);
    for (long i = 0; i < n; ++i) {
      const double d = lam(i) + mu;
      s(i) = d > 0.0 ? -gp(i) / d : 0.0;
    }
    return s;
  };

  if (lmin > 1e-14 * scale) {
    const Vec s = step_at(0.0);
    if (s.norm() <= radius) return v * s;
  }

  const double lo = std::max(0.0, -lmin);
  // Hard case: g has no weight on the lowest eigenspace and the shifted step stays inside.
  double g_low = 0.0;
  for (long i = 0; i < n && lam(i) <= lmin + 1e-12 * scale; ++i) g_low += gp(i) * gp(i);
  if (std::sqrt(g_low) <= 1e-12 * std::max(1.0, gp.norm())) {
    Vec s = step_at(lo);
    for (long i = 0; i < n && lam(i) <= lmin + 1e-12 * scale; ++i) s(i) = 0.0;
    const double sn = s.norm();
    if (sn <= radius) {
      s(0) += std::sqrt(std::max(0.0, radius * radius - sn * sn));
      return v * s;
    }
  }

  double mu_lo = lo;
  double mu_hi = lo + gp.norm() / radius + 1e-300;
  while (step_at(mu_hi).norm() > radius) mu_hi *= 2.0;
  for (int it = 0; it < 200 && mu_hi - mu_lo > 1e-15 * std::max(1.0, mu_hi); ++it) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (step_at(mid).norm() > radius) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
    }
  }
  return v * step_at(mu_hi);
}

// Monomial basis of a full quadratic: 1, s_i, s_i^2 / 2, s_i s_j (i < j).
Vec quadratic_basis(const Vec& s) {
  const long n = s.size();
  Vec phi(quadratic_point_count(static_cast<int>(n)));
  long k = 0;
  phi(k++) = 1.0;
  for (long i = 0; i < n; ++i) phi(k++) = s(i);
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) phi(k++) = i == j ? 0.5 * s(i) * s(i) : s(i) * s(j);
  }
  return phi;
}

struct Quadratic {
  double c = 0.0;
  Vec g;
  Mat h;

  double operator()(const Vec& s) const { return c + g.dot(s) + 0.5 * s.dot(h * s); }
};

Quadratic unpack(const Vec& coef, long n) {
  Quadratic q;
  q.c = coef(0);
  q.g = coef.segment(1, n);
  q.h = Mat::Zero(n, n);
  long k = 1 + n;
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      q.h(i, j) = coef(k);
      q.h(j, i) = coef(k);
      ++k;
    }
  }
  return q;
}

// Portable uniform direction on the unit sphere from a seeded engine.
Vec random_direction(std::mt19937_64& rng, long n) {
  Vec d(n);
  do {
    for (long i = 0; i < n; ++i) d(i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  } while (d.norm() < 1e-3);
  return d / d.norm();
}

void run_quadratic(const ObjectiveSpec& spec, const Vec& x0, double f0, Evaluations& eval, OptResult& result) {
  const long n = x0.size();
  const long npt = quadratic_point_count(static_cast<int>(n));
  double delta = spec.initial_radius;
  const double delta_max = 1e3 * spec.initial_radius;
  std::mt19937_64 rng(spec.seed);

  std::vector<Vec> pts{x0};
  std::vector<double> vals{f0};
  pts.reserve(static_cast<std::size_t>(npt));
  auto add = [&](const Vec& x) {
    const auto f = eval(x);
    if (!f) return false;
    pts.push_back(x);
    vals.push_back(*f);
    return true;
  };
  for (long i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vec x = x0;
      x(i) += sign * delta;
      if (!add(x)) return;
    }
  }
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      Vec x = x0;
      x(i) += delta;
      x(j) += delta;
      if (!add(x)) return;
    }
  }

  Mat m(npt, npt);
  Vec rhs(npt);
  bool geometry_pending = false;
  while (!eval.stopped()) {
    if (delta < spec.tolerance) {
      result.converged = true;
      return;
    }
    const long k = std::min_element(vals.begin(), vals.end()) - vals.begin();
    const Vec xk = pts[k];
    const double fk = vals[k];

    double r = 0.0;
    long far = -1;
    for (long i = 0; i < npt; ++i) {
      const double d = (pts[i] - xk).norm();
      if (d > r) {
        r = d;
        far = i;
      }
    }
    for (long i = 0; i < npt; ++i) {
      m.row(i) = quadratic_basis((pts[i] - xk) / r).transpose();
      rhs(i) = vals[i] - fk;
    }
    const Eigen::PartialPivLU<Mat> lu(m);
    const Vec coef = lu.solve(rhs);
    const bool model_ok = coef.allFinite() && (m * coef - rhs).norm() <= 1e-8 * (1.0 + rhs.norm());

    // Replaces point `t` by the point of the trust region that best restores poisedness.
    auto improve_geometry = [&](long t) -> bool {
      Vec s;
      if (model_ok) {
        const Quadratic lag = unpack(lu.solve(Vec::Unit(npt, t)), n);
        const Quadratic neg{-lag.c, -lag.g, -lag.h};
        const Vec s_min = trust_region_step(lag.g, lag.h, delta / r);
        const Vec s_max = trust_region_step(neg.g, neg.h, delta / r);
        s = std::abs(lag(s_min)) >= std::abs(lag(s_max)) ? s_min : s_max;
        if (s.norm() < 1e-3 * delta / r) s = random_direction(rng, n) * (delta / r);
      } else {
        s = random_direction(rng, n) * (delta / r);
      }
      const Vec x = xk + r * s;
      const auto f = eval(x);
      if (!f) return false;
      pts[t] = x;
      vals[t] = *f;
      return true;
    };

    if (!model_ok || (geometry_pending && r > 2.0 * delta)) {
      geometry_pending = false;
      if (!improve_geometry(far)) return;
      continue;
    }
    geometry_pending = false;

    const Quadratic model = unpack(coef, n);
    const Vec s = trust_region_step(model.g, model.h, delta / r);
    const Vec d = r * s;
    const double pred = model.c - model(s);
    const double dnorm = d.norm();

    if (!(pred > 1e-14 * (1.0 + std::abs(fk))) || dnorm < 1e-3 * spec.tolerance) {
      // The model sees no progress inside the region: fix far points first, then shrink.
      if (r > 2.0 * delta) {
        if (!improve_geometry(far)) return;
      } else {
        delta *= 0.5;
      }
      continue;
    }

    const Vec xnew = xk + d;
    const auto fnew = eval(xnew);
    if (!fnew) return;
    const double ratio = (fk - *fnew) / pred;

    // Pick the point whose removal keeps the set best poised, weighted by distance.
    const Vec lagrange = lu.transpose().solve(quadratic_basis(s));
    long drop = -1;
    double best_score = 0.0;
    for (long i = 0; i < npt; ++i) {
      if (i == k && *fnew >= fk) continue;
      const double dist = (pts[i] - xk).norm() / delta;
      const double score = std::abs(lagrange(i)) * std::max(1.0, dist * dist);
      if (score > best_score) {
        best_score = score;
        drop = i;
      }
    }
    if (drop >= 0 && (*fnew < fk || best_score > 1.0)) {
      pts[drop] = xnew;
      vals[drop] = *fnew;
    }

    if (ratio >= 0.7) {
      delta = std::min(delta_max, std::max(delta, 2.0 * dnorm));
    } else if (ratio >= 0.1) {
      delta = std::max(0.5 * delta, dnorm);
    } else if (r > 2.0 * delta) {
      geometry_pending = true;
    } else {
      delta = std::min(0.5 * delta, dnorm);
    }
  }
}

void run_pattern(const ObjectiveSpec& spec, const Vec& x0, double f0, Evaluations& eval, OptResult& result) {
  const long n = x0.size();
  Vec x = x0;
  double fx = f0;
  double delta = spec.initial_radius;
  Vec f_plus(n);
  Vec f_minus(n);
  while (!eval.stopped()) {
    if (delta < spec.tolerance) {
      result.converged = true;
      return;
    }
    bool improved = false;
    bool polled_all = true;
    for (long i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vec y = x;
        y(i) += sign * delta;
        const auto fy = eval(y);
        if (!fy) return;
        (sign > 0 ? f_plus : f_minus)(i) = *fy;
        if (*fy < fx) {
          x = y;
          fx = *fy;
          improved = true;
          polled_all = false;
          break;
        }
      }
    }
    if (!improved && polled_all) {
      // Linear model from the full poll: central-difference gradient step.
      const Vec grad = (f_plus - f_minus) / (2.0 * delta);
      if (grad.norm() > 0.0) {
        const Vec y = x - delta * grad / grad.norm();
        const auto fy = eval(y);
        if (!fy) return;
        if (*fy < fx) {
          x = y;
          fx = *fy;
          improved = true;
        }
      }
    }
    if (!improved) delta *= 0.5;
  }
}

}  // namespace

long quadratic_point_count(int dimension) noexcept {
  const long n = dimension;
  return (n + 1) * (n + 2) / 2;
}

OptResult minimize(const ObjectiveSpec& spec, std::span<const double> initial) {
  if (spec.dimension < 1) throw UsageError("objective dimension must be >= 1");
  if (static_cast<long>(initial.size()) != spec.dimension) {
    throw UsageError("initial point has " + std::to_string(initial.size()) + " entries, objective dimension is " +
                     std::to_string(spec.dimension));
  }
  if (spec.budget < 0) throw UsageError("evaluation budget must be >= 0");
  if (!(spec.tolerance > 0.0)) throw UsageError("tolerance must be > 0");
  if (!(spec.initial_radius > 0.0)) throw UsageError("initial radius must be > 0");
  if (!spec.evaluator) throw UsageError("objective has no evaluator");

  OptResult result;
  result.method = spec.budget >= 2 * quadratic_point_count(spec.dimension) ? OptMethod::kQuadraticModel
                                                                           : OptMethod::kPatternSearch;
  Evaluations eval(spec, result);
  const Vec x0 = Eigen::Map<const Vec>(initial.data(), spec.dimension);
  const double f0 = eval.baseline(x0);
  if (!eval.failed()) {
    if (result.method == OptMethod::kQuadraticModel) {
      run_quadratic(spec, x0, f0, eval, result);
    } else {
      run_pattern(spec, x0, f0, eval, result);
    }
  }
  if (eval.failed()) {
    result.status = OptStatus::kNonFiniteObjective;
    result.converged = false;
  } else {
    result.status = result.converged ? OptStatus::kConverged : OptStatus::kBudgetExhausted;
  }
  return result;
}

std::vector<double> best_so_far(std::span<const double> trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  double best = std::numeric_limits<double>::infinity();
  for (double v : trace) {
    if (v < best) best = v;
    out.push_back(best);
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const OptResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write optimizer trace to " + path.string());
  out.precision(17);
  out << "evaluation,value\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) out << i << ',' << result.trace[i] << '\n';
}

std::string to_string(OptMethod method) {
  return method == OptMethod::kQuadraticModel ? "quadratic_model" : "pattern_search";
}

std::string to_string(OptStatus status) {
  switch (status) {
    case OptStatus::kConverged:
      return "converged";
    case OptStatus::kBudgetExhausted:
      return "budget_exhausted";
    case OptStatus::kNonFiniteObjective:
      break;
  }
  return "non_finite_objective";
}

}  // namespace dqgnn

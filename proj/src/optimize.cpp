#include "pdmpis/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "pdmpis/error.hpp"

namespace pdmpis {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

bool finite(const ObjectiveEvaluation& e) {
  if (!std::isfinite(e.value)) return false;
  return std::all_of(e.gradient.begin(), e.gradient.end(), [](double g) { return std::isfinite(g); });
}

}  // namespace

BfgsResult bfgs_minimize(const Objective& objective, std::span<const double> start,
                         std::span<const double> lo, std::span<const double> hi,
                         const BfgsOptions& options) {
  const std::size_t n = start.size();
  if (lo.size() != n || hi.size() != n) {
    throw Error(ErrorKind::invalid_argument, "bounds and start differ in dimension");
  }
  if (!(options.grad_tol > 0.0)) throw Error(ErrorKind::invalid_argument, "grad_tol must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo[i] <= start[i] && start[i] <= hi[i])) {
      throw Error(ErrorKind::invalid_argument, "start outside bounds");
    }
  }

  BfgsResult res;
  Vec x(start.begin(), start.end());
  ObjectiveEvaluation fx = objective(x);
  ++res.evaluations;
  if (fx.gradient.size() != n) {
    throw Error(ErrorKind::invalid_argument, "objective gradient has wrong dimension");
  }
  if (!finite(fx)) throw Error(ErrorKind::invalid_start, "objective is not finite at the start");

  auto project = [&](Vec& v) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
  };
  auto projected_gradient = [&](const Vec& at, const Vec& g) {
    Vec pg(n);
    for (std::size_t i = 0; i < n; ++i) pg[i] = at[i] - std::clamp(at[i] - g[i], lo[i], hi[i]);
    return pg;
  };

  Vec H(n * n, 0.0);
  auto reset = [&] {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  };
  reset();
  bool identity = true;

  for (res.iterations = 0; res.iterations < options.max_iters; ++res.iterations) {
    const Vec pg = projected_gradient(x, fx.gradient);
    if (inf_norm(pg) <= options.grad_tol) {
      res.converged = true;
      break;
    }
    // Coordinates pinned at a bound with the gradient pushing outward stay fixed.
    std::vector<bool> fixed(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      fixed[i] = (x[i] <= lo[i] && fx.gradient[i] > 0.0) || (x[i] >= hi[i] && fx.gradient[i] < 0.0);
    }
    auto direction = [&] {
      Vec d(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (!fixed[j]) d[i] -= H[i * n + j] * fx.gradient[j];
        }
      }
      return d;
    };
    Vec d = direction();
    if (!(dot(d, fx.gradient) < 0.0)) {
      reset();
      identity = true;
      d = direction();
      if (!(dot(d, fx.gradient) < 0.0)) {
        res.converged = true;
        break;
      }
    }

    bool accepted = false;
    Vec x_new;
    ObjectiveEvaluation f_new;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double alpha = 1.0;
      for (std::size_t k = 0; k < options.max_backtracks; ++k, alpha *= options.shrink) {
        x_new = x;
        for (std::size_t i = 0; i < n; ++i) x_new[i] += alpha * d[i];
        project(x_new);
        Vec step(n);
        for (std::size_t i = 0; i < n; ++i) step[i] = x_new[i] - x[i];
        if (inf_norm(step) == 0.0) break;
        f_new = objective(x_new);
        ++res.evaluations;
        if (!finite(f_new)) continue;
        if (f_new.value <= fx.value + options.armijo_c * dot(fx.gradient, step) &&
            f_new.value <= fx.value) {
          accepted = true;
          break;
        }
      }
      if (!accepted && !identity) {
        reset();
        identity = true;
        d = direction();
      } else {
        break;
      }
    }
    if (!accepted) {
      if (res.iterations == 0) res.stalled_at_start = true;
      res.message = "line search found no improving step";
      break;
    }

    Vec s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = f_new.gradient[i] - fx.gradient[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)) && sy > 0.0) {
      if (identity) {
        const double scale = sy / dot(y, y);
        for (double& h : H) h *= scale;
      }
      Vec Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
      }
      const double yHy = dot(y, Hy);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += -rho * (Hy[i] * s[j] + s[i] * Hy[j]) +
                          (rho * rho * yHy + rho) * s[i] * s[j];
        }
      }
      identity = false;
    }
    x = std::move(x_new);
    fx = std::move(f_new);
  }
  res.x = std::move(x);
  res.value = fx.value;
  res.gradient = std::move(fx.gradient);
  if (res.message.empty()) res.message = res.converged ? "converged" : "iteration limit";
  return res;
}

std::vector<double> finite_diff_grad(const ValueFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "finite-difference step must be > 0");
  Vec p(x.begin(), x.end());
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * (1.0 + std::abs(x[i]));
    const double keep = p[i];
    p[i] = keep + step;
    const double up = f(p);
    p[i] = keep - step;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace pdmpis

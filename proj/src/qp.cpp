#include "offering/qp.hpp"

#include <algorithm>
#include <cmath>

namespace offering::qp {

double Problem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * (hess.array() * x.array().square()).sum() + linear.dot(x);
}

double Problem::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (const auto& row : rows) {
    double lhs = 0.0;
    for (const auto& [j, g] : row.terms) lhs += g * x[j];
    worst = std::max(worst, lhs - row.rhs);
  }
  return worst;
}

namespace {

struct Scaled {
  int n = 0;
  int m = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
  Eigen::VectorXd h;
  Eigen::VectorXd row_scale;  // original row = scaled row * row_scale
  Eigen::VectorXd hess, linear, lower, upper;
  double obj_scale = 1.0;     // scaled objective = obj_scale * original
};

Scaled make_scaled(const Problem& p) {
  Scaled s;
  s.n = p.num_vars();
  s.m = static_cast<int>(p.rows.size());
  s.rows.resize(p.rows.size());
  s.h.resize(s.m);
  s.row_scale.resize(s.m);
  for (int i = 0; i < s.m; ++i) {
    const auto& row = p.rows[static_cast<std::size_t>(i)];
    double scale = 0.0;
    for (const auto& [j, g] : row.terms) scale = std::max(scale, std::abs(g));
    if (scale == 0.0) scale = 1.0;
    auto& out = s.rows[static_cast<std::size_t>(i)];
    for (const auto& [j, g] : row.terms) out.emplace_back(j, g / scale);
    s.h[i] = row.rhs / scale;
    s.row_scale[i] = scale;
  }
  double mag = 1.0;
  for (int j = 0; j < s.n; ++j) mag = std::max({mag, std::abs(p.linear[j]), std::abs(p.hess[j])});
  s.obj_scale = 1.0 / mag;
  s.hess = p.hess * s.obj_scale;
  s.linear = p.linear * s.obj_scale;
  s.lower = p.lower;
  s.upper = p.upper;
  return s;
}

Eigen::VectorXd times(const Scaled& s, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(s.m);
  for (int i = 0; i < s.m; ++i) {
    double acc = 0.0;
    for (const auto& [j, g] : s.rows[static_cast<std::size_t>(i)]) acc += g * x[j];
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd transpose_times(const Scaled& s, const Eigen::VectorXd& y) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.n);
  for (int i = 0; i < s.m; ++i)
    for (const auto& [j, g] : s.rows[static_cast<std::size_t>(i)]) out[j] += g * y[i];
  return out;
}

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

// min over the box of 1/2 hess x^2 + r x, summed over variables.
double box_minimum(const Scaled& s, const Eigen::VectorXd& hess, const Eigen::VectorXd& r) {
  double total = 0.0;
  for (int j = 0; j < s.n; ++j) {
    double x;
    if (hess[j] > 0.0) x = std::clamp(-r[j] / hess[j], s.lower[j], s.upper[j]);
    else x = r[j] >= 0.0 ? s.lower[j] : s.upper[j];
    total += 0.5 * hess[j] * x * x + r[j] * x;
  }
  return total;
}

// Dual function at lambda >= 0, less an allowance for round-off. Multipliers
// that grow along degenerate rows reach 1e20 and more, and the cancellation
// in linear + G^T lambda and lambda . h would otherwise report a bound far
// above the true optimum.
double dual_value(const Scaled& s, const Eigen::VectorXd& hess, const Eigen::VectorXd& linear,
                  const Eigen::VectorXd& lambda) {
  const Eigen::VectorXd r = linear + transpose_times(s, lambda);
  Eigen::VectorXd magnitude = linear.cwiseAbs();
  for (int i = 0; i < s.m; ++i)
    for (const auto& [j, g] : s.rows[static_cast<std::size_t>(i)]) magnitude[j] += std::abs(g) * lambda[i];
  double error = lambda.dot(s.h.cwiseAbs());
  for (int j = 0; j < s.n; ++j) error += magnitude[j] * std::max(std::abs(s.lower[j]), std::abs(s.upper[j]));
  return box_minimum(s, hess, r) - lambda.dot(s.h) - 1e-13 * error;
}

// Multipliers for the rows the iterate treats as active, fitted by least
// squares to the stationarity condition at x and clipped at zero. Late in
// a degenerate solve this gives a far tighter dual bound than the
// iterate's own multipliers.
Eigen::VectorXd refit_multipliers(const Scaled& sc, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& s, const Eigen::VectorXd& lambda) {
  std::vector<int> active;
  for (int i = 0; i < sc.m; ++i)
    if (lambda[i] > s[i]) active.push_back(i);
  const int k = static_cast<int>(active.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(sc.n, k);
  for (int r = 0; r < k; ++r)
    for (const auto& [j, g] : sc.rows[static_cast<std::size_t>(active[static_cast<std::size_t>(r)])])
      A(j, r) = g;
  Eigen::VectorXd out = lambda;
  for (int i = 0; i < sc.m; ++i)
    if (lambda[i] <= s[i]) out[i] = 0.0;
  // Smallest correction of the active multipliers that zeroes the residual.
  const Eigen::VectorXd residual =
      (sc.hess.array() * x.array()).matrix() + sc.linear + transpose_times(sc, out);
  const Eigen::VectorXd step = A.completeOrthogonalDecomposition().solve(-residual);
  for (int r = 0; r < k; ++r) {
    const int i = active[static_cast<std::size_t>(r)];
    out[i] = std::max(0.0, out[i] + step[r]);
  }
  return out;
}

// Re-solves the equality-constrained QP on the rows the interior point
// left active. Keeps the result only if it is feasible and no worse; the
// multipliers are left alone since degenerate vertices make them ambiguous.
bool polish(const Scaled& sc, const Eigen::VectorXd& s, const Eigen::VectorXd& lambda,
            double tolerance, Eigen::VectorXd& x) {
  const int n = sc.n;
  std::vector<int> active;
  for (int i = 0; i < sc.m; ++i)
    if (lambda[i] > s[i]) active.push_back(i);
  const int k = static_cast<int>(active.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
  Eigen::VectorXd rhs(n + k);
  K.topLeftCorner(n, n).diagonal() = sc.hess;
  rhs.head(n) = -sc.linear;
  for (int r = 0; r < k; ++r) {
    for (const auto& [j, g] : sc.rows[static_cast<std::size_t>(active[static_cast<std::size_t>(r)])]) {
      K(n + r, j) = g;
      K(j, n + r) = g;
    }
    rhs[n + r] = sc.h[active[static_cast<std::size_t>(r)]];
  }
  const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).cwiseAbs().maxCoeff() > 1e-11) return false;
  const Eigen::VectorXd xp = sol.head(n);
  const Eigen::VectorXd gx = times(sc, xp);
  for (int i = 0; i < sc.m; ++i)
    if (gx[i] - sc.h[i] > 1e-12 * (1.0 + std::abs(sc.h[i]))) return false;
  auto obj = [&](const Eigen::VectorXd& v) {
    return 0.5 * (sc.hess.array() * v.array().square()).sum() + sc.linear.dot(v);
  };
  if (obj(xp) > obj(x) + tolerance * (1.0 + std::abs(obj(x)))) return false;
  x = xp;
  return true;
}

}  // namespace

Result solve(const Problem& problem, const Options& options) {
  const Scaled sc = make_scaled(problem);
  const int n = sc.n;
  const int m = sc.m;
  Result result;

  Eigen::VectorXd x = 0.5 * (sc.lower + sc.upper);
  Eigen::VectorXd s = (sc.h - times(sc, x)).cwiseMax(1.0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(m);
  const double h_norm = 1.0 + (m > 0 ? sc.h.cwiseAbs().maxCoeff() : 0.0);
  const Eigen::VectorXd zero_hess = Eigen::VectorXd::Zero(n);
  const double scaled_cutoff = options.cutoff * sc.obj_scale;
  double best_dual = -std::numeric_limits<double>::infinity();
  double min_dual_residual = std::numeric_limits<double>::infinity();
  double last_gap = std::numeric_limits<double>::infinity();
  int stalled = 0;

  auto finish = [&](Status status, int iterations) {
    if (status == Status::kOptimal && options.polish && m > 0) polish(sc, s, lambda, options.tolerance, x);
    result.status = status;
    result.iterations = iterations;
    result.x = x;
    result.objective = problem.objective(x);
    result.multipliers = lambda.cwiseQuotient(sc.row_scale) / sc.obj_scale;
    result.lower_bound = best_dual / sc.obj_scale;
    return result;
  };

  if (m == 0) {
    for (int j = 0; j < n; ++j) {
      if (sc.hess[j] > 0.0) x[j] = std::clamp(-sc.linear[j] / sc.hess[j], sc.lower[j], sc.upper[j]);
      else x[j] = sc.linear[j] >= 0.0 ? sc.lower[j] : sc.upper[j];
    }
    best_dual = box_minimum(sc, sc.hess, sc.linear);
    return finish(Status::kOptimal, 0);
  }

  Eigen::MatrixXd M(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd gx = times(sc, x);
    const Eigen::VectorXd gt_lambda = transpose_times(sc, lambda);
    const Eigen::VectorXd r_d = (sc.hess.array() * x.array()).matrix() + sc.linear + gt_lambda;
    const Eigen::VectorXd r_p = gx + s - sc.h;
    const double mu = s.dot(lambda) / m;

    best_dual = std::max(best_dual, dual_value(sc, sc.hess, sc.linear, lambda));
    const double pobj = 0.5 * (sc.hess.array() * x.array().square()).sum() + sc.linear.dot(x);
    const double violation = std::max(0.0, (gx - sc.h).maxCoeff()) / h_norm;
    double gap = (pobj - best_dual) / (1.0 + std::abs(pobj));
    // Normal-equation round-off shows up as a growing dual residual; once
    // it does, more iterations no longer help.
    const double dual_residual = r_d.cwiseAbs().maxCoeff();
    min_dual_residual = std::min(min_dual_residual, dual_residual);
    stalled = dual_residual > 100.0 * min_dual_residual && gap >= 0.5 * last_gap ? stalled + 1 : 0;
    last_gap = gap;
    result.kkt_residual = std::max(violation, gap);
    if (m > 0 && gap > options.tolerance && (mu < 1e-15 || stalled >= 3 || it + 1 == options.max_iterations)) {
      const Eigen::VectorXd refit = refit_multipliers(sc, x, s, lambda);
      best_dual = std::max(best_dual, dual_value(sc, sc.hess, sc.linear, refit));
      gap = (pobj - best_dual) / (1.0 + std::abs(pobj));
      result.kkt_residual = std::max(violation, gap);
      if (violation <= options.tolerance && gap <= options.acceptable_tolerance)
        return finish(Status::kOptimal, it);
      if (stalled >= 3) return finish(Status::kIterationLimit, it);
    }
    if (violation <= options.tolerance && gap <= options.tolerance)
      return finish(Status::kOptimal, it);
    if (mu < 1e-15) {
      // Complementarity is exhausted; further steps only amplify round-off.
      const bool close = violation <= options.tolerance && gap <= options.acceptable_tolerance;
      return finish(close ? Status::kOptimal : Status::kIterationLimit, it);
    }
    if (best_dual >= scaled_cutoff) return finish(Status::kCutoff, it);

    // Farkas test on the normalised multipliers.
    const double lambda_max = lambda.maxCoeff();
    if (lambda_max > 1.0) {
      const Eigen::VectorXd y = lambda / lambda_max;
      const double certificate = dual_value(sc, zero_hess, zero_hess, y);
      if (certificate > 1e-9) {
        result.status = Status::kInfeasible;
        result.iterations = it;
        result.x = x;
        return result;
      }
    }

    const Eigen::VectorXd W = lambda.cwiseQuotient(s);
    M.setZero();
    M.diagonal() = sc.hess;
    for (int i = 0; i < m; ++i) {
      const auto& row = sc.rows[static_cast<std::size_t>(i)];
      for (const auto& [a, ga] : row)
        for (const auto& [b, gb] : row) M(a, b) += W[i] * ga * gb;
    }
    // Per-column regularization: a global shift sized by the largest pivot
    // swamps columns that only touch nearly inactive rows.
    M.diagonal().array() += 1e-14 * (1.0 + M.diagonal().array().abs());
    llt.compute(M);
    if (llt.info() != Eigen::Success) {
      M.diagonal().array() += 1e-10 * (1.0 + M.diagonal().array().abs());
      llt.compute(M);
      if (llt.info() != Eigen::Success) return finish(Status::kIterationLimit, it);
    }

    auto solve_newton = [&](const Eigen::VectorXd& e_d, const Eigen::VectorXd& e_p,
                            const Eigen::VectorXd& e_c, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                            Eigen::VectorXd& dl) {
      const Eigen::VectorXd s_inv_rc = e_c.cwiseQuotient(s);
      const Eigen::VectorXd rhs = -e_d - transpose_times(sc, W.cwiseProduct(e_p) - s_inv_rc);
      dx = llt.solve(rhs);
      dx += llt.solve(rhs - M * dx);
      const Eigen::VectorXd g_dx = times(sc, dx);
      dl = W.cwiseProduct(g_dx + e_p) - s_inv_rc;
      ds = -e_p - g_dx;
    };
    // Newton step, refined against the residuals of the full linear system.
    auto direction = [&](const Eigen::VectorXd& r_c, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                         Eigen::VectorXd& dl) {
      solve_newton(r_d, r_p, r_c, dx, ds, dl);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd e_d =
            (sc.hess.array() * dx.array()).matrix() + transpose_times(sc, dl) + r_d;
        const Eigen::VectorXd e_p = times(sc, dx) + ds + r_p;
        const Eigen::VectorXd e_c = lambda.cwiseProduct(ds) + s.cwiseProduct(dl) + r_c;
        Eigen::VectorXd cx, cs, cl;
        solve_newton(e_d, e_p, e_c, cx, cs, cl);
        dx += cx;
        ds += cs;
        dl += cl;
      }
    };

    Eigen::VectorXd dx, ds, dl;
    direction(s.cwiseProduct(lambda), dx, ds, dl);
    const double a_aff = std::min(max_step(s, ds), max_step(lambda, dl));
    const double mu_aff = (s + a_aff * ds).dot(lambda + a_aff * dl) / m;
    const double sigma = std::pow(mu_aff / mu, 3.0);
    const Eigen::VectorXd r_c =
        s.cwiseProduct(lambda) + ds.cwiseProduct(dl) - Eigen::VectorXd::Constant(m, sigma * mu);
    direction(r_c, dx, ds, dl);
    const double a = std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(lambda, dl)));
    x += a * dx;
    s += a * ds;
    lambda += a * dl;
  }
  return finish(Status::kIterationLimit, options.max_iterations);
}

}  // namespace offering::qp

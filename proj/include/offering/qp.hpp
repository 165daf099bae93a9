#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace offering::qp {

/// Sparse inequality row: sum coef_j x_j <= rhs.
struct Row {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

/// min 1/2 sum_i hess_i x_i^2 + linear . x  subject to rows, with hess >= 0.
///
/// `lower`/`upper` is a finite box that contains the feasible set (the rows
/// must imply it, or at least one optimal point must lie inside it). The
/// box is what makes the dual bounds below valid at every iterate.
struct Problem {
  Eigen::VectorXd hess;
  Eigen::VectorXd linear;
  Eigen::VectorXd lower, upper;
  std::vector<Row> rows;

  int num_vars() const { return static_cast<int>(linear.size()); }
  double objective(const Eigen::VectorXd& x) const;
  double max_violation(const Eigen::VectorXd& x) const;
};

enum class Status {
  kOptimal,
  kInfeasible,      // certificate found
  kCutoff,          // lower bound reached Options::cutoff before convergence
  kIterationLimit,  // lower_bound is still valid
};

struct Result {
  Status status = Status::kIterationLimit;
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per row, >= 0, in original row units
  double objective = 0.0;       // at x
  /// Lower bound on the optimal value from the dual function over the box;
  /// valid for every status except kInfeasible.
  double lower_bound = -std::numeric_limits<double>::infinity();
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct Options {
  double tolerance = 1e-9;  // relative primal infeasibility and duality gap
  /// Gap accepted when round-off stalls progress before `tolerance`.
  double acceptable_tolerance = 1e-7;
  int max_iterations = 100;
  double cutoff = std::numeric_limits<double>::infinity();
  /// Finish an optimal solve with an equality-constrained solve on the
  /// active rows, which puts vertex solutions exactly on their vertex.
  bool polish = false;
};

/// Primal-dual interior-point method (Mehrotra predictor-corrector) on the
/// normal equations, with an infeasible start.
Result solve(const Problem& problem, const Options& options = {});

}  // namespace offering::qp

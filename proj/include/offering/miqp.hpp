#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "offering/robust.hpp"

namespace offering {

enum class BranchingRule {
  kMostFractional,  // most fractional u_t, earliest hour on ties
  kFirstFractional,
};

struct SolverConfig {
  double gap_tolerance = 1e-6;          // relative
  /// EUR; a gap this small is accepted whatever the objective's size, since
  /// near-zero optima otherwise demand bounds below the relaxation round-off.
  double absolute_gap_tolerance = 1e-4;
  double feasibility_tolerance = 1e-6;  // absolute, MW and EUR
  long node_limit = 1'000'000;
  double time_limit_seconds = 10.0;
  BranchingRule branching = BranchingRule::kMostFractional;

  void validate() const;  // throws InputError
  /// Bound-minus-objective slack accepted at an objective of `objective`.
  double allowed_gap(double objective) const;
};

enum class SolveStatus {
  kOptimal,     // search completed, gap within tolerance
  kGapLimit,    // search completed but some relaxations failed numerically; gap reported
  kNodeLimit,
  kTimeLimit,
  kInfeasible,
};

const char* to_string(SolveStatus status);

struct SolveResult {
  Schedule schedule;
  double objective = 0.0;  // EUR, of `schedule` under the problem's objective
  double bound = 0.0;      // EUR, upper bound on the optimum
  double gap = 0.0;        // (bound - objective) / max(1, |objective|)
  SolveStatus status = SolveStatus::kInfeasible;
  long nodes = 0;
  double wall_seconds = 0.0;
  /// Deviation duals re-optimised for the returned output (robust flavor only).
  double z = 0.0;
  std::vector<double> q;
  int relaxation_failures = 0;

  bool has_solution() const { return status != SolveStatus::kInfeasible; }
};

/// Global optimum of the mixed-integer problem by branch-and-bound over the
/// commitment binaries with convex QP relaxations. Throws SolverError if no
/// solution can be produced for a reason other than infeasibility.
SolveResult solve(const RobustProblem& problem, const SolverConfig& config = {});

/// Number of solve() calls made by the current thread so far.
long solve_invocations();

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixings of the status, startup and shutdown binaries; nullopt means free.
struct PartialAssignment {
  std::vector<std::optional<int>> u, v, w;

  static PartialAssignment none(std::size_t horizon);
};

struct Relaxation {
  bool feasible = false;
  double bound = 0.0;  // EUR, >= objective of every completion of the assignment
  std::vector<double> p, u, v, w, suc, q, y;
  double z = 0.0;
  double kkt_residual = 0.0;
  bool numerical_failure = false;  // iteration limit; only `bound` is set
  bool cut_off = false;            // bound fell to the cutoff; only `bound` is set
};

/// Continuous relaxation (u, v, w in [0, 1]) under the given fixings. The
/// solve stops early once its bound proves the optimum is <= `cutoff` EUR.
Relaxation qp_relaxation(const RobustProblem& problem, const PartialAssignment& fixed,
                         double cutoff = -std::numeric_limits<double>::infinity());

/// Exhaustive reference solver: every commitment sequence, dynamic
/// programming over outputs on a `grid_step_mw` grid, and for the dualized
/// flavor a scan of z over all breakpoints. Throws InputError for horizons
/// above 12 hours.
SolveResult oracle_solve(const RobustProblem& problem, double grid_step_mw);

/// Largest profit the grid can lose against the continuous optimum: the
/// Lipschitz constant of the hourly objective in p, times the step, times
/// the horizon. Valid when p_min, p_max, ramps and p_0 are multiples of the step.
double oracle_grid_error_bound(const RobustProblem& problem, double grid_step_mw);

}  // namespace offering

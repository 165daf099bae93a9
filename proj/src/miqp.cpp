#include "offering/miqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "offering/qp.hpp"

namespace offering {

void SolverConfig::validate() const {
  if (!(gap_tolerance > 0.0) || !(feasibility_tolerance > 0.0) || !(absolute_gap_tolerance >= 0.0))
    throw InputError("solver tolerances must be positive");
  if (node_limit < 1) throw InputError("node limit must be positive");
  if (!(time_limit_seconds > 0.0)) throw InputError("time limit must be positive");
}

double SolverConfig::allowed_gap(double objective) const {
  return std::max(absolute_gap_tolerance, gap_tolerance * std::max(1.0, std::abs(objective)));
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kGapLimit: return "gap-limit";
    case SolveStatus::kNodeLimit: return "node-limit";
    case SolveStatus::kTimeLimit: return "time-limit";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "?";
}

PartialAssignment PartialAssignment::none(std::size_t horizon) {
  PartialAssignment a;
  a.u.assign(horizon, std::nullopt);
  a.v.assign(horizon, std::nullopt);
  a.w.assign(horizon, std::nullopt);
  return a;
}

namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kRowTol = 1e-9;

// Affine expression over the scaled QP variables.
struct Expr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  static Expr value(double c) { return Expr{{}, c}; }
  bool is_const() const { return terms.empty(); }
  Expr& add(const Expr& other, double k = 1.0) {
    for (const auto& [j, g] : other.terms) terms.emplace_back(j, k * g);
    constant += k * other.constant;
    return *this;
  }
  Expr& add(double c) {
    constant += c;
    return *this;
  }
};

Expr operator-(Expr e) {
  for (auto& term : e.terms) term.second = -term.second;
  e.constant = -e.constant;
  return e;
}

// The mixed-integer model under a partial assignment, with fixed quantities
// folded into constants. Minimisation form: cost minus revenue.
class Model {
 public:
  Model(const RobustProblem& problem, const PartialAssignment& fixed) : problem_(problem) {
    build(fixed);
  }

  bool infeasible() const { return infeasible_; }
  const qp::Problem& qp() const { return qp_; }
  double objective_constant() const { return objective_constant_; }

  double value(const Expr& e, const Eigen::VectorXd& x) const {
    double acc = e.constant;
    for (const auto& [j, g] : e.terms) acc += g * x[j];
    return acc;
  }

  Relaxation extract(const Eigen::VectorXd& x) const {
    Relaxation r;
    const std::size_t n = p_.size();
    for (std::size_t t = 0; t < n; ++t) {
      r.p.push_back(value(p_[t], x));
      r.u.push_back(value(u_[t], x));
      r.v.push_back(value(v_[t], x));
      r.w.push_back(value(w_[t], x));
      r.suc.push_back(value(suc_[t], x));
      r.q.push_back(value(q_[t], x));
      if (!y_.empty()) r.y.push_back(value(y_[t], x));
    }
    r.z = value(z_, x);
    return r;
  }

 private:
  // A variable x with lo <= x <= hi (a box holding some optimal point),
  // stored as x / scale.
  Expr variable(double scale, double lo, double hi) {
    const int j = static_cast<int>(scales_.size());
    scales_.push_back(scale);
    lower_.push_back(lo / scale);
    upper_.push_back(hi / scale);
    return Expr{{{j, scale}}, 0.0};
  }

  // e <= 0
  void row(const Expr& e) {
    if (e.is_const()) {
      if (e.constant > kRowTol * std::max(1.0, std::abs(e.constant))) infeasible_ = true;
      return;
    }
    std::map<int, double> merged;
    for (const auto& [j, g] : e.terms) merged[j] += g;
    qp::Row r;
    for (const auto& [j, g] : merged)
      if (g != 0.0) r.terms.emplace_back(j, g);
    r.rhs = -e.constant;
    if (r.terms.empty()) {
      if (e.constant > kRowTol) infeasible_ = true;
      return;
    }
    rows_.push_back(std::move(r));
  }

  void linear_cost(const Expr& e, double k) {
    for (const auto& [j, g] : e.terms) linear_[static_cast<std::size_t>(j)] += k * g;
    objective_constant_ += k * e.constant;
  }

  void build(const PartialAssignment& fixed) {
    const UnitSpec& unit = problem_.unit;
    const std::size_t n = problem_.horizon();
    const auto prices = problem_.objective_prices();
    const auto& dev = problem_.model.deviation;
    // With a zero budget z absorbs every deviation at no cost, so the dual
    // block is redundant and the model coincides with the nominal one.
    const bool robust = problem_.flavor == Flavor::kDualizedRobust && problem_.model.budget > 0;
    if (fixed.u.size() != n || fixed.v.size() != n || fixed.w.size() != n)
      throw InputError("partial assignment horizon does not match problem");

    const double p_scale = std::max(unit.p_max, 1.0);
    double suc_scale = 1.0;
    for (double c : unit.suc_schedule) suc_scale = std::max(suc_scale, c);
    double dev_scale = 1.0;
    for (double d : dev) dev_scale = std::max(dev_scale, d * unit.p_max);

    auto u_at = [&](long j) -> Expr {
      return j >= 0 ? u_[static_cast<std::size_t>(j)]
                    : Expr::value(unit.pre_horizon_status(static_cast<int>(j) + 1));
    };
    auto v_at = [&](long j) -> Expr {
      return j >= 0 ? v_[static_cast<std::size_t>(j)]
                    : Expr::value(unit.pre_horizon_startup(static_cast<int>(j) + 1));
    };
    auto w_at = [&](long j) -> Expr {
      return j >= 0 ? w_[static_cast<std::size_t>(j)]
                    : Expr::value(unit.pre_horizon_shutdown(static_cast<int>(j) + 1));
    };

    for (std::size_t t = 0; t < n; ++t) {
      if (fixed.u[t]) u_.push_back(Expr::value(*fixed.u[t]));
      else u_.push_back(variable(1.0, 0.0, 1.0));
    }
    for (std::size_t t = 0; t < n; ++t) {
      const long jt = static_cast<long>(t);
      const Expr& ut = u_[t];
      const Expr uprev = u_at(jt - 1);
      if (ut.is_const() && ut.constant == 0.0) p_.push_back(Expr::value(0.0));
      else p_.push_back(variable(p_scale, 0.0, unit.p_max));

      if (fixed.v[t]) {
        v_.push_back(Expr::value(*fixed.v[t]));
      } else if (ut.is_const() && uprev.is_const() && !fixed.w[t]) {
        // Integral neighbouring statuses force the transition indicators.
        v_.push_back(Expr::value(std::max(0.0, ut.constant - uprev.constant)));
      } else {
        v_.push_back(variable(1.0, 0.0, 1.0));
      }
      Expr w = v_[t];
      w.add(uprev).add(ut, -1.0);
      w_.push_back(w);
    }

    // Startup cost: either a constant determined by fixed statuses or a variable.
    std::vector<std::vector<Expr>> suc_rows(n);
    for (std::size_t t = 0; t < n; ++t) {
      const long jt = static_cast<long>(t);
      Expr recent = Expr::value(0.0);
      for (std::size_t tau = 1; tau <= unit.suc_schedule.size(); ++tau) {
        recent.add(u_at(jt - static_cast<long>(tau)));
        const double c = unit.suc_schedule[tau - 1];
        if (c <= 0.0) continue;
        Expr r = u_[t];
        r.add(recent, -1.0);
        suc_rows[t].push_back(Expr{}.add(r, c));
      }
      const bool all_const = std::all_of(suc_rows[t].begin(), suc_rows[t].end(),
                                         [](const Expr& e) { return e.is_const(); });
      if (all_const) {
        double need = 0.0;
        for (const auto& e : suc_rows[t]) need = std::max(need, e.constant);
        suc_.push_back(Expr::value(need));
        suc_rows[t].clear();
      } else {
        suc_.push_back(variable(suc_scale, 0.0, suc_scale));
      }
    }

    // Robust dual variables.
    const bool copies = robust && problem_.explicit_output_copies;
    q_.assign(n, Expr::value(0.0));
    z_ = Expr::value(0.0);
    if (robust) {
      bool any = false;
      for (std::size_t t = 0; t < n; ++t) {
        if (copies && dev[t] > 0.0) {
          y_.push_back(variable(p_scale, 0.0, unit.p_max));
        } else {
          y_.push_back(p_[t]);
        }
        if (dev[t] > 0.0 && !(y_[t].is_const() && y_[t].constant == 0.0)) {
          q_[t] = variable(dev_scale, 0.0, dev[t] * unit.p_max);
          any = true;
        }
      }
      if (any) {
        double z_max = 0.0;
        for (std::size_t t = 0; t < n; ++t) z_max = std::max(z_max, dev[t] * unit.p_max);
        z_ = variable(dev_scale, 0.0, z_max);
      }
    }

    linear_.assign(scales_.size(), 0.0);
    hess_.assign(scales_.size(), 0.0);

    // Objective.
    for (std::size_t t = 0; t < n; ++t) {
      const Expr& p = p_[t];
      if (p.is_const()) {
        objective_constant_ += unit.cost_a * p.constant * p.constant;
      } else {
        const auto [j, s] = p.terms.front();
        hess_[static_cast<std::size_t>(j)] += 2.0 * unit.cost_a * s * s;
      }
      linear_cost(p, unit.cost_b - prices[t]);
      linear_cost(u_[t], unit.cost_fixed);
      linear_cost(suc_[t], 1.0);
      linear_cost(q_[t], 1.0);
    }
    linear_cost(z_, problem_.model.budget);

    // Constraints.
    for (std::size_t t = 0; t < n; ++t) {
      const long jt = static_cast<long>(t);
      const Expr& p = p_[t];
      const Expr& u = u_[t];
      const Expr pprev = t > 0 ? p_[t - 1] : Expr::value(unit.initial.output_mw);
      const Expr uprev = u_at(jt - 1);

      row(Expr{}.add(p).add(u, -unit.p_max));
      row(Expr{}.add(u, unit.p_min).add(p, -1.0));
      if (unit.p_min <= 0.0) row(-p);
      if (!u.is_const()) {
        row(-u);
        row(Expr{}.add(u).add(-1.0));
      }
      row(-v_[t]);
      row(-w_[t]);

      row(Expr{}.add(p).add(pprev, -1.0).add(u, -unit.ramp_up)
              .add(v_[t], -(unit.ramp_startup - unit.ramp_up)));
      row(Expr{}.add(pprev).add(uprev, -unit.ramp_down)
              .add(w_[t], unit.ramp_down - unit.ramp_shutdown).add(p, -1.0));

      Expr starts;
      for (long k = jt - unit.min_up + 1; k <= jt; ++k) starts.add(v_at(k));
      row(starts.add(u, -1.0));
      Expr stops;
      for (long k = jt - unit.min_down + 1; k <= jt; ++k) stops.add(w_at(k));
      row(stops.add(u).add(-1.0));

      for (const auto& r : suc_rows[t]) row(Expr{}.add(r).add(suc_[t], -1.0));
      if (!suc_[t].is_const()) row(-suc_[t]);

      if (fixed.w[t]) {
        row(Expr{}.add(w_[t]).add(-static_cast<double>(*fixed.w[t])));
        row(Expr{}.add(static_cast<double>(*fixed.w[t])).add(w_[t], -1.0));
      }
    }
    if (robust) {
      double z_max = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        if (copies && !y_[t].is_const()) {
          row(Expr{}.add(p_[t]).add(y_[t], -1.0));
          row(Expr{}.add(y_[t]).add(-unit.p_max));
        }
        if (q_[t].is_const()) continue;
        row(Expr{}.add(y_[t], dev[t]).add(z_, -1.0).add(q_[t], -1.0));
        row(-q_[t]);
        row(Expr{}.add(q_[t]).add(-dev[t] * unit.p_max));
        z_max = std::max(z_max, dev[t] * unit.p_max);
      }
      if (!z_.is_const()) {
        row(-z_);
        row(Expr{}.add(z_).add(-z_max));
      }
    }

    qp_.hess = Eigen::Map<const Eigen::VectorXd>(hess_.data(), static_cast<Eigen::Index>(hess_.size()));
    qp_.linear =
        Eigen::Map<const Eigen::VectorXd>(linear_.data(), static_cast<Eigen::Index>(linear_.size()));
    qp_.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), static_cast<Eigen::Index>(lower_.size()));
    qp_.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), static_cast<Eigen::Index>(upper_.size()));
    qp_.rows = std::move(rows_);
  }

  const RobustProblem& problem_;
  std::vector<Expr> p_, u_, v_, w_, suc_, q_, y_;
  Expr z_;
  std::vector<double> scales_, lower_, upper_;
  std::vector<double> linear_, hess_;
  std::vector<qp::Row> rows_;
  double objective_constant_ = 0.0;
  bool infeasible_ = false;
  qp::Problem qp_;
};

Relaxation relax(const RobustProblem& problem, const PartialAssignment& fixed,
                 double cutoff = -std::numeric_limits<double>::infinity(), bool polish = false) {
  Model model(problem, fixed);
  Relaxation r;
  if (model.infeasible()) return r;
  const auto& qp = model.qp();
  if (qp.num_vars() == 0) {
    r = model.extract(Eigen::VectorXd());
    r.feasible = true;
    r.bound = -model.objective_constant();
    return r;
  }
  qp::Options options;
  options.cutoff = -cutoff - model.objective_constant();
  options.polish = polish;
  // The bound is the dual value whatever the accuracy, so a stalled solve
  // close to the branch-and-bound gap still counts as converged.
  options.acceptable_tolerance = 1e-6;
  const qp::Result res = qp::solve(qp, options);
  if (res.status == qp::Status::kInfeasible) return r;
  const double bound = -(res.lower_bound + model.objective_constant());
  if (res.status != qp::Status::kOptimal) {
    r.bound = bound;
    r.feasible = true;
    r.cut_off = res.status == qp::Status::kCutoff;
    r.numerical_failure = res.status == qp::Status::kIterationLimit;
    return r;
  }
  r = model.extract(res.x);
  r.feasible = true;
  r.bound = bound;
  r.kkt_residual = res.kkt_residual;
  return r;
}

struct Candidate {
  Schedule schedule;
  double objective = 0.0;
};

// Lexicographic order on (u, p) used to break objective ties.
bool lex_less(const Schedule& a, const Schedule& b) {
  if (a.u != b.u) return a.u < b.u;
  return a.p < b.p;
}

// Optimal dispatch for a fully fixed commitment.
std::optional<Candidate> evaluate_commitment(const RobustProblem& problem,
                                             const std::vector<int>& commitment, double tol) {
  const std::size_t n = problem.horizon();
  PartialAssignment fixed = PartialAssignment::none(n);
  for (std::size_t t = 0; t < n; ++t) fixed.u[t] = commitment[t];
  const Relaxation r = relax(problem, fixed, -std::numeric_limits<double>::infinity(), true);
  if (!r.feasible || r.numerical_failure) return std::nullopt;
  const UnitSpec& unit = problem.unit;
  std::vector<double> p(n);
  // Snapping to a nano-MW grid removes round-off residue from vertex solutions.
  for (std::size_t t = 0; t < n; ++t)
    p[t] = commitment[t] ? std::clamp(std::round(r.p[t] * 1e9) / 1e9, unit.p_min, unit.p_max) : 0.0;
  Candidate c;
  c.schedule = schedule_from_commitment(unit, commitment, p);
  if (!check_feasibility(unit, c.schedule, tol).empty()) return std::nullopt;
  c.objective = problem.evaluate(c.schedule);
  return c;
}

// Closest commitment (L1 to `target`) that respects minimum up/down times,
// the initial state and any fixings.
std::optional<std::vector<int>> project_commitment(const UnitSpec& unit,
                                                   const std::vector<double>& target,
                                                   const std::vector<int>& fixed) {
  const std::size_t n = target.size();
  const int cap = std::max(unit.min_up, unit.min_down);
  const int states = 2 * cap;  // index = on * cap + (dwell - 1)
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto index = [&](int on, int dwell) { return on * cap + std::min(dwell, cap) - 1; };

  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(static_cast<std::size_t>(states), kInf));
  std::vector<std::vector<int>> from(n + 1, std::vector<int>(static_cast<std::size_t>(states), -1));
  cost[0][static_cast<std::size_t>(index(unit.initial.on ? 1 : 0, unit.initial.dwell_hours))] = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    for (int s = 0; s < states; ++s) {
      const double base = cost[t][static_cast<std::size_t>(s)];
      if (base == kInf) continue;
      const int on = s / cap;
      const int dwell = s % cap + 1;
      auto relax_to = [&](int next_on, int next_dwell) {
        if (fixed[t] >= 0 && fixed[t] != next_on) return;
        const double c = base + std::abs(next_on - target[t]);
        const auto k = static_cast<std::size_t>(index(next_on, next_dwell));
        if (c < cost[t + 1][k] - 1e-12) {
          cost[t + 1][k] = c;
          from[t + 1][k] = s;
        }
      };
      relax_to(on, dwell + 1);
      if (dwell >= (on ? unit.min_up : unit.min_down)) relax_to(1 - on, 1);
    }
  }
  int best = -1;
  for (int s = 0; s < states; ++s)
    if (cost[n][static_cast<std::size_t>(s)] < kInf &&
        (best < 0 || cost[n][static_cast<std::size_t>(s)] < cost[n][static_cast<std::size_t>(best)] - 1e-12))
      best = s;
  if (best < 0) return std::nullopt;
  std::vector<int> out(n);
  for (std::size_t t = n; t > 0; --t) {
    out[t - 1] = best / cap;
    best = from[t][static_cast<std::size_t>(best)];
  }
  return out;
}

struct Node {
  std::vector<int> fixed;  // -1 free, else 0/1
  double bound;
  long id;
  int depth;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

Relaxation qp_relaxation(const RobustProblem& problem, const PartialAssignment& fixed,
                         double cutoff) {
  return relax(problem, fixed, cutoff);
}

namespace {
thread_local long invocations = 0;
}

long solve_invocations() { return invocations; }

SolveResult solve(const RobustProblem& problem, const SolverConfig& config) {
  ++invocations;
  config.validate();
  problem.model.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const std::size_t n = problem.horizon();

  std::optional<Candidate> incumbent;
  auto offer = [&](std::optional<Candidate> c) {
    if (!c) return;
    if (!incumbent) {
      incumbent = std::move(c);
      return;
    }
    const double scale = 1e-9 * std::max(1.0, std::abs(incumbent->objective));
    if (c->objective > incumbent->objective + scale ||
        (c->objective >= incumbent->objective - scale && lex_less(c->schedule, incumbent->schedule)))
      incumbent = std::move(c);
  };
  auto prune_level = [&] {
    return incumbent ? incumbent->objective + config.allowed_gap(incumbent->objective)
                     : -std::numeric_limits<double>::infinity();
  };

  std::set<std::vector<int>> tried;
  auto try_commitment = [&](const std::vector<int>& commitment) {
    if (!tried.insert(commitment).second) return;
    offer(evaluate_commitment(problem, commitment, config.feasibility_tolerance));
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push({std::vector<int>(n, -1), std::numeric_limits<double>::infinity(), 0, 0});
  long next_id = 1;
  long nodes = 0;
  int failures = 0;
  double closed_bound = -std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::kOptimal;

  while (!open.empty()) {
    if (open.top().bound <= prune_level()) {
      // Every remaining node is dominated.
      closed_bound = std::max(closed_bound, open.top().bound);
      break;
    }
    if (nodes >= config.node_limit) {
      status = SolveStatus::kNodeLimit;
      break;
    }
    if (elapsed() > config.time_limit_seconds) {
      status = SolveStatus::kTimeLimit;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes;

    PartialAssignment fixed = PartialAssignment::none(n);
    for (std::size_t t = 0; t < n; ++t)
      if (node.fixed[t] >= 0) fixed.u[t] = node.fixed[t];
    const Relaxation r = relax(problem, fixed, prune_level());
    if (!r.feasible) continue;
    if (r.cut_off) {
      closed_bound = std::max(closed_bound, std::min(r.bound, node.bound));
      continue;
    }
    if (r.numerical_failure) {
      ++failures;
      const double bound = std::min(r.bound, node.bound);
      const auto free_it = std::find(node.fixed.begin(), node.fixed.end(), -1);
      if (free_it == node.fixed.end()) {
        try_commitment(node.fixed);
        closed_bound = std::max(closed_bound, bound);
        continue;
      }
      const auto t = static_cast<std::size_t>(free_it - node.fixed.begin());
      for (int value : {1, 0}) {
        Node child{node.fixed, bound, next_id++, node.depth + 1};
        child.fixed[t] = value;
        open.push(std::move(child));
      }
      continue;
    }
    const double bound = std::min(r.bound, node.bound);
    if (bound <= prune_level()) {
      closed_bound = std::max(closed_bound, bound);
      continue;
    }

    // Branching candidate.
    int branch = -1;
    double best_score = kIntegralityTol;
    for (std::size_t t = 0; t < n; ++t) {
      if (node.fixed[t] >= 0) continue;
      const double frac = std::min(r.u[t], 1.0 - r.u[t]);
      if (frac <= kIntegralityTol) continue;
      if (config.branching == BranchingRule::kFirstFractional) {
        branch = static_cast<int>(t);
        break;
      }
      if (frac > best_score + 1e-12) {
        best_score = frac;
        branch = static_cast<int>(t);
      }
    }

    std::vector<int> rounded(n);
    for (std::size_t t = 0; t < n; ++t)
      rounded[t] = node.fixed[t] >= 0 ? node.fixed[t] : (r.u[t] > 0.5 ? 1 : 0);
    if (branch < 0) {
      // Integral relaxation: its commitment is optimal for this node.
      try_commitment(rounded);
      if (!incumbent || incumbent->objective < bound - config.allowed_gap(bound))
        closed_bound = std::max(closed_bound, bound);
      continue;
    }
    if (auto projected = project_commitment(problem.unit, r.u, node.fixed)) try_commitment(*projected);

    const auto t = static_cast<std::size_t>(branch);
    const int first = r.u[t] > 0.5 ? 1 : 0;
    for (int value : {first, 1 - first}) {
      Node child{node.fixed, bound, next_id++, node.depth + 1};
      child.fixed[t] = value;
      open.push(std::move(child));
    }
  }

  SolveResult result;
  result.nodes = nodes;
  result.relaxation_failures = failures;
  double open_bound = -std::numeric_limits<double>::infinity();
  if (status != SolveStatus::kOptimal) {
    // Open nodes still carry their parents' bounds.
    auto copy = open;
    while (!copy.empty()) {
      open_bound = std::max(open_bound, copy.top().bound);
      copy.pop();
    }
  }
  result.wall_seconds = elapsed();
  if (!incumbent) {
    if (status == SolveStatus::kOptimal) {
      if (failures > 0) throw SolverError("relaxations failed and no feasible schedule was found");
      result.status = SolveStatus::kInfeasible;
      result.schedule = Schedule::all_off(n);
      result.bound = -std::numeric_limits<double>::infinity();
      result.objective = -std::numeric_limits<double>::infinity();
      return result;
    }
    throw SolverError(std::string("no feasible schedule found before the ") + to_string(status));
  }
  result.schedule = incumbent->schedule;
  result.objective = incumbent->objective;
  result.bound = std::max({result.objective, closed_bound, open_bound});
  result.gap = (result.bound - result.objective) / std::max(1.0, std::abs(result.objective));
  if (status == SolveStatus::kOptimal && result.bound - result.objective > config.allowed_gap(result.objective))
    status = SolveStatus::kGapLimit;
  result.status = status;
  if (problem.flavor == Flavor::kDualizedRobust) {
    const auto dual = eval_dev_dual(problem.model.deviation, result.schedule.p, problem.model.budget);
    result.z = dual.z;
    result.q = dual.q;
  }
  result.wall_seconds = elapsed();
  return result;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle
// ---------------------------------------------------------------------------

namespace {

bool min_times_ok(const UnitSpec& unit, const std::vector<int>& u) {
  const long n = static_cast<long>(u.size());
  auto status = [&](long j) {
    return j >= 0 ? u[static_cast<std::size_t>(j)] : unit.pre_horizon_status(static_cast<int>(j) + 1);
  };
  auto start = [&](long j) { return status(j) == 1 && status(j - 1) == 0 ? 1 : 0; };
  auto stop = [&](long j) { return status(j) == 0 && status(j - 1) == 1 ? 1 : 0; };
  // Pre-horizon transitions are taken from the unit's history helpers.
  auto start_at = [&](long j) { return j >= 0 ? start(j) : unit.pre_horizon_startup(static_cast<int>(j) + 1); };
  auto stop_at = [&](long j) { return j >= 0 ? stop(j) : unit.pre_horizon_shutdown(static_cast<int>(j) + 1); };
  for (long t = 0; t < n; ++t) {
    int starts = 0, stops = 0;
    for (long k = t - unit.min_up + 1; k <= t; ++k) starts += start_at(k);
    for (long k = t - unit.min_down + 1; k <= t; ++k) stops += stop_at(k);
    if (starts > u[static_cast<std::size_t>(t)]) return false;
    if (stops > 1 - u[static_cast<std::size_t>(t)]) return false;
  }
  return true;
}

std::vector<double> output_grid(const UnitSpec& unit, double step) {
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double p = unit.p_min + static_cast<double>(k) * step;
    if (p > unit.p_max + 1e-9) break;
    grid.push_back(std::min(p, unit.p_max));
  }
  if (grid.empty() || grid.back() < unit.p_max - 1e-9) grid.push_back(unit.p_max);
  return grid;
}

struct DpOutcome {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> p;
};

// Best dispatch for a fixed commitment and dual threshold z, by DP over grid outputs.
DpOutcome dispatch_dp(const RobustProblem& problem, const std::vector<int>& u,
                      const std::vector<double>& on_grid, double z, bool want_path) {
  const UnitSpec& unit = problem.unit;
  const std::size_t n = u.size();
  const auto prices = problem.objective_prices();
  const bool robust = problem.flavor == Flavor::kDualizedRobust;
  const auto& dev = problem.model.deviation;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  constexpr double kEps = 1e-9;

  std::vector<double> prev_grid{unit.initial.output_mw};
  std::vector<double> prev_val{0.0};
  std::vector<std::vector<int>> back;
  std::vector<std::vector<double>> grids;
  int u_prev = unit.initial.on ? 1 : 0;
  for (std::size_t t = 0; t < n; ++t) {
    const int ut = u[t];
    const int vt = (ut == 1 && u_prev == 0) ? 1 : 0;
    const int wt = (ut == 0 && u_prev == 1) ? 1 : 0;
    const double up = unit.ramp_up * ut + (unit.ramp_startup - unit.ramp_up) * vt;
    const double down = unit.ramp_down * u_prev - (unit.ramp_down - unit.ramp_shutdown) * wt;
    const std::vector<double> grid = ut ? on_grid : std::vector<double>{0.0};
    std::vector<double> val(grid.size(), kNegInf);
    std::vector<int> arg(grid.size(), -1);
    // Feasible predecessors of p form the window [p - up, p + down]; both ends
    // move right as p increases, so a monotone deque gives the window maximum.
    std::deque<std::size_t> dq;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double p = grid[i];
      while (hi < prev_grid.size() && prev_grid[hi] <= p + down + kEps) {
        if (prev_val[hi] > kNegInf) {
          while (!dq.empty() && prev_val[dq.back()] <= prev_val[hi]) dq.pop_back();
          dq.push_back(hi);
        }
        ++hi;
      }
      while (!dq.empty() && prev_grid[dq.front()] < p - up - kEps) dq.pop_front();
      if (dq.empty()) continue;
      double hour = prices[t] * p - (unit.cost_a * p + unit.cost_b) * p;
      if (robust) hour -= std::max(0.0, dev[t] * p - z);
      val[i] = prev_val[dq.front()] + hour;
      arg[i] = static_cast<int>(dq.front());
    }
    if (want_path) {
      back.push_back(std::move(arg));
      grids.push_back(grid);
    }
    prev_grid = grid;
    prev_val = std::move(val);
    u_prev = ut;
  }
  DpOutcome out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < prev_val.size(); ++i)
    if (prev_val[i] > out.value) {
      out.value = prev_val[i];
      best = i;
    }
  if (want_path && out.value > kNegInf) {
    out.p.assign(n, 0.0);
    int idx = static_cast<int>(best);
    for (std::size_t t = n; t > 0; --t) {
      out.p[t - 1] = grids[t - 1][static_cast<std::size_t>(idx)];
      idx = back[t - 1][static_cast<std::size_t>(idx)];
    }
  }
  return out;
}

}  // namespace

SolveResult oracle_solve(const RobustProblem& problem, double grid_step_mw) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = problem.horizon();
  if (n > 12) throw InputError("oracle horizon limited to 12 hours, got " + std::to_string(n));
  if (!(grid_step_mw > 0.0)) throw InputError("grid step must be positive");
  problem.model.validate();
  const UnitSpec& unit = problem.unit;
  const bool robust = problem.flavor == Flavor::kDualizedRobust;
  const auto on_grid = output_grid(unit, grid_step_mw);

  std::vector<double> thresholds{0.0};
  if (robust) {
    for (std::size_t t = 0; t < n; ++t)
      for (double p : on_grid) thresholds.push_back(problem.model.deviation[t] * p);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  }

  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<int> best_u;
  double best_z = 0.0;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    std::vector<int> u(n);
    for (std::size_t t = 0; t < n; ++t) u[t] = static_cast<int>((mask >> t) & 1ul);
    if (!min_times_ok(unit, u)) continue;
    double fixed_cost = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      fixed_cost += unit.cost_fixed * u[t] + required_startup_cost(unit, u, t);
    for (double z : thresholds) {
      const DpOutcome dp = dispatch_dp(problem, u, on_grid, z, false);
      if (dp.value == -std::numeric_limits<double>::infinity()) break;
      const double value = dp.value - fixed_cost - (robust ? problem.model.budget * z : 0.0);
      if (value > best_value + 1e-9) {
        best_value = value;
        best_u = u;
        best_z = z;
      }
    }
  }

  SolveResult result;
  result.nodes = 1l << n;
  if (best_u.empty()) {
    result.status = SolveStatus::kInfeasible;
    result.schedule = Schedule::all_off(n);
    return result;
  }
  const DpOutcome dp = dispatch_dp(problem, best_u, on_grid, best_z, true);
  result.schedule = schedule_from_commitment(unit, best_u, dp.p);
  result.objective = problem.evaluate(result.schedule);
  result.bound = result.objective;
  result.status = SolveStatus::kOptimal;
  if (robust) {
    const auto dual = eval_dev_dual(problem.model.deviation, result.schedule.p, problem.model.budget);
    result.z = dual.z;
    result.q = dual.q;
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double oracle_grid_error_bound(const RobustProblem& problem, double grid_step_mw) {
  const UnitSpec& unit = problem.unit;
  const auto prices = problem.objective_prices();
  const bool robust = problem.flavor == Flavor::kDualizedRobust;
  double lipschitz = 0.0;
  for (std::size_t t = 0; t < prices.size(); ++t) {
    const double slope_low = std::abs(prices[t] - unit.cost_b);
    const double slope_high = std::abs(prices[t] - unit.cost_b - 2.0 * unit.cost_a * unit.p_max);
    double l = std::max(slope_low, slope_high);
    if (robust) l += problem.model.deviation[t];
    lipschitz = std::max(lipschitz, l);
  }
  return lipschitz * grid_step_mw * static_cast<double>(prices.size());
}

}  // namespace offering

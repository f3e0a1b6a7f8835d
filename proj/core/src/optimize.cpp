#include "boxcert/optimize.hpp"

#include "boxcert/jacobian.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>
#include <random>

namespace boxcert {

std::string_view to_string(OptStatus s) {
  switch (s) {
    case OptStatus::OptimalWithinGap:
      return "optimal-within-gap";
    case OptStatus::BudgetExhausted:
      return "budget-exhausted";
    case OptStatus::Infeasible:
      return "infeasible";
  }
  return "budget-exhausted";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Incumbent {
  bool found = false;
  Vector x;
  double value = kInf;

  void offer(const Incumbent& other) {
    if (other.found && other.value < value) *this = other;
  }
};

bool feasible(const SpecCNF* constraints, const Vector& y) {
  return !constraints || check_output(*constraints, y).satisfied;
}

// Projected sign-gradient descent on the objective from the box center and
// random candidates. Infeasible iterates step to raise the margin of the
// first violated constraint clause instead.
Incumbent search_incumbent(const Graph& graph, const Vector& obj, const Box& box,
                           const SpecCNF* constraints, const PGDConfig& cfg) {
  Incumbent best;
  const Vector width = box.width();
  auto consider = [&](const Vector& x, const Vector& y) {
    if (!feasible(constraints, y)) return;
    const double v = obj.dot(y);
    if (v < best.value) best = {true, x, v};
  };
  std::vector<Vector> starts{box.center()};
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r + 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int b = 0; b < cfg.batch; ++b) {
      Vector x(box.dim());
      for (int k = 0; k < box.dim(); ++k) x[k] = box.lower[k] + unit(rng) * width[k];
      starts.push_back(box.clamp(x));
    }
  }
  for (Vector x : starts) {
    double step = cfg.step_size;
    for (int s = 0; s < cfg.steps; ++s) {
      const Vector y = evaluate(graph, x);
      consider(x, y);
      Vector dir;
      if (feasible(constraints, y)) {
        dir = -point_gradient(graph, x, obj);
      } else {
        const PointCheck pc = check_output(*constraints, y);
        const auto& atoms = constraints->clauses[static_cast<size_t>(pc.clause_index)].atoms;
        const Atom* top = &atoms.front();
        for (const Atom& a : atoms) {
          if (a.margin(y) > top->margin(y)) top = &a;
        }
        dir = point_gradient(graph, x, top->coeffs);
      }
      x = box.clamp(x + step * width.cwiseProduct(dir.cwiseSign()));
      step *= 0.98;
    }
    consider(x, evaluate(graph, x));
  }
  return best;
}

struct BoundInfo {
  double lb = -kInf;
  Vector coeffs;
  bool infeasible = false;
};

BoundInfo bound_box(const Graph& graph, const Vector& obj, const SpecCNF* constraints, const Box& box,
                    const OptConfig& cfg) {
  int rows = 1;
  if (constraints) {
    for (const auto& c : constraints->clauses) rows += static_cast<int>(c.atoms.size());
  }
  Matrix c(rows, graph.output_dim());
  Vector bias = Vector::Zero(rows);
  c.row(0) = obj.transpose();
  int r = 1;
  if (constraints) {
    for (const auto& cl : constraints->clauses) {
      for (const auto& a : cl.atoms) {
        c.row(r) = a.coeffs.transpose();
        bias[r++] = a.bias;
      }
    }
  }
  const OutputBounds ob = output_bounds(graph, box, cfg.relax, cfg.mode, &c);
  BoundInfo info;
  info.lb = ob.bounds.lower[0];
  info.coeffs = ob.affine.A_l.row(0).transpose();
  if (constraints) {
    r = 1;
    for (const auto& cl : constraints->clauses) {
      bool violated = true;
      for (size_t a = 0; a < cl.atoms.size(); ++a, ++r) violated = violated && ob.bounds.upper[r] + bias[r] <= 0.0;
      info.infeasible = info.infeasible || violated;
    }
  }
  return info;
}

struct Domain {
  Box box;
  double lb = -kInf;
  Vector coeffs;
  int depth = 0;
  long id = 0;
};

struct ByBound {
  bool operator()(const Domain& a, const Domain& b) const {
    if (a.lb != b.lb) return a.lb > b.lb;
    return a.id > b.id;
  }
};

std::uint64_t mix_seed(std::uint64_t seed, long id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

OptResult minimize(const Graph& graph, const Vector& objective, const Box& box,
                   const SpecCNF* constraints, const OptConfig& cfg) {
  check_box(box, graph);
  if (objective.size() != graph.output_dim()) {
    throw GraphError("objective has " + std::to_string(objective.size()) +
                     " coefficients, graph output has dimension " + std::to_string(graph.output_dim()));
  }
  if (constraints) {
    check_spec(*constraints);
    if (constraints->output_dim() != graph.output_dim()) {
      throw GraphError("constraint atoms do not match the graph output dimension");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  OptResult res;
  Incumbent inc = search_incumbent(graph, objective, box, constraints, cfg.pgd);

  std::priority_queue<Domain, std::vector<Domain>, ByBound> queue;
  std::vector<Domain> stuck;
  long next_id = 1;

  const BoundInfo root = bound_box(graph, objective, constraints, box, cfg);
  res.stats.domains = 1;
  if (root.infeasible) {
    ++res.stats.pruned_infeasible;
  } else if (inc.found && root.lb > inc.value) {
    ++res.stats.pruned_bound;
    if (cfg.record_pruned) res.pruned.push_back(box);
  } else {
    queue.push({box, root.lb, root.coeffs, 0, 0});
  }

  auto certified = [&] {
    double c = inc.value;
    if (!queue.empty()) c = std::min(c, queue.top().lb);
    for (const auto& d : stuck) c = std::min(c, d.lb);
    return c;
  };

  OptStatus status = OptStatus::BudgetExhausted;
  while (true) {
    const double lower = certified();
    if (cfg.record_trace) res.trace.push_back({res.stats.domains, lower, inc.value});
    if (inc.found && inc.value - lower <= cfg.gap_tol) {
      status = OptStatus::OptimalWithinGap;
      break;
    }
    if (queue.empty()) {
      status = stuck.empty() ? (inc.found ? OptStatus::OptimalWithinGap : OptStatus::Infeasible)
                             : OptStatus::BudgetExhausted;
      break;
    }
    if (res.stats.domains >= cfg.max_domains || elapsed() > cfg.timeout) break;

    std::vector<Domain> parents;
    while (!queue.empty() && static_cast<int>(parents.size()) < cfg.batch) {
      Domain d = queue.top();
      queue.pop();
      if (!(d.box.max_width() > cfg.min_width)) {
        stuck.push_back(std::move(d));
        continue;
      }
      parents.push_back(std::move(d));
    }
    std::vector<Domain> children;
    for (const Domain& p : parents) {
      auto [l, r] = split(p.box, p.coeffs, cfg.branching);
      for (Box* b : {&l, &r}) {
        Domain c;
        c.box = std::move(*b);
        c.lb = p.lb;
        c.depth = p.depth + 1;
        c.id = next_id++;
        children.push_back(std::move(c));
      }
    }
    std::vector<BoundInfo> infos(children.size());
    std::vector<Incumbent> found(children.size());
    parallel_for(static_cast<int>(children.size()), cfg.workers, [&](int i) {
      const Domain& c = children[static_cast<size_t>(i)];
      infos[static_cast<size_t>(i)] = bound_box(graph, objective, constraints, c.box, cfg);
      if (!infos[static_cast<size_t>(i)].infeasible) {
        PGDConfig pgd = cfg.sub_pgd;
        pgd.seed = mix_seed(cfg.sub_pgd.seed, c.id);
        found[static_cast<size_t>(i)] = search_incumbent(graph, objective, c.box, constraints, pgd);
      }
    });
    res.stats.domains += static_cast<long>(children.size());
    for (const auto& f : found) inc.offer(f);

    for (size_t i = 0; i < children.size(); ++i) {
      Domain& c = children[i];
      res.stats.max_depth = std::max(res.stats.max_depth, c.depth);
      if (infos[i].infeasible) {
        ++res.stats.pruned_infeasible;
        continue;
      }
      c.lb = std::max(c.lb, infos[i].lb);
      c.coeffs = std::move(infos[i].coeffs);
      if (inc.found && c.lb > inc.value) {
        ++res.stats.pruned_bound;
        if (cfg.record_pruned) res.pruned.push_back(c.box);
        continue;
      }
      queue.push(std::move(c));
    }
  }

  res.status = status;
  res.has_incumbent = inc.found;
  res.x_best = inc.found ? inc.x : Vector();
  res.primal_value = inc.value;
  res.certified_bound = status == OptStatus::Infeasible ? kInf : std::min(certified(), inc.value);
  res.gap = inc.found ? res.primal_value - res.certified_bound : kInf;
  res.stats.wall_time = elapsed();
  return res;
}

OptResult maximize(const Graph& graph, const Vector& objective, const Box& box,
                   const SpecCNF* constraints, const OptConfig& cfg) {
  OptResult r = minimize(graph, -objective, box, constraints, cfg);
  r.maximize = true;
  r.primal_value = -r.primal_value;
  r.certified_bound = -r.certified_bound;
  return r;
}

}  // namespace boxcert

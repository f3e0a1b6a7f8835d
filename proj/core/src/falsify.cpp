#include "boxcert/falsify.hpp"

#include "boxcert/jacobian.hpp"
#include "boxcert/parallel.hpp"

#include <algorithm>
#include <random>

namespace boxcert {

namespace {

struct Hit {
  bool found = false;
  Counterexample cex;
};

Hit confirm(const SpecCNF& spec, const Graph& graph, const Vector& x) {
  const PointCheck pc = check_output(spec, evaluate(graph, x));
  if (pc.satisfied) return {};
  return {true, {x, pc.clause_index, pc.margin}};
}

Hit descend(const Graph& graph, const SpecCNF& spec, const Box& box, Vector x, const PGDConfig& cfg) {
  const Vector width = box.width();
  double step = cfg.step_size;
  for (int s = 0; s < cfg.steps; ++s) {
    const Vector y = evaluate(graph, x);
    const PointCheck pc = check_output(spec, y);
    if (!pc.satisfied) return {true, {x, pc.clause_index, pc.margin}};

    // Steepest clause: smallest margin, driven through its maximizing atom.
    int worst = 0;
    double worst_margin = clause_margin(spec.clauses[0], y);
    for (size_t c = 1; c < spec.clauses.size(); ++c) {
      const double m = clause_margin(spec.clauses[c], y);
      if (m < worst_margin) {
        worst_margin = m;
        worst = static_cast<int>(c);
      }
    }
    const auto& atoms = spec.clauses[static_cast<size_t>(worst)].atoms;
    const Atom* top = &atoms.front();
    for (const Atom& a : atoms) {
      if (a.margin(y) > top->margin(y)) top = &a;
    }
    // d softplus(m)/dx = sigmoid(m) dm/dx; the positive factor drops out of
    // the sign step.
    const Vector g = point_gradient(graph, x, top->coeffs);
    x -= step * width.cwiseProduct(g.cwiseSign());
    x = box.clamp(x);
    step *= 0.98;
  }
  return confirm(spec, graph, x);
}

}  // namespace

std::optional<Counterexample> pgd_search(const Graph& graph, const SpecCNF& spec, const Box& box,
                                         const PGDConfig& cfg) {
  check_box(box, graph);
  const int n = box.dim();
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r + 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector> starts(static_cast<size_t>(cfg.batch));
    for (auto& x : starts) {
      x.resize(n);
      for (int k = 0; k < n; ++k) x[k] = box.lower[k] + unit(rng) * (box.upper[k] - box.lower[k]);
      x = box.clamp(x);
    }
    std::vector<Hit> hits(starts.size());
    parallel_for(cfg.batch, cfg.workers, [&](int i) {
      hits[static_cast<size_t>(i)] = descend(graph, spec, box, starts[static_cast<size_t>(i)], cfg);
    });
    const Hit* best = nullptr;
    for (const Hit& h : hits) {
      if (h.found && (!best || h.cex.clause_index < best->cex.clause_index)) best = &h;
    }
    if (best) return best->cex;
  }
  return std::nullopt;
}

}  // namespace boxcert

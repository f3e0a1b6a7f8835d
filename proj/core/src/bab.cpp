#include "boxcert/bab.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace boxcert {

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Verified:
      return "verified";
    case VerifyStatus::Falsified:
      return "falsified";
    case VerifyStatus::Unknown:
      return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Branching b) { return b == Branching::Naive ? "naive" : "smart"; }

std::optional<Branching> branching_from_string(std::string_view s) {
  if (s == "naive") return Branching::Naive;
  if (s == "smart") return Branching::Smart;
  return std::nullopt;
}

std::vector<ClauseBound> bound_clauses(const Graph& graph, const SpecCNF& spec,
                                       const std::vector<int>& clauses, const Box& box,
                                       const RelaxParams& params, BoundMode mode) {
  int rows = 0;
  for (int c : clauses) rows += static_cast<int>(spec.clauses[static_cast<size_t>(c)].atoms.size());
  Matrix obj(rows, graph.output_dim());
  Vector bias(rows);
  int r = 0;
  for (int c : clauses) {
    for (const Atom& a : spec.clauses[static_cast<size_t>(c)].atoms) {
      obj.row(r) = a.coeffs.transpose();
      bias[r] = a.bias;
      ++r;
    }
  }
  const OutputBounds ob = output_bounds(graph, box, params, mode, &obj);

  std::vector<ClauseBound> out;
  r = 0;
  for (int c : clauses) {
    ClauseBound cb;
    cb.value = -std::numeric_limits<double>::infinity();
    const auto& atoms = spec.clauses[static_cast<size_t>(c)].atoms;
    for (size_t a = 0; a < atoms.size(); ++a, ++r) {
      const double lb = ob.bounds.lower[r] + bias[r];
      if (lb > cb.value) {
        cb.value = lb;
        cb.atom = static_cast<int>(a);
        cb.coeffs = ob.affine.A_l.row(r).transpose();
      }
    }
    out.push_back(std::move(cb));
  }
  return out;
}

ClauseBound bound_clause(const Graph& graph, const Clause& clause, const Box& box,
                         const RelaxParams& params, BoundMode mode) {
  SpecCNF one;
  one.clauses = {clause};
  one.input_box = box;
  return bound_clauses(graph, one, {0}, box, params, mode).front();
}

double clause_lower_bound(const Graph& graph, const Clause& clause, const Box& box,
                          const RelaxParams& params, BoundMode mode) {
  return bound_clause(graph, clause, box, params, mode).value;
}

int split_dimension(const Box& box, const Vector& coeffs, Branching strategy) {
  const Vector w = box.width();
  if (box.dim() == 0 || !(w.maxCoeff() > 0.0)) throw GraphError("split: box has zero width");
  auto argmax = [](const Vector& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
      if (v[i] > v[best]) best = i;
    }
    return best;
  };
  if (strategy == Branching::Smart && coeffs.size() == w.size()) {
    const Vector score = coeffs.cwiseAbs().cwiseProduct(w);
    if (score.maxCoeff() > 0.0) return argmax(score);
  }
  return argmax(w);
}

std::pair<Box, Box> split(const Box& box, const Vector& coeffs, Branching strategy) {
  return box.bisect(split_dimension(box, coeffs, strategy));
}

namespace {

using Clock = std::chrono::steady_clock;

struct BatchItem {
  std::vector<ClauseBound> bounds;   // aligned with the subdomain's pending list
  std::optional<Counterexample> cex;
};

std::uint64_t mix_seed(std::uint64_t seed, long id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

VerifyResult verify(const Graph& graph, const SpecCNF& spec, const VerifyConfig& cfg,
                    const BabObserver& observer) {
  check_spec(spec, graph);
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  const Box& root = spec.input_box;
  const int num_clauses = static_cast<int>(spec.clauses.size());

  VerifyResult result;
  auto finish = [&](VerifyStatus s) {
    result.status = s;
    result.stats.wall_time = elapsed();
    return result;
  };

  if (cfg.falsify) {
    PGDConfig pgd = cfg.pgd;
    pgd.workers = cfg.workers;
    if (auto cex = pgd_search(graph, spec, root, pgd)) {
      result.counterexample = std::move(cex);
      result.stats.worst_bound = result.counterexample->margin;
      return finish(VerifyStatus::Falsified);
    }
  }

  Subdomain rootdom;
  rootdom.box = root;
  rootdom.clause_bounds = Vector::Constant(num_clauses, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < num_clauses; ++c) rootdom.pending.push_back(c);
  std::vector<Subdomain> stack{rootdom};
  std::vector<Subdomain> stuck;
  long next_id = 1;

  BabSnapshot snap;
  snap.root_volume = root.volume(root);
  snap.stack = &stack;
  double certified_worst = std::numeric_limits<double>::infinity();

  auto open_volume = [&] {
    double v = 0.0;
    for (const auto& s : stack) v += s.box.volume(root);
    for (const auto& s : stuck) v += s.box.volume(root);
    return v;
  };
  auto leaf_worst = [&] {
    double w = certified_worst;
    for (const auto* group : {&stack, &stuck}) {
      for (const auto& s : *group) {
        for (int c : s.pending) w = std::min(w, s.clause_bounds[c]);
      }
    }
    return w;
  };

  while (!stack.empty()) {
    if (result.stats.domains >= cfg.max_domains || elapsed() > cfg.timeout) {
      result.stats.worst_bound = leaf_worst();
      return finish(VerifyStatus::Unknown);
    }
    const long room = cfg.max_domains - result.stats.domains;
    const size_t take = static_cast<size_t>(std::min<long>({static_cast<long>(cfg.batch), room,
                                                             static_cast<long>(stack.size())}));
    std::vector<Subdomain> batch(std::make_move_iterator(stack.end() - static_cast<long>(take)),
                                 std::make_move_iterator(stack.end()));
    stack.resize(stack.size() - take);
    std::reverse(batch.begin(), batch.end());  // top of the stack first

    std::vector<BatchItem> items(batch.size());
    parallel_for(static_cast<int>(batch.size()), cfg.workers, [&](int i) {
      const Subdomain& d = batch[static_cast<size_t>(i)];
      BatchItem& it = items[static_cast<size_t>(i)];
      it.bounds = bound_clauses(graph, spec, d.pending, d.box, cfg.relax, cfg.mode);
      bool open = false;
      for (const auto& b : it.bounds) open = open || !(b.value > cfg.tolerance);
      if (open && cfg.falsify && d.depth > 0) {
        PGDConfig pgd = cfg.sub_pgd;
        pgd.seed = mix_seed(cfg.sub_pgd.seed, d.id);
        pgd.workers = 1;
        it.cex = pgd_search(graph, spec, d.box, pgd);
      }
    });
    result.stats.domains += static_cast<long>(batch.size());

    std::vector<Subdomain> children;
    for (size_t i = 0; i < batch.size(); ++i) {
      Subdomain& d = batch[i];
      BatchItem& it = items[i];
      result.stats.max_depth = std::max(result.stats.max_depth, d.depth);
      if (it.cex) {
        result.counterexample = std::move(it.cex);
        result.stats.worst_bound = result.counterexample->margin;
        return finish(VerifyStatus::Falsified);
      }
      std::vector<int> still;
      int worst = -1;
      for (size_t k = 0; k < d.pending.size(); ++k) {
        const int c = d.pending[k];
        d.clause_bounds[c] = it.bounds[k].value;
        if (!(it.bounds[k].value > cfg.tolerance)) {
          still.push_back(c);
          if (worst < 0 || it.bounds[k].value < it.bounds[static_cast<size_t>(worst)].value) {
            worst = static_cast<int>(k);
          }
        }
      }
      d.pending = std::move(still);
      if (d.pending.empty()) {
        snap.certified_volume += d.box.volume(root);
        certified_worst = std::min(certified_worst, d.clause_bounds.minCoeff());
        continue;
      }
      if (!(d.box.max_width() > cfg.min_width)) {
        ++result.stats.unsplittable;
        stuck.push_back(std::move(d));
        continue;
      }
      auto [left, right] = split(d.box, it.bounds[static_cast<size_t>(worst)].coeffs, cfg.branching);
      for (Box* b : {&left, &right}) {
        Subdomain child;
        child.box = std::move(*b);
        child.clause_bounds = d.clause_bounds;
        child.pending = d.pending;
        child.depth = d.depth + 1;
        child.id = next_id++;
        children.push_back(std::move(child));
      }
    }
    // Children of the first batch entry end up on top.
    for (auto c = children.rbegin(); c != children.rend(); ++c) stack.push_back(std::move(*c));

    if (observer) {
      snap.open_volume = open_volume();
      snap.domains = result.stats.domains;
      observer(snap);
    }
  }

  result.stats.worst_bound = leaf_worst();
  return finish(stuck.empty() ? VerifyStatus::Verified : VerifyStatus::Unknown);
}

}  // namespace boxcert

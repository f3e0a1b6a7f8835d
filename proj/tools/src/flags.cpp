#include "flags.hpp"

namespace boxcert::cli {

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table = {
      {"bounds", kBounds, "certified output bounds of a graph over a box"},
      {"verify", kVerify, "decide a CNF specification by branch-and-bound"},
      {"minimize", kMinimize, "certified minimum of a linear objective of the output"},
      {"maximize", kMaximize, "certified maximum of a linear objective of the output"},
      {"certify", kCertify, "check a control certificate for a system bundle"},
      {"selftest", kSelftest, "run the shipped fixture suite"},
  };
  return table;
}

const std::vector<Flag>& flag_table() {
  using K = FlagKind;
  static const std::vector<Flag> table = {
      {"graph", K::Value, "FILE", "graph file", kBounds | kVerify | kOptimize, kBounds | kVerify | kOptimize},
      {"spec", K::Value, "FILE", "specification file", kVerify, kVerify},
      {"box", K::Value, "\"L0 U0 L1 U1 ...\"",
       "input box as interleaved lower/upper pairs (verify: overrides the spec box; certify: overrides the "
       "bundle box)",
       kBounds | kVerify | kOptimize | kCertify, kBounds | kOptimize},
      {"objective", K::Value, "\"C0 C1 ...\"", "objective row over the graph output", kOptimize, kOptimize},
      {"constraints", K::Value, "FILE", "specification whose clauses must hold at feasible points", kOptimize},
      {"with-jacobian", K::Switch, "", "also bound the gradient of a scalar-output graph", kBounds},
      {"system", K::Value, "FILE", "system bundle file", kCertify, kCertify},
      {"kind", K::Value, "KIND",
       "reach, lyap-discrete, lyap-continuous, robust-roa, contraction or barrier", kCertify, kCertify},
      {"w-box", K::Value, "\"L0 U0 ...\"", "disturbance box for robust-roa (overrides the bundle)", kCertify},
      {"vertices", K::Value, "FILE", "control vertices for barrier", kCertify},
      {"rho", K::Value, "X", "sublevel threshold", kCertify, 0, "certify/rho"},
      {"c1", K::Value, "X", "inner level of the continuous-time shell", kCertify, 0, "certify/c1"},
      {"c2", K::Value, "X", "outer level of the continuous-time shell", kCertify, 0, "certify/c2"},
      {"kappa", K::Value, "X", "decrease rate", kCertify, 0, "certify/kappa"},
      {"alpha", K::Value, "X", "barrier class-K slope", kCertify, 0, "certify/alpha"},
      {"nu", K::Value, "X", "disturbance threshold on psi", kCertify, 0, "certify/nu"},
      {"epsilon", K::Value, "X", "half width of the contraction delta box", kCertify, 0, "certify/epsilon"},
      {"rate", K::Value, "X", "contraction rate", kCertify, 0, "certify/rate"},
      {"tol", K::Value, "X", "boundary tolerance of certificate atoms", kCertify, 0, "certify/tol"},
      {"steps", K::Value, "N", "reach tube length", kCertify, 0, "certify/steps"},
      {"ceiling", K::Value, "X", "reach tube width that counts as divergence", kCertify, 0, "certify/ceiling"},
      {"timeout", K::Value, "SEC", "wall-clock budget, checked between batches", kSearch | kOptimize, 0,
       "{budget}/timeout"},
      {"max-domains", K::Value, "N", "subdomain budget", kSearch | kOptimize, 0, "{budget}/max_domains"},
      {"batch", K::Value, "N", "subdomains per bounding batch", kSearch | kOptimize, 0, "{budget}/batch"},
      {"branching", K::Value, "naive|smart", "split dimension rule", kSearch | kOptimize, 0,
       "{budget}/branching"},
      {"gap-tol", K::Value, "X", "absolute optimality gap", kOptimize, 0, "opt/gap_tol"},
      {"no-falsify", K::Switch, "", "skip counterexample search", kSearch},
      {"pgd-restarts", K::Value, "N", "falsifier restarts", kSearch, 0, "pgd/restarts"},
      {"pgd-steps", K::Value, "N", "falsifier steps per restart", kSearch, 0, "pgd/steps"},
      {"mode", K::Value, "crown|ibp", "bounding method", kBounds | kSearch | kOptimize, 0, "bound/mode"},
      {"seed", K::Value, "N", "random seed", kSearch | kOptimize | kSelftest, 0, "seed"},
      {"workers", K::Value, "N", "worker threads", kSearch | kOptimize | kSelftest, 0, "workers"},
      {"fixtures", K::Value, "DIR", "fixture directory", kSelftest},
      {"config", K::Value, "FILE", "config file (default: $BOXCERT_CONFIG)", kAll},
      {"set", K::Repeated, "KEY=VALUE", "override a config entry, e.g. bab/timeout=30", kAll},
      {"out", K::Value, "FILE", "write the result document here instead of stdout", kAll},
      {"timing", K::Switch, "", "include wall-clock times in the result", kAll},
  };
  return table;
}

}  // namespace boxcert::cli

// Simulate a small study, fit the Bernoulli mistake model and print the
// consensus ranking next to the one that generated the data.

#include <cstdio>

#include "mallows/mallows.hpp"

int main() {
  using namespace mallows;

  SimConfig sim;
  sim.n_items = 8;
  sim.n_assessors = 25;
  sim.lambda_m = 15;
  sim.alpha = 3.0;
  sim.mistake = BernoulliParams{0.1};
  sim.seed = 7;
  const auto [data, truth] = generate_dataset(sim);
  int cyclic = 0;
  for (const auto& b : data.preference_sets) cyclic += !analyze_transitivity(b, data.n_items).is_transitive;
  std::printf("%d of %d assessors gave non-transitive preferences\n", cyclic, data.n_assessors());

  ChainConfig cfg;
  cfg.tuning.n_iterations = 20000;
  cfg.tuning.burn_in = 5000;
  const LogZTable table = build_table(cfg.metric, data.n_items);
  const SampleLog log = run_chain(data, cfg, table);
  const ConsensusSummary s = summarize(log);

  std::printf("true consensus   :");
  const Ordering true_order = invert(truth.rho_true[0]);
  for (int i : true_order.items()) std::printf(" %d", i + 1);
  std::printf("\nposterior (CP)   :");
  for (int i : s.clusters[0].cp.items()) std::printf(" %d", i + 1);
  std::printf("\nalpha posterior mean %.2f (true %.1f)\n", s.clusters[0].alpha.mean, sim.alpha);
  if (s.theta) std::printf("theta posterior mean %.3f (true 0.1)\n", s.theta->mean);
  std::printf("rho acceptance %.2f\n",
              static_cast<double>(log.acceptance.rho.accepted) / static_cast<double>(log.acceptance.rho.proposed));
  return 0;
}

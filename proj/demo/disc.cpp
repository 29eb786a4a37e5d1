// Trains the resonant one-class SVM on a uniform disc and prints the
// per-node power split of the first support vectors.
#include <cstdio>

#include "rgt/rgt.hpp"

int main() {
  using namespace rgt;
  const Dataset d = gen_disc(300, 1.0, 1);
  const OcsvmProblem problem(d.x, 0.1, KernelSpec{1.0});

  SolverConfig cfg;
  cfg.mode = Mode::Discrete;
  cfg.tol_cost = 1e-13;
  cfg.max_steps = 200000;
  const TrainResult t = train(problem, cfg, BetaSchedule::constant(1.0, 0.0), 3);

  const ClassifyReport r = classify_dataset(t.model, d.x);
  std::printf("steps %zu  correct %zu  outliers %zu  SVs %zu\n", t.run.steps, r.correct, r.outliers, r.sv_count);

  const PowerReport p = power_report(t.run.final.state);
  std::printf("%6s %12s %12s %12s %10s\n", "node", "alpha", "active", "reactive", "phi");
  for (std::size_t k = 0; k < t.model.sv_indices.size() && k < 8; ++k) {
    const std::size_t i = t.model.sv_indices[k];
    std::printf("%6zu %12.4e %12.4e %12.4e %10.6f\n", i, t.model.alphas[i], p.per_node_active[i],
                p.per_node_reactive[i], t.run.final.state[i].phi);
  }
  std::printf("total |active| %.3e\n", p.total_active_abs);
}

"""Complete a small low-rank matrix from a few observed entries.

Generates one synthetic instance, runs gradient descent and the
trust-region solver on the scale-invariant two-factor geometry, and
reports convergence plus the error on held-out entries.
"""

import time

from fixedrank.completion import CompletionObjective, spectral_init
from fixedrank.geometry import geometry_from_tag
from fixedrank.harness import ExperimentConfig, generate_problem
from fixedrank.solvers import GDConfig, TRConfig, gradient_descent, trust_region


def main():
    config = ExperimentConfig(
        d1=500, d2=400, rank=4, oversampling=5.0, seed=42, instances=1
    )
    problem = generate_problem(config, 0)
    print("shape:", problem.train.shape, " rank:", problem.rank)
    print("observed entries:", problem.train.nnz,
          "({:.2%} of the matrix)".format(
              problem.train.nnz / (config.d1 * config.d2)))

    geometry = geometry_from_tag("fullrank")
    objective = CompletionObjective(problem, geometry)
    x0 = spectral_init(problem, geometry)
    print("cost at spectral init: {:.4e}".format(objective.cost(x0)))

    # first-order: Armijo line search with the adaptive step guess
    start = time.time()
    x_gd, trace_gd = gradient_descent(objective, x0, GDConfig(max_iters=500))
    print("gd:  {:4d} iters, final cost {:.3e}, test rmse {:.3e}, {:.2f}s".format(
        trace_gd.n_iters, trace_gd.final_cost,
        objective.test_rmse(x_gd), time.time() - start))

    # second-order: truncated-CG trust region
    start = time.time()
    x_tr, trace_tr = trust_region(objective, x0, TRConfig())
    print("tr:  {:4d} iters, final cost {:.3e}, test rmse {:.3e}, {:.2f}s".format(
        trace_tr.n_iters, trace_tr.final_cost,
        objective.test_rmse(x_tr), time.time() - start))


if __name__ == "__main__":
    main()

"""Discrete optimization by exponential damping of a superposition.

Every assignment of a chain cost model gets amplitude exp(-tau * cost); the
cheapest assignment has the largest amplitude, so exact readout is exact
optimization.  Constraint layers then zero out invalid assignments, which
turns the same machinery into a route solver.
"""

import math

import numpy as np

from ttkit import (
    IteConfig,
    QudoProblem,
    brute_force_qudo,
    brute_force_tsp,
    ite_state,
    solve_qudo,
    solve_tsp,
)

rng = np.random.default_rng(3)

# --- a chain problem and its amplitude landscape -----------------------------
n, d = 10, 2
problem = QudoProblem(
    tuple(rng.uniform(-1, 1, size=d) for _ in range(n)),
    tuple(rng.uniform(-1, 1, size=(d, d)) for _ in range(n - 1)),
)
state = ite_state(problem, IteConfig(tau=2.0))
amps = np.abs(state.dense_amplitudes()).ravel()
order = np.argsort(amps)[::-1]
print("five largest amplitudes vs their costs:")
for flat in order[:5]:
    config = np.unravel_index(flat, (d,) * n)
    print(f"  {''.join(map(str, config))}  amplitude {amps[flat]:.3e}  "
          f"cost {problem.cost(config):+.4f}")

sol = solve_qudo(problem, IteConfig(tau=2.0))
ref = brute_force_qudo(problem)
print(f"solver: {sol.configuration} cost {sol.cost:+.4f} ({sol.method})")
print(f"oracle: {ref.configuration} cost {ref.cost:+.4f} over all {d**n} assignments")

# --- routes: non-repetition layers on top of the damping ---------------------
d = 7
costs = rng.uniform(1.0, 10.0, size=(d, d))
np.fill_diagonal(costs, 0.0)
print(f"\n{d}-node tours (exact readout vs {math.factorial(d - 1)}-tour enumeration):")
best = {}
for variant in ("closed", "open"):
    sol = solve_tsp(costs, variant)
    ref = brute_force_tsp(costs, variant)
    assert sol.configuration == ref.configuration
    best[variant] = sol
    print(f"  {variant:6s}: {sol.configuration}  cost {sol.cost:.4f}  (matches oracle)")

greedy = solve_tsp(costs, "closed", IteConfig(readout="greedy"))
verdict = "optimal" if greedy.cost == best["closed"].cost else "suboptimal but valid"
print(f"  greedy readout: {greedy.configuration}  cost {greedy.cost:.4f}  ({verdict})")

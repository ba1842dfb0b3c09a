"""Estimated covariances: how close do the structural zeros get?

The smallest Hankel singular value of the first example is about 2.4e-4
of the largest, close to the sampling noise of the covariance estimates,
so the rank decisions are fixed at their true values here and the
residuals are printed against the 5e-2 relative tolerance.
"""
import time

import numpy as np

from ssgranger import algorithm2
from ssgranger.realization import hankel, markov_from_ss
from ssgranger.simulate import SimulationConfig, consistency_report, empirical_covariances, simulate_path
from ssgranger.systems import example1

m = example1()
exact = markov_from_ss(m, 10)
s = np.linalg.svd(hankel(exact, 5), compute_uv=False)
print("exact Hankel profile:", np.round(s[:6] / s[0], 6))

for N in (100_000, 1_000_000):
    for seed in range(3):
        t0 = time.perf_counter()
        y = simulate_path(m, SimulationConfig(N, seed=seed))
        seq = empirical_covariances(y, 10)
        print(f"N={N} seed={seed} lags over loose bound:",
              consistency_report(seq, exact, N).flags["lags_over_bound"])
        res = algorithm2(seq, [2], M=5, tol_zero=5e-2, order=5, n_obs=2)
        rel = {k: round(v / res.report.scales[k], 3) for k, v in res.report.residuals.items()}
        print(f"  verdict={res.verdict} relative residuals={rel} ({time.perf_counter() - t0:.1f}s)")

# With the default exact-data rank tolerance the estimate is full rank
try:
    algorithm2(seq, [2], M=5, tol_zero=5e-2)
except Exception as exc:
    print("default rank decision:", type(exc).__name__, exc)

# The coordinated construction on estimates of the second example
from ssgranger import algorithm4
from ssgranger.model import Partition
from ssgranger.systems import example2

y = simulate_path(example2(), SimulationConfig(1_000_000, seed=0))
try:
    cm = algorithm4(empirical_covariances(y, 10), Partition((1, 1, 1)), tol_zero=5e-2, order=5)
    print("coordinated from estimates:", cm.report.verdicts)
except Exception as exc:
    print("coordinated from estimates:", type(exc).__name__, exc)

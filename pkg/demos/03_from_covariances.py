"""The covariance route: Hankel realization, then the same structure tests."""
import numpy as np

from ssgranger import algorithm2, algorithm4, ho_kalman, markov_from_fact, markov_from_ss
from ssgranger.model import Partition
from ssgranger.realization import hankel
from ssgranger.systems import example1, example2

np.set_printoptions(precision=4)

seq = markov_from_ss(example1(), 10)

# Five nonzero singular values: the McMillan degree
print(np.linalg.svd(hankel(seq, 5), compute_uv=False))

f = ho_kalman(seq, M=5)
print("order:", f.n, " round trip:", markov_from_fact(f, 10).max_abs_diff(seq))

res = algorithm2(seq, target=[2], M=5)
print("verdict:", res.verdict, " split:", res.n1, "|", res.n2)
print("Qe =\n", res.model.Qe)

# A too small order is visible in the round trip
print("order 2 round trip:", markov_from_fact(ho_kalman(seq, 5, order=2), 10).max_abs_diff(seq))

cm = algorithm4(markov_from_ss(example2(), 10), Partition((1, 1, 1)))
print("coordinated from covariances:", cm.report.verdict, cm.state_blocks)

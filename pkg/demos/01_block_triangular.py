"""Reading Granger non-causality off a block-triangular Kalman representation."""
import numpy as np

from ssgranger import algorithm1, barnett_seth, markov_from_kalman, markov_from_ss, min_phase, plain_kalman
from ssgranger.model import Partition
from ssgranger.systems import example1

np.set_printoptions(precision=4, suppress=True)

# Three outputs, five states. Does [y1, y2] help predict y3?
m = example1()
res = algorithm1(m, target=[2])
print("verdict:", res.verdict, " state split:", res.n1, "|", res.n2)

# The lower-left blocks vanish in the returned basis
km = res.model
print("A =\n", km.A)
print("K =\n", km.K)
print("C =\n", km.C)

# D = I and A - B C stable, so the noise already is the innovation
print("max |Qe - Q| =", np.max(np.abs(km.Qe - m.Q)))

# Same covariances as the input model
print("max Markov mismatch:", markov_from_kalman(km, 10).max_abs_diff(markov_from_ss(m, 10)))

# The y3 subsystem has a stable inverse
print("target subsystem minimum phase:", min_phase(res.target_subsystem()))

# Basis-free cross-check through the autoregressive coefficients
print("oracle:", barnett_seth(plain_kalman(m), Partition((2, 1))).verdict)

# The other direction fails: y3 drives y1 and y2
print("y3 -/-> [y1, y2]:", algorithm1(m, target=[0, 1]).verdict)
